// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional arguments pick criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "errmax/active_loop.hpp"
#include "errmax/barrier.hpp"
#include "errmax/cli/run_config.hpp"
#include "errmax/dataset.hpp"
#include "errmax/miner.hpp"
#include "errmax/nn.hpp"
#include "errmax/oracle.hpp"
#include "errmax/parallel.hpp"

namespace {

using namespace errmax;
namespace fs = std::filesystem;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel_err(double a, double b, double floor) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}); }

// ---------------------------------------------------------------------------
// 1. Backprop gradients against central finite differences.

// Extended-precision reference network. Along a single parameter a ReLU net
// is affine between kinks, so central differences carry no truncation error
// and their error is pure roundoff, about eps |Y| / h. Evaluating in long
// double keeps that well below the tolerance even for components near the
// absolute floor. A probe is flagged when its interval crosses a kink.
class ReferenceNet {
public:
    explicit ReferenceNet(const MlpModel& m) : dims_(m.layer_dims()) {
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            w_.emplace_back(m.weights(l).data(), m.weights(l).data() + m.weights(l).size());
            b_.emplace_back(m.biases(l).data(), m.biases(l).data() + m.biases(l).size());
        }
    }

    // Output with parameter (layer, index) shifted by delta; index runs over
    // the column-major weights and then the biases. Layer -1 shifts input
    // coordinate `index`. Appends the ReLU on/off pattern to `pattern`.
    long double eval(const std::vector<long double>& x, int layer, std::size_t index, long double delta,
                     std::vector<bool>& pattern) const {
        std::vector<long double> a = x;
        if (layer < 0) a[index] += delta;
        pattern.clear();
        for (std::size_t l = 0; l < w_.size(); ++l) {
            const std::size_t in = static_cast<std::size_t>(dims_[l]), out = static_cast<std::size_t>(dims_[l + 1]);
            std::vector<long double> z(out);
            for (std::size_t j = 0; j < out; ++j) {
                long double acc = b_[l][j];
                if (static_cast<int>(l) == layer && index == in * out + j) acc += delta;
                for (std::size_t i = 0; i < in; ++i) {
                    long double wij = w_[l][j * in + i];
                    if (static_cast<int>(l) == layer && index == j * in + i) wij += delta;
                    acc += a[i] * wij;
                }
                z[j] = acc;
            }
            if (l + 1 < w_.size()) {
                for (auto& v : z) {
                    pattern.push_back(v > 0);
                    v = v > 0 ? v : 0;
                }
            }
            a = std::move(z);
        }
        return a[0];
    }

private:
    std::vector<int> dims_;
    std::vector<std::vector<long double>> w_, b_;
};

Outcome gradient_check() {
    constexpr double h = 1e-5, tol = 1e-4, floor = 1e-7;
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> n_layers(3, 6), width(8, 64), in_dim(1, 8);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;

    for (int net = 0; net < 20; ++net) {
        std::vector<int> dims{in_dim(rng)};
        const int layers = n_layers(rng);
        for (int l = 0; l + 1 < layers; ++l) dims.push_back(width(rng));
        dims.push_back(1);
        MlpModel m = init_mlp(dims, rng());
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            for (Eigen::Index i = 0; i < m.biases(l).size(); ++i) m.mutable_biases(l)(i) = 0.1 * unit(rng);
        }
        const ReferenceNet ref(m);

        for (int s = 0; s < 10; ++s) {
            Eigen::MatrixXd x(1, dims[0]);
            for (int j = 0; j < dims[0]; ++j) x(0, j) = unit(rng);
            const std::vector<long double> xl(x.data(), x.data() + x.size());
            ForwardTrace trace;
            (void)forward_batch(m, x, trace);
            const ParamGradients g = backward_params(m, trace, Eigen::VectorXd::Ones(1));
            const Eigen::VectorXd gx = input_gradient(m, x.row(0).transpose());
            std::vector<bool> base, up_pattern, down_pattern;
            (void)ref.eval(xl, 0, static_cast<std::size_t>(-1), 0, base);

            auto probe = [&](int layer, std::size_t index, double analytic) {
                const long double up = ref.eval(xl, layer, index, h, up_pattern);
                const long double down = ref.eval(xl, layer, index, -h, down_pattern);
                if (up_pattern != base || down_pattern != base) {
                    ++skipped;
                    return;
                }
                const double fd = static_cast<double>((up - down) / (2.0L * h));
                worst = std::max(worst, rel_err(analytic, fd, floor));
                ++checked;
            };
            for (std::size_t l = 0; l < m.num_layers(); ++l) {
                const auto n_w = static_cast<std::size_t>(m.weights(l).size());
                for (std::size_t i = 0; i < n_w; ++i) probe(static_cast<int>(l), i, g.weights[l].data()[i]);
                for (std::size_t j = 0; j < static_cast<std::size_t>(m.biases(l).size()); ++j) {
                    probe(static_cast<int>(l), n_w + j, g.biases[l](static_cast<Eigen::Index>(j)));
                }
            }
            for (int j = 0; j < dims[0]; ++j) probe(-1, static_cast<std::size_t>(j), gx(j));
        }
    }
    const bool ok = worst < tol && checked > 0 && skipped * 100 < checked;
    return {ok, fmt("max rel err %.3g over %zu components (tol %.0e, floor %.0e, central h %.0e), %zu kink-straddling "
                    "probes skipped",
                    worst, checked, tol, floor, h, skipped)};
}

// ---------------------------------------------------------------------------
// 2. Closed form against Monte Carlo.

Outcome oracle_cross_check() {
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet pts = sample_uniform(z, 50, 777);
    int within = 0, no_payoff = 0;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Eigen::VectorXd r = pts.raw_input(i);
        const BarrierInputs p{r(0), r(1), r(2), r(3), r(4)};
        const int steps = std::max(100, static_cast<int>(std::ceil(250.0 * p.tau)));
        constexpr int paths = 200000;
        const McEstimate mc = mc_reference_price(p, paths, steps, derive_seed(99, i));
        const double exact = barrier_price(p);
        // When no path pays, the sample SE is a degenerate 0. Under the
        // hypothesis that `exact` is the mean, a payoff in [0, M] has variance
        // at most M * exact, which bounds the true SE instead.
        double se = mc.std_error;
        if (se == 0.0) {
            ++no_payoff;
            se = std::sqrt(100.0 * (p.barrier_ratio - p.strike_ratio) * exact / paths);
        }
        const double diff = std::abs(mc.estimate - exact);
        const double zscore = se > 0 ? diff / se : (diff == 0 ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, zscore);
        if (zscore <= 3.0) ++within;
    }
    double worst_far = 0.0;
    for (double k : {0.5, 0.75, 1.0, 1.25, 1.5}) {
        for (double tau : {0.05, 1.0, 2.0}) {
            const double far = barrier_price({1e4, k, tau, 0.3, 0.05});
            worst_far = std::max(worst_far, std::abs(far - vanilla_call(k, tau, 0.3, 0.05)));
        }
    }
    const bool zero_ok = barrier_price({1.2, 1.2, 1.0, 0.3, 0.05}) == 0.0 &&
                         barrier_price({1.1, 1.4, 0.5, 0.2, 0.02}) == 0.0 &&
                         barrier_price({1.01, 1.5, 2.0, 0.6, 0.1}) == 0.0;
    return {within == 50 && worst_far < 1e-6 && zero_ok,
            fmt("%d/50 within 3 SE (worst %.2f SE, %d with no paying path checked against the variance bound); "
                "far-barrier max diff %.2g (tol 1e-6); b<=k zero: %s",
                within, worst_z, no_payoff, worst_far, zero_ok ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 3. Weighted-loss identities.

Outcome weighted_identities() {
    const OracleSpec z = make_barrier_oracle();
    std::mt19937_64 rng(31);
    double worst = 0.0;
    bool exact = true;
    for (int t = 0; t < 100; ++t) {
        const std::size_t na = 1 + rng() % 500, nb = 1 + rng() % 100;
        const LabeledSet a = label(sample_uniform(z, na, rng(), "a"), z, 1);
        const LabeledSet b = label(sample_uniform(z, nb, rng(), "b"), z, 1);
        const MlpModel m = init_mlp({5, 16, 16, 1}, rng());
        const double alpha = AlphaSpec::pooled_mode().resolve(na, nb);
        const double pooled = evaluate(m, merge(a, b)).mse;
        worst = std::max(worst, std::abs(weighted_loss(m, a, b, alpha) - pooled) / pooled);
        exact = exact && weighted_loss(m, a, b, 1.0) == evaluate(m, a).mse &&
                weighted_loss(m, a, b, 0.0) == evaluate(m, b).mse;
    }
    return {worst < 1e-12 && exact,
            fmt("pooled max rel diff %.3g (tol 1e-12); alpha 1 and 0 exact: %s", worst, exact ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 4. Miner on a known landscape.

Outcome miner_ground_truth() {
    const OracleSpec z = make_synthetic_oracle(SyntheticKind::MultimodalSine);
    const Normalizer n = z.normalizer();
    const MlpModel zero({2, 1});
    const LabeledSet s = label(sample_uniform(z, 4000, 5), z, 1);

    AscentConfig cfg;
    cfg.step_decay_period = 1000;
    cfg.stop_rel_change = 1e-10;
    cfg.max_iters = 500;
    cfg.target_count = 200;
    const MineOutcome out = mine(zero, z, s, cfg, FdConfig{}, 0, default_threads());

    auto nearest = [&](const Eigen::VectorXd& x_norm) {
        double best = INFINITY;
        for (const auto& e : z.known_extrema) best = std::min(best, (n.normalize(e) - x_norm).norm());
        return best;
    };
    std::size_t converged = 0, close = 0;
    for (const auto& a : out.ascents) {
        if (a.status != AscentStatus::Converged) continue;
        ++converged;
        if (nearest(a.final_point) < 1e-2) ++close;
    }
    double min_pair = INFINITY;
    const auto& pts = out.maximizers.inputs;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < pts.rows(); ++j) min_pair = std::min(min_pair, (pts.row(i) - pts.row(j)).norm());
    }
    std::size_t improving = 0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (const auto& a : out.ascents) {
            if (a.final_point == pts.row(i).transpose()) {
                if (a.final_sq_error >= a.seed_sq_error) ++improving;
                break;
            }
        }
    }
    const double frac = converged ? static_cast<double>(close) / static_cast<double>(converged) : 0.0;
    const bool ok = converged > 0 && frac >= 0.95 && min_pair >= 1e-3 &&
                    improving == static_cast<std::size_t>(pts.rows()) && pts.rows() > 0;
    return {ok, fmt("%zu/%zu converged ascents within 1e-2 of a maximizer (%.1f%%, need 95%%); %lld kept, min pairwise "
                    "distance %.3g (need >= 1e-3); %zu kept with final E^2 >= seed E^2",
                    close, converged, 100 * frac, static_cast<long long>(pts.rows()), min_pair, improving)};
}

// ---------------------------------------------------------------------------
// 5. Desk-scale trend.

Outcome desk_trend() {
    LoopConfig c;
    c.train_size = 20000;
    c.test_size = 2000;
    c.data_seed = 11;
    c.test_seed = 12;
    c.hidden = {128, 128, 128};
    c.train.initial_lr = 0.003;
    c.mine.target_count = 1000;
    c.mine.seed_fraction = 0.05;
    c.round.alpha = AlphaSpec::pooled_mode();
    c.round.max_rounds = 1;
    const OracleSpec z = make_barrier_oracle();

    int passing = 0;
    std::string detail;
    for (std::uint64_t k = 0; k < 3; ++k) {
        c.init_seed = derive_seed(k, 0);
        c.train_seed = derive_seed(k, 1);
        const LoopResult r = run_loop(c, z, std::nullopt, default_threads());
        if (r.reports.size() < 2) {
            detail += fmt(" [seed %d: no retrain, loop ended %s]", static_cast<int>(k),
                          std::string(to_string(r.termination)).c_str());
            continue;
        }
        const RoundReport& r0 = r.reports[0];
        const RoundReport& r1 = r.reports[1];
        const bool a = r1.maximizer->mae < r0.maximizer->mae;
        const bool b = r1.test.mae <= 1.05 * r0.test.mae;
        passing += a && b;
        detail += fmt(" [seed %d: |M0| %zu, alpha %.4f, M0 MAE %.4g -> %.4g, test MAE %.4g -> %.4g]", static_cast<int>(k),
                      r.mined[0].size(), r1.alpha, r0.maximizer->mae, r1.maximizer->mae, r0.test.mae, r1.test.mae);
    }
    return {passing >= 2, fmt("%d/3 seeds improve (need 2);", passing) + detail};
}

// ---------------------------------------------------------------------------
// 6. Trimmed metrics.

Outcome trimmed_contract() {
    const OracleSpec z = make_barrier_oracle();
    std::mt19937_64 rng(61);
    int violations = 0, cases = 0;
    for (std::size_t size : {2, 10, 999, 1000, 1001, 5000, 20000}) {
        for (int t = 0; t < 3; ++t) {
            const LabeledSet s = label(sample_uniform(z, size, rng()), z, 1);
            const MlpModel m = init_mlp({5, 16, 1}, rng());
            const Metrics full = evaluate(m, s);
            const Metrics trimmed = trimmed_metrics(m, s, 0.001);
            if (!(trimmed_metrics(m, s, 0.0) == full)) ++violations;
            if (trimmed.mse > full.mse || trimmed.mae > full.mae) ++violations;
            ++cases;
        }
    }
    return {violations == 0, fmt("%d violations over %d sets", violations, cases)};
}

// ---------------------------------------------------------------------------
// 7. CLI determinism across thread counts.

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ERRMAX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / ("errmax_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = root / "desk.json";
    {
        std::ofstream(config) << R"({
  "data": {"train_size": 1000, "test_size": 100, "data_seed": 1, "test_seed": 2},
  "model": {"hidden": [32, 32], "init_seed": 3, "train_seed": 4},
  "train": {"max_epochs": 20, "batch_size": 64, "initial_lr": 0.003},
  "mine": {"target_count": 20, "max_iters": 50}
})";
    }
    const std::vector<std::pair<std::string, std::string>> runs{{"a", "1"}, {"b", "2"}, {"c", "1"}};
    for (const auto& [name, threads] : runs) {
        for (const char* stage : {"gen-data", "train", "mine"}) {
            const std::string args = std::string(stage) + " --config " + config.string() + " --out " +
                                     (root / name).string() + " --threads " + threads;
            if (run_cli(args) != 0) return {false, std::string("errmax ") + stage + " failed"};
        }
    }
    std::size_t compared = 0, differing = 0;
    for (const char* stage : {"data", "train", "mine"}) {
        for (const auto& entry : fs::directory_iterator(root / "a" / stage)) {
            if (entry.path().filename() == "manifest.json") continue;
            const std::string ref = slurp(entry.path());
            for (const char* other : {"b", "c"}) {
                ++compared;
                if (slurp(root / other / stage / entry.path().filename()) != ref) ++differing;
            }
        }
        // Manifests hold input paths, which differ per run directory; their
        // output hashes must still agree.
        const auto ma = nlohmann::json::parse(slurp(root / "a" / stage / "manifest.json"));
        for (const char* other : {"b", "c"}) {
            const auto mo = nlohmann::json::parse(slurp(root / other / stage / "manifest.json"));
            ++compared;
            if (ma.at("outputs") != mo.at("outputs") || ma.at("config_hash") != mo.at("config_hash")) ++differing;
        }
    }
    fs::remove_all(root);
    return {differing == 0 && compared > 0,
            fmt("%zu artifact comparisons across --threads 1, 2 and a rerun, %zu differ", compared, differing)};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 gradient correctness", gradient_check},
        {"2 oracle cross-check", oracle_cross_check},
        {"3 weighted-loss identities", weighted_identities},
        {"4 miner on known ground truth", miner_ground_truth},
        {"5 desk-scale trend", desk_trend},
        {"6 trimmed-metric contract", trimmed_contract},
        {"7 determinism", cli_determinism},
    };
    std::vector<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& c : criteria) {
        const std::string number(c.name, std::strchr(c.name, ' '));
        if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
