#include "errmax/miner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "errmax/error.hpp"
#include "errmax/parallel.hpp"

namespace errmax {

namespace {

std::string describe(const Eigen::VectorXd& x) {
    std::ostringstream out;
    out.precision(17);
    for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? "," : "") << x(i);
    return out.str();
}

std::vector<double> to_vector(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

struct ErrorProbe {
    double residual;  // Y - Z
    double z;
};

ErrorProbe probe(const MlpModel& model, const OracleSpec& oracle, const Normalizer& norm, const Eigen::VectorXd& x) {
    double z = 0.0;
    try {
        z = oracle(norm.denormalize(x));
    } catch (const std::exception& e) {
        throw AscentError(describe(x), std::string("oracle failed: ") + e.what());
    }
    if (!std::isfinite(z)) throw AscentError(describe(x), "oracle returned a non-finite value");
    return {forward(model, x) - z, z};
}

}  // namespace

void AscentConfig::validate() const {
    require(initial_step > 0.0 && std::isfinite(initial_step), ErrorKind::InvalidSpec, "initial_step must be > 0");
    require(step_decay_factor >= 1.0, ErrorKind::InvalidSpec, "step_decay_factor must be >= 1");
    require(step_decay_period > 0, ErrorKind::InvalidSpec, "step_decay_period must be > 0");
    require(stop_rel_change > 0.0, ErrorKind::InvalidSpec, "stop_rel_change must be > 0");
    require(max_iters > 0, ErrorKind::InvalidSpec, "max_iters must be > 0");
    require(dedup_radius > 0.0, ErrorKind::InvalidSpec, "dedup_radius must be > 0");
    require(seed_fraction > 0.0 && seed_fraction <= 1.0, ErrorKind::InvalidSpec, "seed_fraction must be in (0, 1]");
    require(target_count > 0, ErrorKind::InvalidSpec, "target_count must be > 0");
    require(max_halvings >= 0, ErrorKind::InvalidSpec, "max_halvings must be >= 0");
    require(min_sq_error >= 0.0, ErrorKind::InvalidSpec, "min_sq_error must be >= 0");
}

double ascent_step(const AscentConfig& cfg, int iter) {
    return cfg.initial_step / std::pow(cfg.step_decay_factor, iter / cfg.step_decay_period);
}

std::string_view to_string(AscentStatus status) {
    switch (status) {
        case AscentStatus::Converged: return "converged";
        case AscentStatus::MaxIters: return "max-iters";
        case AscentStatus::RejectedNonimproving: return "rejected-nonimproving";
    }
    return "unknown";
}

AscentStatus parse_ascent_status(std::string_view text) {
    if (text == "converged") return AscentStatus::Converged;
    if (text == "max-iters") return AscentStatus::MaxIters;
    if (text == "rejected-nonimproving") return AscentStatus::RejectedNonimproving;
    fail(ErrorKind::Parse, "unknown ascent status '" + std::string(text) + "'");
}

std::vector<std::size_t> select_seeds(const MlpModel& model, const LabeledSet& set, double fraction) {
    require(!set.empty(), ErrorKind::EmptyInput, "cannot select seeds from an empty set");
    require(set.is_labeled(), ErrorKind::Domain, "seed selection needs a labelled set");
    require(fraction > 0.0 && fraction <= 1.0, ErrorKind::Domain, "seed fraction must be in (0, 1]");

    const std::size_t n = set.size();
    // The small slack keeps e.g. 0.05 * 200000 from rounding up to 10001.
    auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    count = std::clamp<std::size_t>(count, 1, n);

    const Eigen::VectorXd abs_err = (forward_batch(model, set.inputs) - set.targets).cwiseAbs();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double ea = abs_err(static_cast<Eigen::Index>(a));
                          const double eb = abs_err(static_cast<Eigen::Index>(b));
                          return ea != eb ? ea > eb : a < b;
                      });
    idx.resize(count);
    return idx;
}

AscentResult ascend(const MlpModel& model, const OracleSpec& oracle, const Eigen::VectorXd& seed,
                    const AscentConfig& cfg, const FdConfig& fd) {
    cfg.validate();
    fd.validate();
    require(seed.size() == static_cast<Eigen::Index>(oracle.dim()), ErrorKind::Shape, "seed dimension mismatch");
    const Normalizer norm = oracle.normalizer();
    require(oracle.valid(norm.denormalize(seed)), ErrorKind::Domain, "ascent seed is not a valid point");

    AscentResult result;
    result.seed_point = seed;
    Eigen::VectorXd x = seed;
    ErrorProbe at = probe(model, oracle, norm, x);
    double sq = at.residual * at.residual;
    result.seed_sq_error = sq;
    result.status = AscentStatus::MaxIters;

    for (int n = 0; n < cfg.max_iters; ++n) {
        Eigen::VectorXd grad_z;
        try {
            grad_z = fd_gradient(oracle, x, fd, norm, at.z);
        } catch (const GradientProbeError& e) {
            throw AscentError(describe(x), e.what());
        }
        const Eigen::VectorXd grad = 2.0 * at.residual * (input_gradient(model, x) - grad_z);

        double step = ascent_step(cfg, n);
        bool admissible = false;
        Eigen::VectorXd candidate;
        for (int h = 0; h <= cfg.max_halvings; ++h, step *= 0.5) {
            candidate = (x + step * grad).cwiseMax(0.0).cwiseMin(1.0);
            if (oracle.valid(norm.denormalize(candidate))) {
                admissible = true;
                break;
            }
        }
        if (!admissible) {
            result.status = AscentStatus::Converged;
            break;
        }

        x = candidate;
        result.iters = n + 1;
        at = probe(model, oracle, norm, x);
        const double next = at.residual * at.residual;
        const double change = sq == 0.0 ? (next == 0.0 ? 0.0 : INFINITY) : std::abs(next - sq) / sq;
        sq = next;
        if (change < cfg.stop_rel_change) {
            result.status = AscentStatus::Converged;
            break;
        }
    }

    result.final_point = x;
    result.final_sq_error = sq;
    if (result.final_sq_error < result.seed_sq_error) result.status = AscentStatus::RejectedNonimproving;
    return result;
}

std::vector<AscentResult> dedup(const std::vector<AscentResult>& results, double radius) {
    require(radius > 0.0, ErrorKind::Domain, "dedup radius must be > 0");
    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return results[a].final_sq_error > results[b].final_sq_error;
    });

    std::vector<AscentResult> kept;
    for (std::size_t i : order) {
        const auto& p = results[i].final_point;
        const bool isolated = std::all_of(kept.begin(), kept.end(), [&](const AscentResult& k) {
            return (k.final_point - p).norm() >= radius;
        });
        if (isolated) kept.push_back(results[i]);
    }
    return kept;
}

MineOutcome mine(const MlpModel& model, const OracleSpec& oracle, const LabeledSet& set, const AscentConfig& cfg,
                 const FdConfig& fd, int round, unsigned threads) {
    cfg.validate();
    fd.validate();
    const std::vector<std::size_t> seeds = select_seeds(model, set, cfg.seed_fraction);
    require(cfg.target_count <= seeds.size(), ErrorKind::InvalidSpec,
            "target_count " + std::to_string(cfg.target_count) + " exceeds the " + std::to_string(seeds.size()) +
                " available seeds");

    MineOutcome out;
    out.ascents.resize(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        AscentResult r = ascend(model, oracle, set.input(seeds[i]), cfg, fd);
        r.seed_index = seeds[i];
        out.ascents[i] = std::move(r);
    });

    std::vector<AscentResult> admitted;
    for (const auto& r : out.ascents) {
        if (r.status != AscentStatus::RejectedNonimproving && r.final_sq_error >= cfg.min_sq_error &&
            r.final_sq_error > 0.0) {
            admitted.push_back(r);
        }
    }
    out.admitted = admitted.size();

    std::vector<AscentResult> unique = dedup(admitted, cfg.dedup_radius);
    out.unique = unique.size();
    if (unique.size() > cfg.target_count) unique.resize(cfg.target_count);
    out.shortfall = unique.size() < cfg.target_count;

    LabeledSet maximizers = empty_set(oracle, "M" + std::to_string(round));
    maximizers.normalizer = set.normalizer;
    maximizers.inputs.resize(static_cast<Eigen::Index>(unique.size()), static_cast<Eigen::Index>(set.dim()));
    for (std::size_t i = 0; i < unique.size(); ++i) {
        maximizers.inputs.row(static_cast<Eigen::Index>(i)) = unique[i].final_point.transpose();
    }
    maximizers.provenance.assign(unique.size(), Provenance::mined(round));
    out.maximizers = label(std::move(maximizers), oracle, threads);
    return out;
}

LabeledSet uniform_baseline(const OracleSpec& oracle, std::size_t count, std::uint64_t seed, int round,
                            unsigned threads) {
    LabeledSet set = sample_uniform(oracle, count, seed, "M" + std::to_string(round));
    set.provenance.assign(count, Provenance::mined(round));
    return label(std::move(set), oracle, threads);
}

void write_ascent_log(const std::vector<AscentResult>& ascents, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    for (const auto& r : ascents) {
        nlohmann::json j;
        j["seed_index"] = r.seed_index;
        j["seed"] = to_vector(r.seed_point);
        j["final"] = to_vector(r.final_point);
        j["seed_sq_error"] = r.seed_sq_error;
        j["final_sq_error"] = r.final_sq_error;
        j["iters"] = r.iters;
        j["status"] = std::string(to_string(r.status));
        out << j.dump() << '\n';
    }
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace errmax
