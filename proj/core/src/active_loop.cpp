#include "errmax/active_loop.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "errmax/checkpoint.hpp"
#include "errmax/config_io.hpp"
#include "errmax/error.hpp"
#include "errmax/parallel.hpp"

namespace errmax {

namespace {

Metrics metrics_of(const Eigen::VectorXd& residual) {
    const auto n = static_cast<double>(residual.size());
    return {residual.squaredNorm() / n, residual.cwiseAbs().sum() / n};
}

Eigen::VectorXd residuals(const MlpModel& model, const LabeledSet& set) {
    require(!set.empty(), ErrorKind::Domain, "cannot evaluate on the empty set '" + set.name + "'");
    require(set.is_labeled(), ErrorKind::Domain, "set '" + set.name + "' is not labelled");
    return forward_batch(model, set.inputs) - set.targets;
}

std::size_t trim_count(double fraction, std::size_t n) {
    if (fraction <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace

double AlphaSpec::resolve(std::size_t n_base, std::size_t n_mined) const {
    if (pooled) {
        if (n_base + n_mined == 0) return 1.0;
        return static_cast<double>(n_base) / static_cast<double>(n_base + n_mined);
    }
    require(value >= 0.0 && value <= 1.0, ErrorKind::Domain, "alpha must lie in [0, 1]");
    return value;
}

std::string AlphaSpec::str() const {
    if (pooled) return "pooled";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

AlphaSpec AlphaSpec::parse(const std::string& text) {
    if (text == "pooled") return pooled_mode();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    require(ec == std::errc{} && ptr == text.data() + text.size() && !text.empty(), ErrorKind::InvalidSpec,
            "alpha must be a number in [0,1] or 'pooled', got '" + text + "'");
    require(v >= 0.0 && v <= 1.0, ErrorKind::InvalidSpec, "alpha " + text + " outside [0, 1]");
    return fixed(v);
}

std::string_view to_string(RetrainMode mode) { return mode == RetrainMode::Fresh ? "fresh" : "fine-tune"; }

RetrainMode parse_retrain_mode(std::string_view text) {
    if (text == "fresh") return RetrainMode::Fresh;
    if (text == "fine-tune") return RetrainMode::FineTune;
    fail(ErrorKind::InvalidSpec, "retrain_mode must be 'fresh' or 'fine-tune'");
}

std::string_view to_string(LoopTermination t) {
    switch (t) {
        case LoopTermination::MaxRounds: return "max-rounds";
        case LoopTermination::NoNewMaximizers: return "no-new-maximizers";
        case LoopTermination::LevelledOff: return "levelled-off";
    }
    return "unknown";
}

void RoundConfig::validate() const {
    require(alpha.pooled || (alpha.value >= 0.0 && alpha.value <= 1.0), ErrorKind::InvalidSpec,
            "alpha must lie in [0, 1]");
    require(step_tightening > 0.0 && step_tightening <= 1.0, ErrorKind::InvalidSpec,
            "step_tightening must be in (0, 1]");
    require(tol_tightening > 0.0 && tol_tightening <= 1.0, ErrorKind::InvalidSpec, "tol_tightening must be in (0, 1]");
    require(max_rounds >= 0, ErrorKind::InvalidSpec, "max_rounds must be >= 0");
    require(level_off >= 0.0, ErrorKind::InvalidSpec, "level_off must be >= 0");
    require(trim_fraction >= 0.0 && trim_fraction < 1.0, ErrorKind::InvalidSpec, "trim_fraction must be in [0, 1)");
}

AscentConfig tightened(const AscentConfig& base, const RoundConfig& round, int k) {
    AscentConfig c = base;
    c.initial_step = base.initial_step * std::pow(round.step_tightening, k);
    c.stop_rel_change = base.stop_rel_change * std::pow(round.tol_tightening, k);
    return c;
}

double weighted_loss(const MlpModel& model, const LabeledSet& base, const LabeledSet& mined, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::Domain, "alpha must lie in [0, 1]");
    require(!base.empty(), ErrorKind::Domain, "weighted loss needs a non-empty base set");
    require(alpha == 1.0 || !mined.empty(), ErrorKind::Domain, "weighted loss with alpha < 1 needs mined samples");
    require(base.is_labeled() && mined.is_labeled(), ErrorKind::Domain, "weighted loss needs labelled sets");
    return weighted_objective(model, base.view(), mined.view(), alpha);
}

Metrics evaluate(const MlpModel& model, const LabeledSet& set) { return metrics_of(residuals(model, set)); }

Metrics trimmed_metrics(const MlpModel& model, const LabeledSet& set, double trim_fraction) {
    require(trim_fraction >= 0.0 && trim_fraction < 1.0, ErrorKind::Domain, "trim fraction must be in [0, 1)");
    const Eigen::VectorXd r = residuals(model, set);
    const std::size_t n = set.size();
    const std::size_t drop = trim_count(trim_fraction, n);
    require(drop < n, ErrorKind::Domain, "trimming would empty the set '" + set.name + "'");
    if (drop == 0) return metrics_of(r);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(drop), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double ra = std::abs(r(static_cast<Eigen::Index>(a)));
                          const double rb = std::abs(r(static_cast<Eigen::Index>(b)));
                          return ra != rb ? ra > rb : a < b;
                      });
    std::vector<bool> dropped(n, false);
    for (std::size_t i = 0; i < drop; ++i) dropped[idx[i]] = true;

    Eigen::VectorXd kept(static_cast<Eigen::Index>(n - drop));
    Eigen::Index out = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!dropped[i]) kept(out++) = r(static_cast<Eigen::Index>(i));
    }
    return metrics_of(kept);
}

RetrainOutcome retrain(const MlpModel& model, const LabeledSet& base, const LabeledSet& mined,
                       const RoundConfig& round, const TrainConfig& train_cfg, std::uint64_t init_seed,
                       std::uint64_t train_seed) {
    require(base.normalizer == mined.normalizer || mined.empty(), ErrorKind::IncompatibleSets,
            "base and mined sets use different normalizers");
    RetrainOutcome out;
    out.alpha = round.alpha.resolve(base.size(), mined.size());
    out.model = round.retrain_mode == RetrainMode::Fresh ? init_mlp(model.layer_dims(), init_seed) : model;
    out.train = train(out.model, base.view(), mined.view(), out.alpha, train_cfg, train_seed);
    return out;
}

RoundReport assemble_report(const MlpModel& model, int round, double alpha, const AlphaSpec& spec,
                            const LabeledSet& base, const LabeledSet& mined, const LabeledSet& test,
                            const LabeledSet* maximizers, double trim_fraction, int epochs) {
    RoundReport r;
    r.round = round;
    r.alpha = alpha;
    r.alpha_mode = spec.pooled ? "pooled" : "fixed";
    r.n_base = base.size();
    r.n_mined = alpha == 1.0 ? 0 : mined.size();
    r.train = r.n_mined == 0 ? evaluate(model, base) : evaluate(model, merge(base, mined));
    r.test = evaluate(model, test);
    r.trim_fraction = trim_fraction;
    r.epochs = epochs;
    if (maximizers != nullptr && !maximizers->empty()) {
        r.maximizer = evaluate(model, *maximizers);
        r.n_maximizer_eval = maximizers->size();
        if (trim_count(trim_fraction, maximizers->size()) < maximizers->size()) {
            r.trimmed_maximizer = trimmed_metrics(model, *maximizers, trim_fraction);
        }
    }
    return r;
}

std::vector<SweepEntry> alpha_sweep(const LabeledSet& base, const LabeledSet& mined, const LabeledSet& test,
                                    const std::vector<AlphaSpec>& alphas, const RoundConfig& round,
                                    const TrainConfig& train_cfg, const std::vector<int>& layer_dims,
                                    std::uint64_t init_seed, std::uint64_t train_seed, unsigned threads) {
    std::vector<SweepEntry> entries(alphas.size());
    const MlpModel shape(layer_dims, init_seed);
    parallel_for(alphas.size(), threads, [&](std::size_t i) {
        RoundConfig rc = round;
        rc.alpha = alphas[i];
        rc.retrain_mode = RetrainMode::Fresh;
        SweepEntry& e = entries[i];
        e.alpha = alphas[i];
        e.outcome = retrain(shape, base, mined, rc, train_cfg, init_seed, train_seed);
        e.report = assemble_report(e.outcome.model, e.outcome.alpha == 1.0 ? 0 : 1, e.outcome.alpha, alphas[i],
                                   base, mined, test, &mined, round.trim_fraction, e.outcome.train.epochs_run());
    });
    return entries;
}

std::vector<int> LoopConfig::layer_dims(std::size_t input_dim) const {
    std::vector<int> dims{static_cast<int>(input_dim)};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(1);
    return dims;
}

void LoopConfig::validate() const {
    require(train_size >= 1 && test_size >= 1, ErrorKind::InvalidSpec, "train and test sizes must be >= 1");
    for (int w : hidden) require(w > 0, ErrorKind::InvalidSpec, "hidden widths must be > 0");
    train.validate();
    mine.validate();
    fd.validate();
    round.validate();
}

namespace {

class LoopRecorder {
public:
    explicit LoopRecorder(const std::optional<std::filesystem::path>& dir) : dir_(dir) {
        if (dir_) std::filesystem::create_directories(*dir_);
    }

    [[nodiscard]] std::optional<std::filesystem::path> round_dir(int k) const {
        if (!dir_) return std::nullopt;
        auto d = *dir_ / ("round_" + std::to_string(k));
        std::filesystem::create_directories(d);
        return d;
    }

    void save_round(int k, const MlpModel& model, const LabeledSet& train_set, const RoundReport& report,
                    const nlohmann::json& meta) const {
        const auto d = round_dir(k);
        if (!d) return;
        save_checkpoint(*d / "model.ckpt", {model, meta});
        save_csv(train_set, *d / "train.csv");
        write_json(*d / "report.json", report);
    }

    void save_report(int k, const RoundReport& report) const {
        if (const auto d = round_dir(k)) write_json(*d / "report.json", report);
    }

    void save_mined(int k, const LabeledSet& mined, const std::vector<AscentResult>& ascents) const {
        const auto d = round_dir(k);
        if (!d) return;
        save_csv(mined, *d / "mined.csv");
        if (!ascents.empty()) write_ascent_log(ascents, *d / "ascents.jsonl");
    }

    void save_summary(const LoopResult& result, const std::string& status, const std::string& error = {}) const {
        if (!dir_) return;
        nlohmann::json j{{"status", status}, {"termination", std::string(to_string(result.termination))},
                         {"reports", result.reports}};
        if (!error.empty()) j["error"] = error;
        write_json(*dir_ / "reports.json", j);
        if (!result.reports.empty()) {
            std::ofstream(*dir_ / "table.md", std::ios::binary | std::ios::trunc) << render_table(result.reports);
        }
    }

private:
    std::optional<std::filesystem::path> dir_;
};

}  // namespace

LoopResult run_loop(const LoopConfig& cfg, const OracleSpec& oracle, const std::optional<std::filesystem::path>& out_dir,
                    unsigned threads, const RoundCallback& on_round) {
    cfg.validate();
    const LoopRecorder rec(out_dir);
    LoopResult result;
    auto meta = [&](int k, double alpha) {
        return nlohmann::json{{"round", k},
                              {"alpha", alpha},
                              {"init_seed", cfg.init_seed},
                              {"train_seed", derive_seed(cfg.train_seed, static_cast<std::uint64_t>(k))},
                              {"train", to_json(cfg.train)},
                              {"loop", to_json(cfg.round)}};
    };

    try {
        LabeledSet train_set = label(sample_uniform(oracle, cfg.train_size, cfg.data_seed, "S0"), oracle, threads);
        const LabeledSet test = label(sample_uniform(oracle, cfg.test_size, cfg.test_seed, "test"), oracle, threads);
        if (out_dir) save_csv(test, *out_dir / "test.csv");
        const LabeledSet none = empty_set(oracle, "none");

        MlpModel model = init_mlp(cfg.layer_dims(oracle.dim()), cfg.init_seed);
        const TrainResult tr0 = train(model, train_set.view(), cfg.train, derive_seed(cfg.train_seed, 0));
        result.reports.push_back(assemble_report(model, 0, 1.0, AlphaSpec::fixed(1.0), train_set, none, test, nullptr,
                                                 cfg.round.trim_fraction, tr0.epochs_run()));
        result.models.push_back(model);
        rec.save_round(0, model, train_set, result.reports.back(), meta(0, 1.0));
        rec.save_summary(result, "incomplete");
        if (on_round) on_round(result.reports.back());

        LabeledSet all_mined = empty_set(oracle, "M");
        for (int k = 1; k <= cfg.round.max_rounds; ++k) {
            const int mining_round = k - 1;
            const AscentConfig acfg = tightened(cfg.mine, cfg.round, mining_round);
            LabeledSet mined;
            std::vector<AscentResult> ascents;
            bool shortfall = false;
            if (cfg.round.uniform_baseline) {
                mined = uniform_baseline(oracle, acfg.target_count,
                                         derive_seed(cfg.data_seed, static_cast<std::uint64_t>(k)), mining_round,
                                         threads);
            } else {
                MineOutcome mo = mine(model, oracle, train_set, acfg, cfg.fd, mining_round, threads);
                mined = std::move(mo.maximizers);
                ascents = std::move(mo.ascents);
                shortfall = mo.shortfall;
            }
            rec.save_mined(mining_round, mined, ascents);

            RoundReport& prev = result.reports.back();
            prev.shortfall = shortfall;
            if (mining_round == 0 && !mined.empty()) {
                prev = assemble_report(model, 0, 1.0, AlphaSpec::fixed(1.0), train_set, none, test, &mined,
                                       cfg.round.trim_fraction, prev.epochs);
                prev.shortfall = shortfall;
            }
            rec.save_report(mining_round, prev);

            if (mined.empty()) {
                result.termination = LoopTermination::NoNewMaximizers;
                break;
            }
            result.mined.push_back(mined);
            all_mined = merge(all_mined, mined, "M");

            RetrainOutcome next = retrain(model, train_set, mined, cfg.round, cfg.train, cfg.init_seed,
                                          derive_seed(cfg.train_seed, static_cast<std::uint64_t>(k)));
            RoundReport report = assemble_report(next.model, k, next.alpha, cfg.round.alpha, train_set, mined, test,
                                                 &all_mined, cfg.round.trim_fraction, next.train.epochs_run());
            train_set = merge(train_set, mined, "S" + std::to_string(k));
            model = std::move(next.model);

            const double prev_test = result.reports.back().test.mse;
            result.reports.push_back(report);
            result.models.push_back(model);
            rec.save_round(k, model, train_set, report, meta(k, next.alpha));
            rec.save_summary(result, "incomplete");
            if (on_round) on_round(report);

            if (k < cfg.round.max_rounds && prev_test > 0.0 &&
                (prev_test - report.test.mse) / prev_test < cfg.round.level_off) {
                result.termination = LoopTermination::LevelledOff;
                break;
            }
        }
    } catch (const std::exception& e) {
        rec.save_summary(result, "incomplete", e.what());
        throw;
    }
    rec.save_summary(result, "complete");
    return result;
}

}  // namespace errmax
