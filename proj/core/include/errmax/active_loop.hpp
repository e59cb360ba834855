#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errmax/dataset.hpp"
#include "errmax/miner.hpp"
#include "errmax/nn.hpp"
#include "errmax/oracle.hpp"
#include "errmax/report.hpp"

namespace errmax {

/// Weight on the base-set term of the objective. `pooled` resolves to
/// |base| / (|base| + |mined|), which weights every sample equally.
struct AlphaSpec {
    bool pooled = true;
    double value = 1.0;

    static AlphaSpec pooled_mode() { return {true, 1.0}; }
    static AlphaSpec fixed(double alpha) { return {false, alpha}; }

    [[nodiscard]] double resolve(std::size_t n_base, std::size_t n_mined) const;
    [[nodiscard]] std::string str() const;
    static AlphaSpec parse(const std::string& text);
};

enum class RetrainMode { Fresh, FineTune };

std::string_view to_string(RetrainMode mode);
RetrainMode parse_retrain_mode(std::string_view text);

struct RoundConfig {
    AlphaSpec alpha = AlphaSpec::pooled_mode();
    RetrainMode retrain_mode = RetrainMode::Fresh;
    double step_tightening = 0.01;   // initial_step multiplier per round
    double tol_tightening = 0.01;    // stop_rel_change multiplier per round
    int max_rounds = 1;
    double level_off = 0.01;         // stop when relative test-MSE gain < this
    double trim_fraction = 0.001;
    bool uniform_baseline = false;   // replace mining by uniform resampling

    void validate() const;
};

/// Ascent schedule for mining round k: initial_step * step_tightening^k and
/// stop_rel_change * tol_tightening^k.
AscentConfig tightened(const AscentConfig& base, const RoundConfig& round, int k);

/// alpha * mean_base |Y - Z|^2 + (1 - alpha) * mean_mined |Y - Z|^2.
/// Throws Domain for alpha outside [0,1], an empty base, or an empty mined
/// set with alpha < 1.
double weighted_loss(const MlpModel& model, const LabeledSet& base, const LabeledSet& mined, double alpha);

/// Mean squared and mean absolute residual. Throws Domain on an empty set.
Metrics evaluate(const MlpModel& model, const LabeledSet& set);

/// evaluate() after dropping the ceil(trim_fraction * n) samples with the
/// largest |Y - z| (ties: lower index dropped first).
Metrics trimmed_metrics(const MlpModel& model, const LabeledSet& set, double trim_fraction);

struct RetrainOutcome {
    MlpModel model;
    TrainResult train;
    double alpha = 1.0;
};

/// Fresh mode re-initialises from `init_seed`; fine-tune continues from `model`.
RetrainOutcome retrain(const MlpModel& model, const LabeledSet& base, const LabeledSet& mined,
                       const RoundConfig& round, const TrainConfig& train_cfg, std::uint64_t init_seed,
                       std::uint64_t train_seed);

/// Report for a model trained on base (+ mined with weight alpha).
RoundReport assemble_report(const MlpModel& model, int round, double alpha, const AlphaSpec& spec,
                            const LabeledSet& base, const LabeledSet& mined, const LabeledSet& test,
                            const LabeledSet* maximizers, double trim_fraction, int epochs);

struct SweepEntry {
    AlphaSpec alpha;
    RetrainOutcome outcome;
    RoundReport report;
};

/// Independent fresh retrains on base + mined, one per alpha, all from the
/// same seeds. Maximizer metrics are measured on `mined`.
std::vector<SweepEntry> alpha_sweep(const LabeledSet& base, const LabeledSet& mined, const LabeledSet& test,
                                    const std::vector<AlphaSpec>& alphas, const RoundConfig& round,
                                    const TrainConfig& train_cfg, const std::vector<int>& layer_dims,
                                    std::uint64_t init_seed, std::uint64_t train_seed, unsigned threads = 0);

struct LoopConfig {
    std::size_t train_size = 200000;
    std::size_t test_size = 10000;
    std::uint64_t data_seed = 1;
    std::uint64_t test_seed = 2;
    std::vector<int> hidden = {512, 512, 512, 512, 512};
    std::uint64_t init_seed = 3;
    std::uint64_t train_seed = 4;
    TrainConfig train;
    AscentConfig mine;
    FdConfig fd;
    RoundConfig round;

    [[nodiscard]] std::vector<int> layer_dims(std::size_t input_dim) const;
    void validate() const;
};

enum class LoopTermination { MaxRounds, NoNewMaximizers, LevelledOff };

std::string_view to_string(LoopTermination t);

struct LoopResult {
    std::vector<RoundReport> reports;
    std::vector<MlpModel> models;     // one per report
    std::vector<LabeledSet> mined;    // M_0, M_1, ...
    LoopTermination termination = LoopTermination::MaxRounds;
};

/// Optional hook invoked after each finished round (for logging).
using RoundCallback = std::function<void(const RoundReport&)>;

/// Round 0 samples S_0 and the test set, trains on S_0 and evaluates. Each
/// round k >= 1 mines M_{k-1} from the current model seeded on S_{k-1} with
/// the schedule tightened k-1 times, retrains on S_k = S_{k-1} + M_{k-1}, and
/// evaluates on S_k, the test set and every maximizer found so far. The round-0
/// report's maximizer metrics are measured on M_0. Stops after max_rounds,
/// when mining finds nothing, or when the relative test-MSE gain falls below
/// level_off.
///
/// With `out_dir` set, every round writes round_<k>/{model.ckpt, train.csv,
/// mined.csv, report.json} and the run keeps reports.json up to date
/// (status "incomplete" until it finishes, so an aborted run leaves the
/// partial list behind).
LoopResult run_loop(const LoopConfig& cfg, const OracleSpec& oracle,
                    const std::optional<std::filesystem::path>& out_dir = std::nullopt, unsigned threads = 0,
                    const RoundCallback& on_round = {});

}  // namespace errmax
