#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "errmax/dataset.hpp"
#include "errmax/nn.hpp"
#include "errmax/oracle.hpp"

namespace errmax {

/// Gradient-ascent schedule and mining policy. Steps, radii and gradients are
/// all in normalised coordinates.
struct AscentConfig {
    double initial_step = 1e-3;
    double step_decay_factor = 10.0;
    int step_decay_period = 30;       // iterations
    double stop_rel_change = 1e-3;    // relative change of E^2 over one iteration
    int max_iters = 500;
    double dedup_radius = 1e-3;
    double seed_fraction = 0.05;
    std::size_t target_count = 10000;
    int max_halvings = 10;            // local step halvings when a step leaves the valid region
    double min_sq_error = 1e-12;      // maximizers with a smaller E^2 are not kept

    void validate() const;
};

/// initial_step / decay_factor^floor(iter / period)
double ascent_step(const AscentConfig& cfg, int iter);

enum class AscentStatus { Converged, MaxIters, RejectedNonimproving };

std::string_view to_string(AscentStatus status);
AscentStatus parse_ascent_status(std::string_view text);

struct AscentResult {
    std::size_t seed_index = 0;
    Eigen::VectorXd seed_point;
    Eigen::VectorXd final_point;
    double seed_sq_error = 0.0;
    double final_sq_error = 0.0;
    int iters = 0;
    AscentStatus status = AscentStatus::MaxIters;
};

/// Indices of the ceil(fraction * |set|) samples with the largest |Y - z|,
/// largest first, ties by ascending index.
std::vector<std::size_t> select_seeds(const MlpModel& model, const LabeledSet& set, double fraction);

/// One ascent on E^2 = (Y - Z)^2 from `seed` (normalised):
///
///   x_{n+1} = clip(x_n + s_n * 2 (Y - Z) (grad Y - grad Z), [0,1]^d)
///
/// with s_n from ascent_step, grad Y by backprop and grad Z by finite
/// differences. A step that lands outside the valid region is halved up to
/// max_halvings times; if none is admissible the ascent stops there. Stops when
/// |E^2_{n+1} - E^2_n| / E^2_n < stop_rel_change or after max_iters steps.
/// Ends RejectedNonimproving whenever the final E^2 is below the seed's.
AscentResult ascend(const MlpModel& model, const OracleSpec& oracle, const Eigen::VectorXd& seed,
                    const AscentConfig& cfg, const FdConfig& fd);

/// Greedy proximity filter: visit results by descending final E^2 (ties by
/// position), keep one iff it is at least `radius` from every kept point.
/// Output is in visiting order.
std::vector<AscentResult> dedup(const std::vector<AscentResult>& results, double radius);

struct MineOutcome {
    LabeledSet maximizers;
    std::vector<AscentResult> ascents;   // one per seed, in seed order
    std::size_t admitted = 0;            // improving, non-negligible ascents
    std::size_t unique = 0;              // survivors of dedup
    bool shortfall = false;              // fewer than target_count maximizers
};

/// select_seeds -> ascend each seed (in parallel) -> drop non-improving and
/// negligible results -> dedup -> keep the top target_count by E^2 -> label.
/// The maximizers carry provenance mined-round-<round>. Output does not depend
/// on `threads`.
MineOutcome mine(const MlpModel& model, const OracleSpec& oracle, const LabeledSet& set, const AscentConfig& cfg,
                 const FdConfig& fd, int round = 0, unsigned threads = 0);

/// Comparison baseline: `count` fresh uniform points tagged as round `round`.
LabeledSet uniform_baseline(const OracleSpec& oracle, std::size_t count, std::uint64_t seed, int round,
                            unsigned threads = 0);

/// One JSON object per line: seed_index, seed, final, seed_sq_error,
/// final_sq_error, iters, status.
void write_ascent_log(const std::vector<AscentResult>& ascents, const std::filesystem::path& path);

}  // namespace errmax
