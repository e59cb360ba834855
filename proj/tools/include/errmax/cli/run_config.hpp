#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errmax/active_loop.hpp"
#include "errmax/oracle.hpp"

namespace errmax::cli {

/// Which oracle a run uses. `domain` empty means the kind's default box;
/// `params` only matter for the synthetic kinds.
struct OracleSection {
    std::string kind = "barrier";
    std::vector<Interval> domain;
    SyntheticParams params;
};

/// Everything a run needs, fully validated by run_config_from_json.
///
/// JSON layout (every key optional, unknown keys rejected):
///
///   oracle: { kind, domain: [[lo, hi], ...], fd: {h, scheme},
///             params: {dim, amplitude, constant, center: [...]} }
///   data:   { train_size, test_size, data_seed, test_seed }
///   model:  { hidden: [w, ...], init_seed, train_seed }
///   train:  TrainConfig fields
///   mine:   AscentConfig fields
///   loop:   RoundConfig fields plus alphas: [number | "pooled", ...]
///   output_dir: string
struct RunConfig {
    OracleSection oracle;
    LoopConfig loop;
    std::vector<AlphaSpec> alphas = {AlphaSpec::pooled_mode()};
    std::filesystem::path output_dir = "errmax_out";

    void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON of the validated config, with defaults filled in. The
/// output directory is left out so relocating a run does not change its hash.
nlohmann::json to_json(const RunConfig& cfg);

OracleSpec build_oracle(const RunConfig& cfg);

/// Replaces the model's init and train seeds with streams derived from `k`,
/// leaving the data seeds alone so runs share S0 and the test set.
void apply_seed_override(RunConfig& cfg, std::uint64_t k);

}  // namespace errmax::cli
