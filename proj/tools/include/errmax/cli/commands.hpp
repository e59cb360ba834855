#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "errmax/cli/run_config.hpp"

namespace errmax::cli {

/// Per-invocation settings shared by every stage. Input paths left unset
/// default to the standard layout under `out`:
///
///   out/data/{S0.csv, test.csv}              gen-data
///   out/train/{model.ckpt, history.json, report.json}
///   out/mine/{M<k>.csv, ascents.jsonl, summary.json}
///   out/retrain/alpha_<a>/{model.ckpt, report.json}, reports.json, table.md
///   out/eval/eval.json
///   out/loop/round_<k>/..., reports.json, table.md
///
/// Each stage directory also receives a manifest.json.
struct StageOptions {
    std::filesystem::path out;
    unsigned threads = 0;
    int round = 0;
    std::optional<std::filesystem::path> data;
    std::optional<std::filesystem::path> test;
    std::optional<std::filesystem::path> model;
    std::optional<std::filesystem::path> mined;
    std::optional<std::vector<AlphaSpec>> alphas;
};

void cmd_gen_data(const RunConfig& cfg, const StageOptions& opt);
void cmd_train(const RunConfig& cfg, const StageOptions& opt);
void cmd_mine(const RunConfig& cfg, const StageOptions& opt);
void cmd_retrain(const RunConfig& cfg, const StageOptions& opt);
/// Writes out/eval/eval.json and returns its contents ({name, size, mse, mae}).
nlohmann::json cmd_eval(const StageOptions& opt);
void cmd_loop(const RunConfig& cfg, const StageOptions& opt);

/// Full command-line entry point. Exit codes: 0 success, 1 validation
/// (bad flags, config, or input artifacts), 2 runtime failure.
int run_cli(int argc, char** argv);

}  // namespace errmax::cli
