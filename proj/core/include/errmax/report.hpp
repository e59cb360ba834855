#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace errmax {

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Everything measured for one trained model: one round of the loop or one
/// alpha of a sweep.
struct RoundReport {
    int round = 0;
    double alpha = 1.0;
    std::string alpha_mode = "fixed";  // "fixed" or "pooled"
    std::size_t n_base = 0;            // |S_k|
    std::size_t n_mined = 0;           // |M_k| used in training
    Metrics train;                     // over the full training set
    Metrics test;
    std::optional<Metrics> maximizer;
    std::optional<Metrics> trimmed_maximizer;
    std::size_t n_maximizer_eval = 0;
    double trim_fraction = 0.0;
    int epochs = 0;
    bool shortfall = false;

    friend bool operator==(const RoundReport&, const RoundReport&) = default;
};

void to_json(nlohmann::json& j, const Metrics& m);
void from_json(const nlohmann::json& j, Metrics& m);
void to_json(nlohmann::json& j, const RoundReport& r);
void from_json(const nlohmann::json& j, RoundReport& r);

/// Markdown table with one column per report, sorted by alpha descending, and
/// rows Training MSE, Test MSE, Maximizer MSE, Training MAE, Test MAE,
/// Maximizer MAE. Values use 4 significant digits.
std::string render_table(const std::vector<RoundReport>& reports);

}  // namespace errmax
