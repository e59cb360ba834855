#include "errmax/report.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "errmax/error.hpp"

namespace errmax {

namespace {

std::string sig4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

nlohmann::json optional_metrics(const std::optional<Metrics>& m) {
    return m ? nlohmann::json(*m) : nlohmann::json(nullptr);
}

std::optional<Metrics> read_optional(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<Metrics>();
}

}  // namespace

void to_json(nlohmann::json& j, const Metrics& m) { j = {{"mse", m.mse}, {"mae", m.mae}}; }

void from_json(const nlohmann::json& j, Metrics& m) {
    j.at("mse").get_to(m.mse);
    j.at("mae").get_to(m.mae);
}

void to_json(nlohmann::json& j, const RoundReport& r) {
    j = {
        {"round", r.round},
        {"alpha", r.alpha},
        {"alpha_mode", r.alpha_mode},
        {"n_base", r.n_base},
        {"n_mined", r.n_mined},
        {"train", r.train},
        {"test", r.test},
        {"maximizer", optional_metrics(r.maximizer)},
        {"trimmed_maximizer", optional_metrics(r.trimmed_maximizer)},
        {"n_maximizer_eval", r.n_maximizer_eval},
        {"trim_fraction", r.trim_fraction},
        {"epochs", r.epochs},
        {"shortfall", r.shortfall},
    };
}

void from_json(const nlohmann::json& j, RoundReport& r) {
    j.at("round").get_to(r.round);
    j.at("alpha").get_to(r.alpha);
    j.at("alpha_mode").get_to(r.alpha_mode);
    j.at("n_base").get_to(r.n_base);
    j.at("n_mined").get_to(r.n_mined);
    j.at("train").get_to(r.train);
    j.at("test").get_to(r.test);
    r.maximizer = read_optional(j, "maximizer");
    r.trimmed_maximizer = read_optional(j, "trimmed_maximizer");
    j.at("n_maximizer_eval").get_to(r.n_maximizer_eval);
    j.at("trim_fraction").get_to(r.trim_fraction);
    j.at("epochs").get_to(r.epochs);
    j.at("shortfall").get_to(r.shortfall);
}

std::string render_table(const std::vector<RoundReport>& reports) {
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return reports[a].alpha > reports[b].alpha; });

    std::string out = "| α |";
    std::string rule = "|---|";
    for (std::size_t i : order) {
        out += " " + sig4(reports[i].alpha) + " |";
        rule += "---|";
    }
    out += "\n" + rule + "\n";

    auto row = [&](const char* name, auto pick) {
        out += std::string("| ") + name + " |";
        for (std::size_t i : order) {
            const std::optional<double> v = pick(reports[i]);
            out += " " + (v ? sig4(*v) : std::string("n/a")) + " |";
        }
        out += "\n";
    };
    using R = RoundReport;
    auto opt = [](const std::optional<Metrics>& m, double Metrics::*field) -> std::optional<double> {
        return m ? std::optional<double>((*m).*field) : std::nullopt;
    };
    row("Training MSE", [](const R& r) { return std::optional<double>(r.train.mse); });
    row("Test MSE", [](const R& r) { return std::optional<double>(r.test.mse); });
    row("Maximizer MSE", [&](const R& r) { return opt(r.maximizer, &Metrics::mse); });
    row("Training MAE", [](const R& r) { return std::optional<double>(r.train.mae); });
    row("Test MAE", [](const R& r) { return std::optional<double>(r.test.mae); });
    row("Maximizer MAE", [&](const R& r) { return opt(r.maximizer, &Metrics::mae); });
    return out;
}

}  // namespace errmax
