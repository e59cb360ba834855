#include "errmax/config_io.hpp"

#include <algorithm>

namespace errmax {

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, std::string_view path) {
    require(j.is_object(), ErrorKind::InvalidSpec, std::string(path) + " must be an object");
    for (const auto& item : j.items()) {
        const bool known = std::find(allowed.begin(), allowed.end(), std::string_view(item.key())) != allowed.end();
        require(known, ErrorKind::InvalidSpec, "unknown key " + std::string(path) + "." + item.key());
    }
}

nlohmann::json to_json(const TrainConfig& c) {
    return {
        {"initial_lr", c.initial_lr},
        {"lr_decay_factor", c.lr_decay_factor},
        {"lr_decay_period_epochs", c.lr_decay_period_epochs},
        {"batch_size", c.batch_size},
        {"stop_tol", c.stop_tol},
        {"stop_window_epochs", c.stop_window_epochs},
        {"max_epochs", c.max_epochs},
        {"momentum", c.momentum},
    };
}

nlohmann::json to_json(const AscentConfig& c) {
    return {
        {"initial_step", c.initial_step},
        {"step_decay_factor", c.step_decay_factor},
        {"step_decay_period", c.step_decay_period},
        {"stop_rel_change", c.stop_rel_change},
        {"max_iters", c.max_iters},
        {"dedup_radius", c.dedup_radius},
        {"seed_fraction", c.seed_fraction},
        {"target_count", c.target_count},
        {"max_halvings", c.max_halvings},
        {"min_sq_error", c.min_sq_error},
    };
}

nlohmann::json to_json(const FdConfig& c) {
    return {{"h", c.h}, {"scheme", c.scheme == FdScheme::Forward ? "forward" : "central"}};
}

nlohmann::json to_json(const RoundConfig& c) {
    return {
        {"alpha", c.alpha.str()},
        {"retrain_mode", std::string(to_string(c.retrain_mode))},
        {"step_tightening", c.step_tightening},
        {"tol_tightening", c.tol_tightening},
        {"max_rounds", c.max_rounds},
        {"level_off", c.level_off},
        {"trim_fraction", c.trim_fraction},
        {"uniform_baseline", c.uniform_baseline},
    };
}

TrainConfig train_config_from_json(const nlohmann::json& j, std::string_view path) {
    check_keys(j,
               {"initial_lr", "lr_decay_factor", "lr_decay_period_epochs", "batch_size", "stop_tol",
                "stop_window_epochs", "max_epochs", "momentum"},
               path);
    TrainConfig c;
    read_field(j, "initial_lr", c.initial_lr, path);
    read_field(j, "lr_decay_factor", c.lr_decay_factor, path);
    read_field(j, "lr_decay_period_epochs", c.lr_decay_period_epochs, path);
    read_field(j, "batch_size", c.batch_size, path);
    read_field(j, "stop_tol", c.stop_tol, path);
    read_field(j, "stop_window_epochs", c.stop_window_epochs, path);
    read_field(j, "max_epochs", c.max_epochs, path);
    read_field(j, "momentum", c.momentum, path);
    c.validate();
    return c;
}

AscentConfig ascent_config_from_json(const nlohmann::json& j, std::string_view path) {
    check_keys(j,
               {"initial_step", "step_decay_factor", "step_decay_period", "stop_rel_change", "max_iters",
                "dedup_radius", "seed_fraction", "target_count", "max_halvings", "min_sq_error"},
               path);
    AscentConfig c;
    read_field(j, "initial_step", c.initial_step, path);
    read_field(j, "step_decay_factor", c.step_decay_factor, path);
    read_field(j, "step_decay_period", c.step_decay_period, path);
    read_field(j, "stop_rel_change", c.stop_rel_change, path);
    read_field(j, "max_iters", c.max_iters, path);
    read_field(j, "dedup_radius", c.dedup_radius, path);
    read_field(j, "seed_fraction", c.seed_fraction, path);
    read_field(j, "target_count", c.target_count, path);
    read_field(j, "max_halvings", c.max_halvings, path);
    read_field(j, "min_sq_error", c.min_sq_error, path);
    c.validate();
    return c;
}

FdConfig fd_config_from_json(const nlohmann::json& j, std::string_view path) {
    check_keys(j, {"h", "scheme"}, path);
    FdConfig c;
    read_field(j, "h", c.h, path);
    std::string scheme = "forward";
    read_field(j, "scheme", scheme, path);
    if (scheme == "forward") {
        c.scheme = FdScheme::Forward;
    } else if (scheme == "central") {
        c.scheme = FdScheme::Central;
    } else {
        fail(ErrorKind::InvalidSpec, std::string(path) + ".scheme must be 'forward' or 'central'");
    }
    c.validate();
    return c;
}

RoundConfig round_config_from_json(const nlohmann::json& j, std::string_view path) {
    check_keys(j,
               {"alpha", "retrain_mode", "step_tightening", "tol_tightening", "max_rounds", "level_off",
                "trim_fraction", "uniform_baseline"},
               path);
    RoundConfig c;
    if (j.contains("alpha")) {
        const auto& a = j.at("alpha");
        if (a.is_string()) {
            c.alpha = AlphaSpec::parse(a.get<std::string>());
        } else if (a.is_number()) {
            c.alpha = AlphaSpec::fixed(a.get<double>());
        } else {
            fail(ErrorKind::InvalidSpec, std::string(path) + ".alpha must be a number or \"pooled\"");
        }
    }
    std::string mode(to_string(c.retrain_mode));
    read_field(j, "retrain_mode", mode, path);
    c.retrain_mode = parse_retrain_mode(mode);
    read_field(j, "step_tightening", c.step_tightening, path);
    read_field(j, "tol_tightening", c.tol_tightening, path);
    read_field(j, "max_rounds", c.max_rounds, path);
    read_field(j, "level_off", c.level_off, path);
    read_field(j, "trim_fraction", c.trim_fraction, path);
    read_field(j, "uniform_baseline", c.uniform_baseline, path);
    c.validate();
    return c;
}

}  // namespace errmax
