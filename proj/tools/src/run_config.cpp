#include "errmax/cli/run_config.hpp"

#include <fstream>

#include "errmax/config_io.hpp"
#include "errmax/error.hpp"
#include "errmax/parallel.hpp"

namespace errmax::cli {

namespace {

std::vector<Interval> domain_from_json(const nlohmann::json& j) {
    require(j.is_array(), ErrorKind::InvalidSpec, "oracle.domain must be a list of [lo, hi] pairs");
    std::vector<Interval> out;
    for (const auto& pair : j) {
        require(pair.is_array() && pair.size() == 2 && pair[0].is_number() && pair[1].is_number(),
                ErrorKind::InvalidSpec, "oracle.domain entries must be [lo, hi] number pairs");
        out.push_back({pair[0].get<double>(), pair[1].get<double>()});
        require(out.back().hi > out.back().lo, ErrorKind::InvalidSpec, "oracle.domain entries need hi > lo");
    }
    return out;
}

void read_params(const nlohmann::json& j, SyntheticParams& p) {
    check_keys(j, {"dim", "amplitude", "constant", "center"}, "oracle.params");
    read_field(j, "dim", p.dim, "oracle.params");
    read_field(j, "amplitude", p.amplitude, "oracle.params");
    read_field(j, "constant", p.constant, "oracle.params");
    if (j.contains("center")) {
        std::vector<double> c;
        read_field(j, "center", c, "oracle.params");
        p.center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
}

AlphaSpec alpha_from_json(const nlohmann::json& a) {
    if (a.is_string()) return AlphaSpec::parse(a.get<std::string>());
    require(a.is_number(), ErrorKind::InvalidSpec, "loop.alphas entries must be numbers or \"pooled\"");
    const double v = a.get<double>();
    require(v >= 0.0 && v <= 1.0, ErrorKind::InvalidSpec, "loop.alphas entries must lie in [0, 1]");
    return AlphaSpec::fixed(v);
}

}  // namespace

void RunConfig::validate() const {
    loop.validate();
    require(!alphas.empty(), ErrorKind::InvalidSpec, "loop.alphas must not be empty");
    for (const auto& a : alphas) {
        require(a.pooled || (a.value >= 0.0 && a.value <= 1.0), ErrorKind::InvalidSpec,
                "loop.alphas entries must lie in [0, 1]");
    }
    (void)build_oracle(*this);
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    check_keys(j, {"oracle", "data", "model", "train", "mine", "loop", "output_dir"}, "config");
    RunConfig cfg;
    LoopConfig& lc = cfg.loop;

    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        check_keys(o, {"kind", "domain", "fd", "params"}, "oracle");
        read_field(o, "kind", cfg.oracle.kind, "oracle");
        if (o.contains("domain")) cfg.oracle.domain = domain_from_json(o.at("domain"));
        if (o.contains("fd")) lc.fd = fd_config_from_json(o.at("fd"), "oracle.fd");
        if (o.contains("params")) read_params(o.at("params"), cfg.oracle.params);
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        check_keys(d, {"train_size", "test_size", "data_seed", "test_seed"}, "data");
        read_field(d, "train_size", lc.train_size, "data");
        read_field(d, "test_size", lc.test_size, "data");
        read_field(d, "data_seed", lc.data_seed, "data");
        read_field(d, "test_seed", lc.test_seed, "data");
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, {"hidden", "init_seed", "train_seed"}, "model");
        read_field(m, "hidden", lc.hidden, "model");
        read_field(m, "init_seed", lc.init_seed, "model");
        read_field(m, "train_seed", lc.train_seed, "model");
    }
    if (j.contains("train")) lc.train = train_config_from_json(j.at("train"), "train");
    if (j.contains("mine")) lc.mine = ascent_config_from_json(j.at("mine"), "mine");
    if (j.contains("loop")) {
        nlohmann::json l = j.at("loop");
        require(l.is_object(), ErrorKind::InvalidSpec, "loop must be an object");
        if (l.contains("alphas")) {
            require(l.at("alphas").is_array(), ErrorKind::InvalidSpec, "loop.alphas must be a list");
            cfg.alphas.clear();
            for (const auto& a : l.at("alphas")) cfg.alphas.push_back(alpha_from_json(a));
            l.erase("alphas");
        }
        lc.round = round_config_from_json(l, "loop");
    }
    if (j.contains("output_dir")) {
        std::string dir;
        read_field(j, "output_dir", dir, "config");
        cfg.output_dir = dir;
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidSpec, "cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::InvalidSpec, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

nlohmann::json to_json(const RunConfig& cfg) {
    const LoopConfig& lc = cfg.loop;
    nlohmann::json domain = nlohmann::json::array();
    for (const auto& iv : build_oracle(cfg).domain) domain.push_back({iv.lo, iv.hi});
    nlohmann::json params{{"dim", cfg.oracle.params.dim},
                          {"amplitude", cfg.oracle.params.amplitude},
                          {"constant", cfg.oracle.params.constant}};
    if (cfg.oracle.params.center) {
        const auto& c = *cfg.oracle.params.center;
        params["center"] = std::vector<double>(c.data(), c.data() + c.size());
    }
    nlohmann::json loop = to_json(lc.round);
    loop["alphas"] = nlohmann::json::array();
    for (const auto& a : cfg.alphas) loop["alphas"].push_back(a.str());
    return {
        {"oracle", {{"kind", cfg.oracle.kind}, {"domain", domain}, {"fd", to_json(lc.fd)}, {"params", params}}},
        {"data",
         {{"train_size", lc.train_size},
          {"test_size", lc.test_size},
          {"data_seed", lc.data_seed},
          {"test_seed", lc.test_seed}}},
        {"model", {{"hidden", lc.hidden}, {"init_seed", lc.init_seed}, {"train_seed", lc.train_seed}}},
        {"train", to_json(lc.train)},
        {"mine", to_json(lc.mine)},
        {"loop", loop},
    };
}

OracleSpec build_oracle(const RunConfig& cfg) {
    if (cfg.oracle.kind == "barrier") {
        return cfg.oracle.domain.empty() ? make_barrier_oracle() : make_barrier_oracle(cfg.oracle.domain);
    }
    SyntheticParams p = cfg.oracle.params;
    p.domain = cfg.oracle.domain;
    return make_synthetic_oracle(cfg.oracle.kind, p);
}

void apply_seed_override(RunConfig& cfg, std::uint64_t k) {
    cfg.loop.init_seed = derive_seed(k, 0);
    cfg.loop.train_seed = derive_seed(k, 1);
}

}  // namespace errmax::cli
