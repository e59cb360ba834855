#include "errmax/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "errmax/checkpoint.hpp"
#include "errmax/cli/manifest.hpp"
#include "errmax/config_io.hpp"
#include "errmax/error.hpp"
#include "errmax/parallel.hpp"

namespace errmax::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

void write_json_file(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path or_default(const std::optional<fs::path>& given, const fs::path& fallback) {
    return given ? *given : fallback;
}

Manifest start_stage(const std::string& stage, const RunConfig* cfg) {
    Manifest m;
    m.stage = stage;
    m.config_hash = cfg ? hash_config(to_json(*cfg)) : std::string("none");
    return m;
}

void add_input(Manifest& m, const std::string& role, const fs::path& path) {
    m.inputs[role] = {path.string(), validate_input(path)};
}

// An input artifact that exists but does not load is a corrupt artifact,
// reported as a validation failure rather than a runtime one.
template <typename Load>
auto load_input(const fs::path& path, Load load) {
    try {
        return load(path);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Io && e.kind() != ErrorKind::Parse) throw;
        fail(ErrorKind::ManifestValidation, "corrupt input " + path.string() + ": " + e.what());
    }
}

LabeledSet read_set(const fs::path& path) {
    return load_input(path, [](const fs::path& p) { return load_csv(p); });
}

Checkpoint read_model(const fs::path& path) {
    return load_input(path, [](const fs::path& p) { return load_checkpoint(p); });
}

nlohmann::json history_json(const TrainResult& tr) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : tr.history) epochs.push_back({{"epoch", e.epoch}, {"lr", e.lr}, {"loss", e.loss}});
    return {{"initial_loss", tr.initial_loss},
            {"final_loss", tr.final_loss()},
            {"stop_reason", tr.stop_reason == StopReason::Converged ? "converged" : "max-epochs"},
            {"epochs", epochs}};
}

nlohmann::json checkpoint_meta(const std::string& stage, const RunConfig& cfg, double alpha, int round) {
    return {{"stage", stage},
            {"config_hash", hash_config(to_json(cfg))},
            {"round", round},
            {"alpha", alpha},
            {"init_seed", cfg.loop.init_seed},
            {"train_seed", cfg.loop.train_seed},
            {"train", to_json(cfg.loop.train)}};
}

void require_same_domain(const LabeledSet& set, const OracleSpec& oracle) {
    require(set.normalizer == oracle.normalizer(), ErrorKind::ManifestValidation,
            "set '" + set.name + "' was not generated for the configured oracle domain");
}

void log_line(const std::string& stage, const std::string& msg) { std::cerr << "[" << stage << "] " << msg << '\n'; }

std::string alpha_dir_name(const AlphaSpec& a) { return "alpha_" + a.str(); }

std::vector<AlphaSpec> parse_alpha_list(const std::string& text) {
    std::vector<AlphaSpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(AlphaSpec::parse(item));
    require(!out.empty(), ErrorKind::InvalidSpec, "--alphas needs at least one value");
    return out;
}

bool is_validation(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidSpec:
        case ErrorKind::Parse:
        case ErrorKind::ManifestValidation:
        case ErrorKind::IncompatibleSets:
        case ErrorKind::Shape:
            return true;
        default:
            return false;
    }
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg, const StageOptions& opt) {
    const fs::path dir = opt.out / "data";
    Manifest m = start_stage("gen-data", &cfg);
    m.outputs = {{"S0.csv", ""}, {"test.csv", ""}};
    write_manifest(dir, m);

    const OracleSpec oracle = build_oracle(cfg);
    const LoopConfig& lc = cfg.loop;
    save_csv(label(sample_uniform(oracle, lc.train_size, lc.data_seed, "S0"), oracle, opt.threads), dir / "S0.csv");
    save_csv(label(sample_uniform(oracle, lc.test_size, lc.test_seed, "test"), oracle, opt.threads),
             dir / "test.csv");
    finalize_manifest(dir, m);
    log_line("gen-data", "wrote " + std::to_string(lc.train_size) + " + " + std::to_string(lc.test_size) +
                             " samples to " + dir.string());
}

void cmd_train(const RunConfig& cfg, const StageOptions& opt) {
    const fs::path dir = opt.out / "train";
    const fs::path data_path = or_default(opt.data, opt.out / "data" / "S0.csv");
    const fs::path test_path = or_default(opt.test, opt.out / "data" / "test.csv");
    Manifest m = start_stage("train", &cfg);
    add_input(m, "data", data_path);
    add_input(m, "test", test_path);
    const LabeledSet data = read_set(data_path);
    const LabeledSet test = read_set(test_path);
    const OracleSpec oracle = build_oracle(cfg);
    require_same_domain(data, oracle);
    require_same_domain(test, oracle);
    require(data.is_labeled() && test.is_labeled(), ErrorKind::ManifestValidation, "train inputs must be labelled");

    m.outputs = {{"model.ckpt", ""}, {"history.json", ""}, {"report.json", ""}};
    write_manifest(dir, m);

    MlpModel model = init_mlp(cfg.loop.layer_dims(oracle.dim()), cfg.loop.init_seed);
    const TrainResult tr = train(model, data.view(), cfg.loop.train, derive_seed(cfg.loop.train_seed, 0));
    const RoundReport report = assemble_report(model, 0, 1.0, AlphaSpec::fixed(1.0), data, empty_set(oracle, "none"),
                                               test, nullptr, cfg.loop.round.trim_fraction, tr.epochs_run());
    save_checkpoint(dir / "model.ckpt", {model, checkpoint_meta("train", cfg, 1.0, 0)});
    write_json_file(dir / "history.json", history_json(tr));
    write_json_file(dir / "report.json", report);
    finalize_manifest(dir, m);
    log_line("train", std::to_string(tr.epochs_run()) + " epochs, test mse " + std::to_string(report.test.mse));
}

void cmd_mine(const RunConfig& cfg, const StageOptions& opt) {
    const fs::path dir = opt.out / "mine";
    const fs::path model_path = or_default(opt.model, opt.out / "train" / "model.ckpt");
    const fs::path data_path = or_default(opt.data, opt.out / "data" / "S0.csv");
    require(opt.round >= 0, ErrorKind::InvalidSpec, "--round must be >= 0");
    Manifest m = start_stage("mine", &cfg);
    add_input(m, "model", model_path);
    add_input(m, "data", data_path);
    const Checkpoint ck = read_model(model_path);
    const LabeledSet data = read_set(data_path);
    const OracleSpec oracle = build_oracle(cfg);
    require_same_domain(data, oracle);
    require(ck.model.input_dim() == static_cast<int>(oracle.dim()), ErrorKind::ManifestValidation,
            "checkpoint input width does not match the oracle");
    require(data.is_labeled(), ErrorKind::ManifestValidation, "mining needs a labelled seed set");

    const std::string mined_name = "M" + std::to_string(opt.round) + ".csv";
    const bool baseline = cfg.loop.round.uniform_baseline;
    m.outputs = {{mined_name, ""}, {"summary.json", ""}};
    if (!baseline) m.outputs["ascents.jsonl"] = "";
    write_manifest(dir, m);

    const AscentConfig acfg = tightened(cfg.loop.mine, cfg.loop.round, opt.round);
    nlohmann::json summary{{"round", opt.round}, {"mine", to_json(acfg)}, {"uniform_baseline", baseline}};
    if (baseline) {
        const LabeledSet mined =
            uniform_baseline(oracle, acfg.target_count,
                             derive_seed(cfg.loop.data_seed, static_cast<std::uint64_t>(opt.round) + 1), opt.round,
                             opt.threads);
        save_csv(mined, dir / mined_name);
        summary["count"] = mined.size();
    } else {
        const MineOutcome mo = mine(ck.model, oracle, data, acfg, cfg.loop.fd, opt.round, opt.threads);
        save_csv(mo.maximizers, dir / mined_name);
        write_ascent_log(mo.ascents, dir / "ascents.jsonl");
        summary["count"] = mo.maximizers.size();
        summary["ascents"] = mo.ascents.size();
        summary["admitted"] = mo.admitted;
        summary["unique"] = mo.unique;
        summary["shortfall"] = mo.shortfall;
    }
    write_json_file(dir / "summary.json", summary);
    finalize_manifest(dir, m);
    log_line("mine", "kept " + summary["count"].dump() + " maximizers in " + (dir / mined_name).string());
}

void cmd_retrain(const RunConfig& cfg, const StageOptions& opt) {
    const fs::path dir = opt.out / "retrain";
    const fs::path data_path = or_default(opt.data, opt.out / "data" / "S0.csv");
    const fs::path mined_path = or_default(opt.mined, opt.out / "mine" / "M0.csv");
    const fs::path test_path = or_default(opt.test, opt.out / "data" / "test.csv");
    const std::vector<AlphaSpec> alphas = opt.alphas ? *opt.alphas : cfg.alphas;
    Manifest m = start_stage("retrain", &cfg);
    add_input(m, "data", data_path);
    add_input(m, "mined", mined_path);
    add_input(m, "test", test_path);
    const LabeledSet data = read_set(data_path);
    const LabeledSet mined = read_set(mined_path);
    const LabeledSet test = read_set(test_path);
    const OracleSpec oracle = build_oracle(cfg);
    for (const LabeledSet* s : {&data, &mined, &test}) {
        require_same_domain(*s, oracle);
        require(s->is_labeled(), ErrorKind::ManifestValidation, "retrain inputs must be labelled");
    }
    require(!mined.empty(), ErrorKind::ManifestValidation, "mined set " + mined_path.string() + " is empty");

    m.outputs = {{"reports.json", ""}, {"table.md", ""}};
    for (const auto& a : alphas) {
        m.outputs[alpha_dir_name(a) + "/model.ckpt"] = "";
        m.outputs[alpha_dir_name(a) + "/report.json"] = "";
    }
    write_manifest(dir, m);

    const auto entries =
        alpha_sweep(data, mined, test, alphas, cfg.loop.round, cfg.loop.train, cfg.loop.layer_dims(oracle.dim()),
                    cfg.loop.init_seed, derive_seed(cfg.loop.train_seed, 1), opt.threads);
    std::vector<RoundReport> reports;
    for (const auto& e : entries) {
        const fs::path sub = dir / alpha_dir_name(e.alpha);
        fs::create_directories(sub);
        save_checkpoint(sub / "model.ckpt", {e.outcome.model, checkpoint_meta("retrain", cfg, e.outcome.alpha, 1)});
        write_json_file(sub / "report.json", e.report);
        reports.push_back(e.report);
    }
    write_json_file(dir / "reports.json", reports);
    write_text(dir / "table.md", render_table(reports));
    finalize_manifest(dir, m);
    log_line("retrain", "trained " + std::to_string(entries.size()) + " models");
}

nlohmann::json cmd_eval(const StageOptions& opt) {
    const fs::path dir = opt.out / "eval";
    const fs::path model_path = or_default(opt.model, opt.out / "train" / "model.ckpt");
    const fs::path data_path = or_default(opt.data, opt.out / "data" / "test.csv");
    Manifest m = start_stage("eval", nullptr);
    add_input(m, "model", model_path);
    add_input(m, "data", data_path);
    const Checkpoint ck = read_model(model_path);
    const LabeledSet data = read_set(data_path);
    require(ck.model.input_dim() == static_cast<int>(data.dim()), ErrorKind::ManifestValidation,
            "checkpoint input width does not match the data set");
    m.outputs = {{"eval.json", ""}};
    write_manifest(dir, m);

    const Metrics metrics = evaluate(ck.model, data);
    const nlohmann::json result{{"name", data.name}, {"size", data.size()}, {"mse", metrics.mse}, {"mae", metrics.mae}};
    write_json_file(dir / "eval.json", result);
    finalize_manifest(dir, m);
    return result;
}

void cmd_loop(const RunConfig& cfg, const StageOptions& opt) {
    const fs::path dir = opt.out / "loop";
    Manifest m = start_stage("loop", &cfg);
    m.outputs = {{"reports.json", ""}, {"table.md", ""}};
    write_manifest(dir, m);
    const OracleSpec oracle = build_oracle(cfg);
    const LoopResult result = run_loop(cfg.loop, oracle, dir, opt.threads, [](const RoundReport& r) {
        log_line("loop", "round " + std::to_string(r.round) + " test mse " + std::to_string(r.test.mse));
    });
    finalize_manifest(dir, m);
    log_line("loop", "finished: " + std::string(to_string(result.termination)));
}

int run_cli(int argc, char** argv) {
    CLI::App app{"errmax: error-maximizer active learning for MLP surrogates"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed_override;
    StageOptions opt;
    std::string data, test, model, mined, alphas;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "run configuration (JSON)");
        if (needs_config) c->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--threads", threads, "worker threads (0 = hardware parallelism)");
        sub->add_option("--seed-override", seed_override, "derive model init/train seeds from K");
    };
    auto* gen = app.add_subcommand("gen-data", "sample and label S0 and the test set");
    auto* trn = app.add_subcommand("train", "train the round-0 model on S0");
    auto* mne = app.add_subcommand("mine", "mine error maximizers from a trained model");
    auto* ret = app.add_subcommand("retrain", "retrain on S0 + mined set for each alpha");
    auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on a labelled set");
    auto* lop = app.add_subcommand("loop", "run the full multi-round loop");
    for (auto* s : {gen, trn, mne, ret, lop}) common(s, true);
    common(evl, false);
    for (auto* s : {trn, mne, ret, evl}) s->add_option("--data", data, "labelled set CSV");
    for (auto* s : {trn, ret}) s->add_option("--test", test, "test set CSV");
    for (auto* s : {mne, evl}) s->add_option("--model", model, "model checkpoint");
    mne->add_option("--round", opt.round, "mining round (tightens the ascent schedule)");
    ret->add_option("--mined", mined, "mined set CSV");
    ret->add_option("--alphas", alphas, "comma-separated alpha list (numbers or 'pooled')");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::optional<RunConfig> cfg;
        if (!config_path.empty()) {
            cfg = load_run_config(config_path);
            if (seed_override) apply_seed_override(*cfg, *seed_override);
        }
        opt.out = !out_dir.empty() ? fs::path(out_dir) : (cfg ? cfg->output_dir : fs::path("errmax_out"));
        opt.threads = threads == 0 ? default_threads() : threads;
        if (!data.empty()) opt.data = data;
        if (!test.empty()) opt.test = test;
        if (!model.empty()) opt.model = model;
        if (!mined.empty()) opt.mined = mined;
        if (!alphas.empty()) opt.alphas = parse_alpha_list(alphas);

        if (gen->parsed()) cmd_gen_data(*cfg, opt);
        if (trn->parsed()) cmd_train(*cfg, opt);
        if (mne->parsed()) cmd_mine(*cfg, opt);
        if (ret->parsed()) cmd_retrain(*cfg, opt);
        if (evl->parsed()) std::cout << cmd_eval(opt).dump(2) << '\n';
        if (lop->parsed()) cmd_loop(*cfg, opt);
    } catch (const Error& e) {
        std::cerr << "errmax: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return is_validation(e.kind()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "errmax: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace errmax::cli
