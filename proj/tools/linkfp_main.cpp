// linkfp: simulated link-contention fingerprinting workbench.
//
// Subcommands: simulate, train, eval, closed-world, open-world, sweep,
// project, version. Exit codes: 0 success, 2 usage, 3 validation, 4 runtime.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "linkfp/dataset.hpp"
#include "linkfp/errors.hpp"
#include "linkfp/harness.hpp"
#include "linkfp/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace linkfp;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

std::string default_profiles_path() {
    const char* local = "assets/victims8.profiles";
    if (fs::exists(local)) return local;
    return std::string(LINKFP_ASSET_DIR) + "/victims8.profiles";
}

// Optional flag overrides; applied on top of config-file values.
struct Overrides {
    std::optional<double> link_capacity, link_overhead, link_sigma;
    std::optional<int> access_num, repeat_num, buffer_size, buffer_num;
    std::optional<std::string> profiles, models, target, axis, values;
    std::optional<int> traces_per_class, repetitions, unknown_count, jobs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> projection;
};

void add_common_options(CLI::App* cmd, std::string& config_path, std::string& out_dir,
                        Overrides& ov) {
    cmd->add_option("--config", config_path, "Scenario config file (sectioned key=value)");
    cmd->add_option("--out", out_dir, "Output directory for report files")
        ->default_val("out");
    cmd->add_option("--seed", ov.seed, "Master seed; every stream derives from it");
    cmd->add_option("--jobs", ov.jobs, "Max parallel experiment cells (default: cores)");
    cmd->add_option("--profiles", ov.profiles, "Victim profile file (overrides config)");
    cmd->add_option("--link-capacity", ov.link_capacity, "Link capacity, bytes/us (default 8)");
    cmd->add_option("--link-launch-overhead", ov.link_overhead,
                    "Kernel launch overhead, us (default 50)");
    cmd->add_option("--link-noise-sigma-rel", ov.link_sigma,
                    "Relative measurement noise (default 0.08)");
    cmd->add_option("--access-num", ov.access_num,
                    "Kernel loop iterations per invocation (default 1000)");
    cmd->add_option("--repeat-num", ov.repeat_num,
                    "Invocations averaged per trace point (default 10)");
    cmd->add_option("--buffer-size", ov.buffer_size,
                    "Bytes touched per access (default 4)");
    cmd->add_option("--buffer-num", ov.buffer_num,
                    "Points per trace (default 100)");
    cmd->add_option("--traces-per-class", ov.traces_per_class,
                    "Traces collected per victim (default 50)");
    cmd->add_option("--models", ov.models,
                    "Comma list of forest,svm,mlp,conv1d (default: all)");
    cmd->add_option("--repetitions", ov.repetitions,
                    "Averaging repetitions for open-world/sweep (default 5)");
}

ExperimentConfig build_config(const std::string& config_path, const Overrides& ov,
                              Scenario scenario) {
    ExperimentConfig cfg;
    cfg.profiles_path = default_profiles_path();
    cfg.scenario = scenario;
    if (!config_path.empty()) {
        if (!fs::exists(config_path))
            throw CLI::ValidationError("--config", "no such file: " + config_path);
        cfg = apply_config_file(cfg, KvFile::parse_file(config_path));
        cfg.scenario = scenario;
    }
    if (ov.link_capacity) cfg.link.capacity_bytes_per_us = *ov.link_capacity;
    if (ov.link_overhead) cfg.link.launch_overhead_us = *ov.link_overhead;
    if (ov.link_sigma) cfg.link.noise_sigma_rel = *ov.link_sigma;
    if (ov.access_num) cfg.probe.access_num = *ov.access_num;
    if (ov.repeat_num) cfg.probe.repeat_num = *ov.repeat_num;
    if (ov.buffer_size) cfg.probe.buffer_size_bytes = *ov.buffer_size;
    if (ov.buffer_num) cfg.probe.buffer_num = *ov.buffer_num;
    if (ov.profiles) cfg.profiles_path = *ov.profiles;
    if (ov.traces_per_class) cfg.traces_per_class = *ov.traces_per_class;
    if (ov.repetitions) cfg.repetitions = *ov.repetitions;
    if (ov.unknown_count) cfg.open_unknown = *ov.unknown_count;
    if (ov.target) cfg.open_target = *ov.target;
    if (ov.jobs) cfg.jobs = *ov.jobs;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.axis) cfg.sweep_axis = sweep_axis_from_name(*ov.axis);
    if (ov.values) {
        cfg.sweep_values.clear();
        for (const std::string& v : split_csv_list(*ov.values))
            cfg.sweep_values.push_back(std::stol(v));
    }
    if (ov.models) {
        cfg.models.clear();
        for (const std::string& name : split_csv_list(*ov.models))
            cfg.models.push_back(model_kind_from_name(name));
    }
    if (ov.projection) {
        if (*ov.projection == "none") {
            cfg.with_projection = false;
        } else {
            cfg.with_projection = true;
            cfg.projection_method =
                *ov.projection == "pca" ? ProjectionMethod::Pca : ProjectionMethod::Tsne;
        }
    }
    return cfg;
}

int cmd_simulate(const std::string& config_path, const Overrides& ov,
                 const std::string& victim_code, int n_traces, const std::string& out_file,
                 const std::string& event_log_path) {
    ExperimentConfig cfg = build_config(config_path, ov, Scenario::Closed);
    cfg.link.validate();
    cfg.probe.validate();

    const VictimProfile* victim = nullptr;
    ProfileSet profiles;
    if (victim_code != "none") {
        profiles = load_profiles(cfg.profiles_path);
        victim = profiles.find_code(victim_code);
        if (!victim) throw ValidationError("simulate: unknown victim code '" + victim_code + "'");
    }

    LabeledDataset dataset;
    dataset.n_features = static_cast<std::size_t>(cfg.probe.buffer_num);
    for (int t = 0; t < n_traces; ++t) {
        const Trace trace =
            collect_trace(cfg.link, victim, cfg.probe,
                          Rng::derive(cfg.seed, {static_cast<std::uint64_t>(t)}));
        dataset.add_row(trace.points, trace.label);
    }
    save_csv(dataset, out_file);
    std::cout << "wrote " << n_traces << " trace(s) to " << out_file << "\n";

    if (!event_log_path.empty()) {
        // Re-run the first trace with logging on; same seed, same events.
        Timeline timeline(cfg.link);
        timeline.enable_event_log();
        Rng noise(Rng::derive(Rng::derive(cfg.seed, {0}), {0}));
        if (victim) {
            Rng phase(Rng::derive(Rng::derive(cfg.seed, {0}), {2}));
            const double offset =
                phase.uniform(0.0, victim->period_us(cfg.link.capacity_bytes_per_us));
            timeline.add_source(std::make_unique<VictimWalker>(
                *victim, cfg.link.capacity_bytes_per_us, -offset,
                Rng(Rng::derive(Rng::derive(cfg.seed, {0}), {1}))));
        }
        for (int i = 0; i < cfg.probe.buffer_num * cfg.probe.repeat_num; ++i)
            invoke_kernel(timeline, cfg.probe, noise);
        std::ofstream log(event_log_path, std::ios::binary);
        if (!log) throw IoError("cannot write " + event_log_path);
        write_event_log(log, timeline.event_log());
        std::cout << "wrote event log to " << event_log_path << "\n";
    }
    return kExitOk;
}

int cmd_train(const std::string& data_path, const std::string& model_name,
              std::uint64_t seed, const std::string& out_file) {
    const LabeledDataset raw = load_csv(data_path);
    const LabeledDataset train = normalize_minmax(raw);
    const TrainedModel model =
        train_model_kind(model_kind_from_name(model_name), train, seed);
    save_model(model, out_file);
    std::cout << "trained " << model_name << " on " << raw.n_rows() << " rows, saved to "
              << out_file << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_dir) {
    const TrainedModel model = load_model(model_path);
    const LabeledDataset test = load_csv(data_path);
    const EvalMetrics m = compute_metrics(test.labels, model.predict_batch(test));

    nlohmann::json j;
    j["accuracy"] = m.accuracy;
    j["macro_precision"] = m.macro_precision;
    j["macro_recall"] = m.macro_recall;
    j["macro_f1"] = m.macro_f1;
    std::cout << j.dump(2) << "\n";

    if (!out_dir.empty()) {
        Report report;
        report.experiment_id = "eval";
        report.config_echo = {{"model_file", model_path}, {"data", data_path}};
        report.model_order.push_back(model_kind_name(model.kind()));
        report.per_model[model_kind_name(model.kind())] = m;
        emit_report(report, out_dir);
    }
    return kExitOk;
}

int cmd_project(const std::string& data_path, const std::string& method,
                std::uint64_t seed, const std::string& out_dir) {
    const LabeledDataset raw = load_csv(data_path);
    const LabeledDataset data = normalize_minmax(raw);
    const ProjectionMethod pm =
        method == "pca" ? ProjectionMethod::Pca : ProjectionMethod::Tsne;
    TsneParams params;
    Report report;
    report.experiment_id = "project-" + method;
    report.config_echo = {{"data", data_path}, {"method", method}, {"seed", seed}};
    report.projection = project_2d(data, pm, params, seed);
    report.projection_labels = data.labels;
    emit_report(report, out_dir);
    std::cout << "wrote projection of " << raw.n_rows() << " rows to " << out_dir << "\n";
    return kExitOk;
}

int cmd_version() {
    std::cout << "linkfp " << kToolVersion << "\n";
    const std::string path = default_profiles_path();
    if (fs::exists(path)) {
        try {
            const ProfileSet set = load_profiles(path);
            std::cout << "assets: " << (set.name.empty() ? "profiles" : set.name) << " v"
                      << (set.version.empty() ? "?" : set.version) << " ("
                      << set.profiles.size() << " profiles)\n";
        } catch (const std::exception& e) {
            std::cout << "assets: unreadable (" << e.what() << ")\n";
        }
    } else {
        std::cout << "assets: not found\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated link-contention fingerprinting workbench"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    Overrides ov;

    auto* closed = app.add_subcommand("closed-world", "n-way fingerprinting experiment");
    add_common_options(closed, config_path, out_dir, ov);
    std::string projection_flag;
    closed->add_option("--projection", projection_flag,
                       "Add a 2-D projection to the report: pca, tsne or none");

    auto* open = app.add_subcommand("open-world", "target-vs-other with unknown accelerators");
    add_common_options(open, config_path, out_dir, ov);
    open->add_option("--target", ov.target, "Target code, or 'all' (default all)");
    open->add_option("--unknown-count", ov.unknown_count,
                     "Classes removed from training (default 4)");

    auto* sweep = app.add_subcommand("sweep", "probe parameter sweep");
    add_common_options(sweep, config_path, out_dir, ov);
    sweep->add_option("--param", ov.axis,
                      "Axis: access-num, repeat-num, buffer-size or buffer-num")
        ->required();
    sweep->add_option("--values", ov.values, "Comma list of axis values (default per axis)");

    auto* simulate = app.add_subcommand("simulate", "collect raw traces from the simulator");
    add_common_options(simulate, config_path, out_dir, ov);
    std::string victim_code = "none", trace_file = "trace.csv", event_log_path;
    int n_traces = 1;
    simulate->add_option("--victim", victim_code, "Victim code, or 'none' for baseline");
    simulate->add_option("--traces", n_traces, "Number of traces to collect")->default_val(1);
    simulate->add_option("--out-file", trace_file, "Trace CSV path")->default_val("trace.csv");
    simulate->add_option("--event-log", event_log_path,
                         "Also dump the simulator event log (tab-separated)");

    auto* train = app.add_subcommand("train", "train a classifier on a trace CSV");
    std::string data_path, model_name = "forest", model_file = "model.txt";
    std::uint64_t train_seed = 42;
    train->add_option("--data", data_path, "Labeled trace CSV")->required();
    train->add_option("--model", model_name, "forest, svm, mlp or conv1d")
        ->default_val("forest");
    train->add_option("--seed", train_seed, "Training seed")->default_val(42);
    train->add_option("--out-file", model_file, "Model file path")->default_val("model.txt");

    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a trace CSV");
    std::string eval_model, eval_data, eval_out;
    eval->add_option("--model-file", eval_model, "Saved model file")->required();
    eval->add_option("--data", eval_data, "Labeled trace CSV")->required();
    eval->add_option("--out", eval_out, "Optional report directory");

    auto* project = app.add_subcommand("project", "2-D projection of a trace CSV");
    std::string proj_data, proj_method = "tsne";
    std::uint64_t proj_seed = 42;
    project->add_option("--data", proj_data, "Labeled trace CSV")->required();
    project->add_option("--method", proj_method, "pca or tsne")->default_val("tsne");
    project->add_option("--seed", proj_seed, "Projection seed")->default_val(42);
    project->add_option("--out", out_dir, "Output directory")->default_val("out");

    app.add_subcommand("version", "print tool and asset versions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("version")) return cmd_version();
        if (app.got_subcommand(closed)) {
            if (!projection_flag.empty()) ov.projection = projection_flag;
            const ExperimentConfig cfg = build_config(config_path, ov, Scenario::Closed);
            emit_report(run_closed_world(cfg), out_dir);
            std::cout << "closed-world report written to " << out_dir << "\n";
            return kExitOk;
        }
        if (app.got_subcommand(open)) {
            const ExperimentConfig cfg = build_config(config_path, ov, Scenario::Open);
            emit_report(run_open_world(cfg), out_dir);
            std::cout << "open-world report written to " << out_dir << "\n";
            return kExitOk;
        }
        if (app.got_subcommand(sweep)) {
            const ExperimentConfig cfg = build_config(config_path, ov, Scenario::Sweep);
            emit_report(run_sweep(cfg), out_dir);
            std::cout << "sweep report written to " << out_dir << "\n";
            return kExitOk;
        }
        if (app.got_subcommand(simulate))
            return cmd_simulate(config_path, ov, victim_code, n_traces, trace_file,
                                event_log_path);
        if (app.got_subcommand(train))
            return cmd_train(data_path, model_name, train_seed, model_file);
        if (app.got_subcommand(eval)) return cmd_eval(eval_model, eval_data, eval_out);
        if (app.got_subcommand(project))
            return cmd_project(proj_data, proj_method, proj_seed, out_dir);
        throw InternalError("no subcommand dispatched");
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
