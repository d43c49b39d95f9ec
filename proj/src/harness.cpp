#include "linkfp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "linkfp/errors.hpp"
#include "linkfp/forest.hpp"
#include "linkfp/parallel.hpp"
#include "linkfp/version.hpp"

namespace linkfp {

namespace {

// Seed stream tags.
enum : std::uint64_t {
    kCorpusTag = 1,
    kSplitTag = 2,
    kTrainTag = 3,
    kCvTag = 4,
    kOpenWorldTag = 5,
    kSweepTag = 6,
    kProjectionTag = 7,
};

int effective_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

double mean_of(const std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

nlohmann::json link_echo(const LinkConfig& link) {
    return {{"capacity_bytes_per_us", link.capacity_bytes_per_us},
            {"launch_overhead_us", link.launch_overhead_us},
            {"noise_sigma_rel", link.noise_sigma_rel}};
}

nlohmann::json probe_echo(const ProbeConfig& probe) {
    return {{"access_num", probe.access_num},
            {"repeat_num", probe.repeat_num},
            {"buffer_size", probe.buffer_size_bytes},
            {"buffer_num", probe.buffer_num}};
}

// Normalize with statistics fitted on the training partition only.
std::pair<LabeledDataset, LabeledDataset> normalize_pair(const SplitPair& pair) {
    LabeledDataset train = normalize_minmax(pair.train);
    LabeledDataset test = apply_minmax(pair.test, *train.norm_meta);
    return {std::move(train), std::move(test)};
}

EvalMetrics evaluate_model(const TrainedModel& model, const LabeledDataset& test) {
    return compute_metrics(test.labels, model.predict_batch(test));
}

ProbeConfig probe_with_axis(ProbeConfig probe, SweepAxis axis, long value) {
    switch (axis) {
        case SweepAxis::AccessNum: probe.access_num = static_cast<int>(value); break;
        case SweepAxis::RepeatNum: probe.repeat_num = static_cast<int>(value); break;
        case SweepAxis::BufferSize: probe.buffer_size_bytes = static_cast<int>(value); break;
        case SweepAxis::BufferNum: probe.buffer_num = static_cast<int>(value); break;
    }
    return probe;
}

}  // namespace

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::AccessNum: return "access_num";
        case SweepAxis::RepeatNum: return "repeat_num";
        case SweepAxis::BufferSize: return "buffer_size";
        case SweepAxis::BufferNum: return "buffer_num";
    }
    throw InternalError("sweep_axis_name: bad enum");
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "access_num") return SweepAxis::AccessNum;
    if (key == "repeat_num") return SweepAxis::RepeatNum;
    if (key == "buffer_size") return SweepAxis::BufferSize;
    if (key == "buffer_num") return SweepAxis::BufferNum;
    throw ValidationError("unknown sweep axis '" + name + "'");
}

std::vector<long> default_sweep_values(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::AccessNum: return {250, 500, 1000, 2000, 4000};
        case SweepAxis::RepeatNum: return {1, 5, 10, 20, 50};
        case SweepAxis::BufferSize: return {1, 2, 4, 8, 16};
        case SweepAxis::BufferNum: return {50, 100, 200, 400, 800};
    }
    throw InternalError("default_sweep_values: bad enum");
}

void ExperimentConfig::validate() const {
    link.validate();
    probe.validate();
    if (profiles_path.empty()) throw ValidationError("experiment: profiles path not set");
    if (traces_per_class < 1) throw ValidationError("experiment: traces-per-class must be >= 1");
    if (models.empty()) throw ValidationError("experiment: model list is empty");
    if (repetitions < 1) throw ValidationError("experiment: repetitions must be >= 1");
    if (open_unknown < 0) throw ValidationError("open-world: unknown-count must be >= 0");
    if (scenario == Scenario::Sweep) {
        const std::vector<long> values =
            sweep_values.empty() ? default_sweep_values(sweep_axis) : sweep_values;
        if (values.empty()) throw ValidationError("sweep: empty value list");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] <= 0) throw ValidationError("sweep: values must be positive");
            if (i > 0 && values[i] <= values[i - 1])
                throw ValidationError("sweep: values must be strictly increasing");
        }
    }
}

nlohmann::json ExperimentConfig::echo() const {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["link"] = link_echo(link);
    j["probe"] = probe_echo(probe);
    j["profiles"] = profiles_path;
    j["traces_per_class"] = traces_per_class;
    std::vector<std::string> model_names;
    for (ModelKind kind : models) model_names.push_back(model_kind_name(kind));
    j["models"] = model_names;
    j["seed"] = seed;
    j["repetitions"] = repetitions;
    j["seeds"] = {{"corpus", Rng::derive(seed, {kCorpusTag})},
                  {"split", Rng::derive(seed, {kSplitTag})},
                  {"train_base", Rng::derive(seed, {kTrainTag})}};
    switch (scenario) {
        case Scenario::Closed: j["scenario"] = "closed"; break;
        case Scenario::Open:
            j["scenario"] = "open";
            j["open_world"] = {{"target", open_target}, {"unknown_count", open_unknown}};
            break;
        case Scenario::Sweep: {
            j["scenario"] = "sweep";
            const std::vector<long> values =
                sweep_values.empty() ? default_sweep_values(sweep_axis) : sweep_values;
            const ProbeConfig defaults;
            j["sweep"] = {{"axis", sweep_axis_name(sweep_axis)},
                          {"values", values},
                          {"fixed_params_are_defaults",
                           (sweep_axis == SweepAxis::AccessNum ||
                            probe.access_num == defaults.access_num) &&
                               (sweep_axis == SweepAxis::RepeatNum ||
                                probe.repeat_num == defaults.repeat_num) &&
                               (sweep_axis == SweepAxis::BufferSize ||
                                probe.buffer_size_bytes == defaults.buffer_size_bytes) &&
                               (sweep_axis == SweepAxis::BufferNum ||
                                probe.buffer_num == defaults.buffer_num)}};
            break;
        }
    }
    return j;
}

ExperimentConfig apply_config_file(const ExperimentConfig& base, const KvFile& file) {
    ExperimentConfig cfg = base;
    for (const KvSection& section : file.sections) {
        if (section.name == "link") {
            for (const KvEntry& e : section.entries) {
                if (e.key == "capacity") cfg.link.capacity_bytes_per_us = kv_double(file, e);
                else if (e.key == "launch-overhead") cfg.link.launch_overhead_us = kv_double(file, e);
                else if (e.key == "noise-sigma-rel") cfg.link.noise_sigma_rel = kv_double(file, e);
                else throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                      ": unknown [link] key '" + e.key + "'");
            }
        } else if (section.name == "probe") {
            for (const KvEntry& e : section.entries) {
                if (e.key == "access-num") cfg.probe.access_num = static_cast<int>(kv_int(file, e));
                else if (e.key == "repeat-num") cfg.probe.repeat_num = static_cast<int>(kv_int(file, e));
                else if (e.key == "buffer-size") cfg.probe.buffer_size_bytes = static_cast<int>(kv_int(file, e));
                else if (e.key == "buffer-num") cfg.probe.buffer_num = static_cast<int>(kv_int(file, e));
                else throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                      ": unknown [probe] key '" + e.key + "'");
            }
        } else if (section.name == "experiment") {
            for (const KvEntry& e : section.entries) {
                if (e.key == "profiles") cfg.profiles_path = e.value;
                else if (e.key == "traces-per-class") cfg.traces_per_class = static_cast<int>(kv_int(file, e));
                else if (e.key == "seed") cfg.seed = kv_uint(file, e);
                else if (e.key == "repetitions") cfg.repetitions = static_cast<int>(kv_int(file, e));
                else if (e.key == "jobs") cfg.jobs = static_cast<int>(kv_int(file, e));
                else if (e.key == "models") {
                    cfg.models.clear();
                    for (const std::string& name : split_csv_list(e.value))
                        cfg.models.push_back(model_kind_from_name(name));
                } else {
                    throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                     ": unknown [experiment] key '" + e.key + "'");
                }
            }
        } else if (section.name == "open-world") {
            for (const KvEntry& e : section.entries) {
                if (e.key == "target") cfg.open_target = e.value;
                else if (e.key == "unknown-count") cfg.open_unknown = static_cast<int>(kv_int(file, e));
                else throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                      ": unknown [open-world] key '" + e.key + "'");
            }
        } else if (section.name == "sweep") {
            for (const KvEntry& e : section.entries) {
                if (e.key == "axis") cfg.sweep_axis = sweep_axis_from_name(e.value);
                else if (e.key == "values") {
                    cfg.sweep_values.clear();
                    for (const std::string& v : split_csv_list(e.value)) {
                        KvEntry synth = e;
                        synth.value = v;
                        cfg.sweep_values.push_back(kv_int(file, synth));
                    }
                } else {
                    throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                     ": unknown [sweep] key '" + e.key + "'");
                }
            }
        } else {
            throw ParseError(file.origin + ":" + std::to_string(section.line) +
                             ": unknown section [" + section.name + "]");
        }
    }
    return cfg;
}

TrainedModel train_model_kind(ModelKind kind, const LabeledDataset& normalized_train,
                              std::uint64_t seed) {
    TrainedModel trained;
    trained.norm = normalized_train.norm_meta;
    switch (kind) {
        case ModelKind::Forest:
            trained.model = train_forest(normalized_train, ForestParams{}, seed);
            break;
        case ModelKind::Svm:
            trained.model = train_svm(normalized_train, SvmParams{});
            break;
        case ModelKind::Mlp:
            trained.model = train_mlp(normalized_train, MlpParams{}, seed);
            break;
        case ModelKind::Conv1d:
            trained.model = train_conv1d(normalized_train, Conv1dParams{}, seed);
            break;
    }
    return trained;
}

Report run_closed_world(const ExperimentConfig& config) {
    config.validate();
    const ProfileSet profiles = load_profiles(config.profiles_path);
    const int jobs = effective_jobs(config.jobs);

    const LabeledDataset corpus =
        collect_corpus(config.link, profiles, config.probe, config.traces_per_class,
                       Rng::derive(config.seed, {kCorpusTag}), jobs);
    const SplitPair pair =
        split_stratified(corpus, 0.7, Rng::derive(config.seed, {kSplitTag}));
    const auto [train, test] = normalize_pair(pair);

    Report report;
    report.experiment_id = "closed-world";
    report.config_echo = config.echo();

    for (std::size_t m = 0; m < config.models.size(); ++m) {
        const ModelKind kind = config.models[m];
        const TrainedModel model =
            train_model_kind(kind, train, Rng::derive(config.seed, {kTrainTag, m}));
        // Models see normalized rows directly here; the stored norm meta is
        // for predicting on raw traces later.
        TrainedModel raw_view = model;
        raw_view.norm.reset();
        report.model_order.push_back(model_kind_name(kind));
        report.per_model[model_kind_name(kind)] = evaluate_model(raw_view, test);
    }

    report.gate_single_feature_accuracy = best_single_feature_accuracy(train, test);

    // 10-fold CV for the flagship forest, when the corpus is large enough.
    bool cv_feasible = true;
    for (const auto& [code, count] : corpus.class_counts()) cv_feasible &= count >= 10;
    if (cv_feasible) {
        std::uint64_t fold_counter = 0;
        const TrainEvalFn fn = [&](const LabeledDataset& fold_train,
                                   const LabeledDataset& fold_test) {
            const LabeledDataset tn = normalize_minmax(fold_train);
            const LabeledDataset te = apply_minmax(fold_test, *tn.norm_meta);
            const ForestModel forest = train_forest(
                tn, ForestParams{}, Rng::derive(config.seed, {kCvTag, fold_counter++}));
            return compute_metrics(te.labels, forest.predict_batch(te));
        };
        report.cv_folds["forest"] =
            cross_validate(corpus, fn, 10, Rng::derive(config.seed, {kCvTag}));
    } else {
        report.config_echo["cv_skipped"] = "class counts below 10";
    }

    if (config.with_projection) {
        const LabeledDataset all = normalize_minmax(corpus);
        report.projection = project_2d(all, config.projection_method, config.tsne,
                                       Rng::derive(config.seed, {kProjectionTag}));
        report.projection_labels = all.labels;
    }
    return report;
}

Report run_open_world(const ExperimentConfig& config) {
    config.validate();
    const ProfileSet profiles = load_profiles(config.profiles_path);
    const std::size_t n_classes = profiles.profiles.size();
    if (config.open_unknown > static_cast<int>(n_classes) - 1)
        throw ValidationError("open-world: unknown-count must be <= n_classes - 1");

    std::vector<std::string> targets;
    if (config.open_target == "all") {
        targets = profiles.codes();
    } else {
        if (!profiles.find_code(config.open_target))
            throw ValidationError("open-world: unknown target code '" + config.open_target + "'");
        targets.push_back(config.open_target);
    }

    const int jobs = effective_jobs(config.jobs);
    const LabeledDataset corpus =
        collect_corpus(config.link, profiles, config.probe, config.traces_per_class,
                       Rng::derive(config.seed, {kCorpusTag}), jobs);
    const SplitPair pair =
        split_stratified(corpus, 0.7, Rng::derive(config.seed, {kSplitTag}));

    Report report;
    report.experiment_id = "open-world";
    report.config_echo = config.echo();
    report.model_order.push_back("forest");

    struct Cell {
        std::size_t target_idx;
        int rep;
    };
    std::vector<Cell> cells;
    for (std::size_t t = 0; t < targets.size(); ++t)
        for (int r = 0; r < config.repetitions; ++r) cells.push_back({t, r});
    std::vector<double> accuracy(cells.size());

    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const std::string& target = targets[cells[i].target_idx];
        Rng draw_rng(Rng::derive(config.seed, {kOpenWorldTag, cells[i].target_idx,
                                               static_cast<std::uint64_t>(cells[i].rep)}));
        std::vector<std::string> pool;
        for (const std::string& code : profiles.codes())
            if (code != target) pool.push_back(code);
        draw_rng.shuffle(pool);
        const std::set<std::string> unknown(pool.begin(),
                                            pool.begin() + config.open_unknown);

        const SplitPair ow = make_open_world(pair, target, unknown);
        const auto [train, test] = normalize_pair(ow);
        const ForestModel forest =
            train_forest(train, ForestParams{},
                         Rng::derive(config.seed, {kTrainTag, cells[i].target_idx,
                                                   static_cast<std::uint64_t>(cells[i].rep)}));
        accuracy[i] = compute_metrics(test.labels, forest.predict_batch(test)).accuracy;
    });

    std::vector<double> all_acc;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        OpenWorldRow row;
        row.target = targets[t];
        row.unknown_count = config.open_unknown;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (cells[i].target_idx == t) row.per_repetition.push_back(accuracy[i]);
        row.mean_accuracy = mean_of(row.per_repetition);
        row.std_accuracy = sample_std(row.per_repetition);
        all_acc.insert(all_acc.end(), row.per_repetition.begin(), row.per_repetition.end());
        report.open_world.push_back(std::move(row));
    }
    report.config_echo["open_world_mean_accuracy"] = mean_of(all_acc);
    return report;
}

Report run_sweep(const ExperimentConfig& config) {
    config.validate();
    const ProfileSet full = load_profiles(config.profiles_path);

    // The sweep subset drops the noise generator and the most complex
    // iterative workload when present.
    ProfileSet subset;
    subset.name = full.name;
    subset.version = full.version;
    for (const VictimProfile& p : full.profiles)
        if (p.code != "NG" && p.code != "HS") subset.profiles.push_back(p);
    if (subset.profiles.size() < 2)
        throw ValidationError("sweep: subset needs at least 2 profiles");

    const std::vector<long> values =
        config.sweep_values.empty() ? default_sweep_values(config.sweep_axis)
                                    : config.sweep_values;
    const int jobs = effective_jobs(config.jobs);
    const std::uint64_t axis_tag = static_cast<std::uint64_t>(config.sweep_axis);

    struct CellOut {
        std::vector<double> accuracy;  // aligned with config.models
    };
    const std::size_t n_cells = values.size() * static_cast<std::size_t>(config.repetitions);
    std::vector<CellOut> cells(n_cells);

    parallel_for(n_cells, jobs, [&](std::size_t i) {
        const std::size_t vi = i / static_cast<std::size_t>(config.repetitions);
        const std::size_t rep = i % static_cast<std::size_t>(config.repetitions);
        const std::uint64_t cell_seed =
            Rng::derive(config.seed, {kSweepTag, axis_tag, vi, rep});
        const ProbeConfig probe = probe_with_axis(config.probe, config.sweep_axis, values[vi]);

        const LabeledDataset corpus =
            collect_corpus(config.link, subset, probe, config.traces_per_class,
                           Rng::derive(cell_seed, {kCorpusTag}), 1);
        const SplitPair pair =
            split_stratified(corpus, 0.7, Rng::derive(cell_seed, {kSplitTag}));
        const auto [train, test] = normalize_pair(pair);

        cells[i].accuracy.resize(config.models.size());
        for (std::size_t m = 0; m < config.models.size(); ++m) {
            const TrainedModel model = train_model_kind(
                config.models[m], train, Rng::derive(cell_seed, {kTrainTag, m}));
            TrainedModel raw_view = model;
            raw_view.norm.reset();
            cells[i].accuracy[m] = evaluate_model(raw_view, test).accuracy;
        }
    });

    Report report;
    report.experiment_id = "sweep-" + sweep_axis_name(config.sweep_axis);
    report.config_echo = config.echo();
    for (ModelKind kind : config.models) report.model_order.push_back(model_kind_name(kind));

    SweepCurveSet curves;
    curves.axis = sweep_axis_name(config.sweep_axis);
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        for (std::size_t m = 0; m < config.models.size(); ++m) {
            std::vector<double> acc;
            for (int rep = 0; rep < config.repetitions; ++rep)
                acc.push_back(
                    cells[vi * static_cast<std::size_t>(config.repetitions) +
                          static_cast<std::size_t>(rep)]
                        .accuracy[m]);
            SweepPoint point;
            point.axis_value = values[vi];
            point.model = model_kind_name(config.models[m]);
            point.mean_accuracy = mean_of(acc);
            point.std_accuracy = sample_std(acc);
            curves.points.push_back(std::move(point));
        }
    }
    report.sweep = std::move(curves);
    return report;
}

}  // namespace linkfp
