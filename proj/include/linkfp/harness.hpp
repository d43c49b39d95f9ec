#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linkfp/kvfile.hpp"
#include "linkfp/linksim.hpp"
#include "linkfp/model_io.hpp"
#include "linkfp/probe.hpp"
#include "linkfp/projection.hpp"
#include "linkfp/report.hpp"

namespace linkfp {

enum class Scenario { Closed, Open, Sweep };

enum class SweepAxis { AccessNum, RepeatNum, BufferSize, BufferNum };

std::string sweep_axis_name(SweepAxis axis);               // "access_num", ...
SweepAxis sweep_axis_from_name(const std::string& name);   // accepts - or _ spelling
std::vector<long> default_sweep_values(SweepAxis axis);

// The full description of one experiment run. Everything that affects the
// output lives here; the echo of this struct plus the seed reproduces any
// report exactly.
struct ExperimentConfig {
    LinkConfig link;
    ProbeConfig probe;
    std::string profiles_path;
    int traces_per_class = 50;
    std::vector<ModelKind> models = {ModelKind::Forest, ModelKind::Svm, ModelKind::Mlp,
                                     ModelKind::Conv1d};
    std::uint64_t seed = 42;
    Scenario scenario = Scenario::Closed;
    SweepAxis sweep_axis = SweepAxis::RepeatNum;
    std::vector<long> sweep_values;  // empty -> default_sweep_values(axis)
    std::string open_target = "all";
    int open_unknown = 4;
    int repetitions = 5;
    int jobs = 0;  // 0 -> hardware concurrency
    bool with_projection = false;
    ProjectionMethod projection_method = ProjectionMethod::Tsne;
    TsneParams tsne;

    void validate() const;
    nlohmann::json echo() const;
};

// Applies the [link]/[probe]/[experiment]/[open-world]/[sweep] sections of a
// config file on top of the given defaults.
ExperimentConfig apply_config_file(const ExperimentConfig& base, const KvFile& file);

// Trains one classifier family on already-normalized data.
TrainedModel train_model_kind(ModelKind kind, const LabeledDataset& normalized_train,
                              std::uint64_t seed);

// Closed-world n-way fingerprinting: corpus -> stratified 7:3 split ->
// train-fitted normalization -> all configured models -> metrics, confusion
// matrices, the single-feature nontriviality gate, and 10-fold CV for the
// forest (when every class has at least 10 traces).
Report run_closed_world(const ExperimentConfig& config);

// Binary target-vs-other fingerprinting with unknown accelerators hidden
// from training. Draws `repetitions` unknown sets per target and reports
// mean +/- std forest accuracy per (target, unknown count).
Report run_open_world(const ExperimentConfig& config);

// Parameter sweep over one probe axis, the other three pinned; each axis
// value gets `repetitions` fresh corpora on the 6-profile sweep subset
// (stock set minus NG and HS) and all configured models.
Report run_sweep(const ExperimentConfig& config);

}  // namespace linkfp
