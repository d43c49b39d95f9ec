#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "linkfp/metrics.hpp"

namespace linkfp {

struct SweepPoint {
    long axis_value = 0;
    std::string model;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct SweepCurveSet {
    std::string axis;
    std::vector<SweepPoint> points;  // one per (axis value, model)
};

struct OpenWorldRow {
    std::string target;
    int unknown_count = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> per_repetition;
};

// Everything one experiment produced. config_echo carries the full effective
// configuration and every seed, so the report alone reproduces the run.
struct Report {
    std::string experiment_id;
    nlohmann::json config_echo;
    std::vector<std::string> model_order;            // run order, first = flagship
    std::map<std::string, EvalMetrics> per_model;
    std::map<std::string, std::vector<EvalMetrics>> cv_folds;
    std::optional<SweepCurveSet> sweep;
    std::vector<OpenWorldRow> open_world;
    std::vector<std::array<double, 2>> projection;
    std::vector<std::string> projection_labels;
    double gate_single_feature_accuracy = -1.0;  // < 0 when not computed

    nlohmann::json to_json() const;
};

// Writes report.json plus confusion_<model>.csv (and confusion.csv for the
// first model), curves.csv + curves.svg for sweeps, projection.csv/.svg when
// a projection was requested, and cv.csv/cv.svg when cross-validation ran.
// Filenames are deterministic; reruns with the same config and seed produce
// byte-identical files.
void emit_report(const Report& report, const std::string& out_dir);

}  // namespace linkfp
