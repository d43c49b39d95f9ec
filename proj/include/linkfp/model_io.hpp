#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "linkfp/dataset.hpp"
#include "linkfp/forest.hpp"
#include "linkfp/nn.hpp"
#include "linkfp/svm.hpp"

namespace linkfp {

enum class ModelKind { Forest, Svm, Mlp, Conv1d };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// A trained classifier plus the min-max meta its inputs were scaled with.
// Prediction applies the stored scaling, so callers feed raw trace rows.
struct TrainedModel {
    std::variant<ForestModel, SvmModel, MlpModel, Conv1dModel> model;
    std::optional<NormMeta> norm;

    ModelKind kind() const;
    const std::vector<std::string>& classes() const;
    std::string predict(std::span<const double> row) const;
    std::vector<std::string> predict_batch(const LabeledDataset& dataset) const;
};

// Versioned flat text format; numbers are written with enough digits that a
// save/load round trip preserves predictions bit-exactly.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace linkfp
