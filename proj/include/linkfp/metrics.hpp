#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linkfp/dataset.hpp"

namespace linkfp {

// Classification quality summary. The confusion matrix is indexed by
// `classes` (lexicographic order), rows = true label, columns = predicted.
struct EvalMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::string> classes;
    std::vector<std::vector<long>> confusion;
};

// Metrics from parallel truth/prediction sequences. Macro averages run over
// classes present in the truth; a class never predicted scores precision 0.
EvalMetrics compute_metrics(const std::vector<std::string>& truth,
                            const std::vector<std::string>& predicted);

// Trains on one partition, evaluates on the other. The callee owns
// normalization decisions so folds never leak test statistics.
using TrainEvalFn =
    std::function<EvalMetrics(const LabeledDataset& train, const LabeledDataset& test)>;

// Stratified k-fold cross-validation: per-class seeded shuffle, rows dealt
// round-robin into k folds. Every class must have at least k rows.
std::vector<EvalMetrics> cross_validate(const LabeledDataset& dataset,
                                        const TrainEvalFn& train_eval, int k,
                                        std::uint64_t seed);

}  // namespace linkfp
