#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linkfp/dataset.hpp"

namespace linkfp {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;     // 0 = unbounded
    int max_features = 0;  // 0 = floor(sqrt(n_features))
    int min_leaf = 1;
    bool bootstrap = true;
};

// Axis-aligned CART node. Internal nodes route row[feature] <= threshold to
// `left`; leaves carry the class histogram of their training rows.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<long> counts;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    // Index of the class histogram argmax at the reached leaf; histogram
    // ties resolve to the lowest class index.
    int predict(std::span<const double> row) const;
};

class ForestModel {
public:
    std::vector<std::string> classes;
    ForestParams params;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;

    // Majority vote over trees; vote ties resolve to the lowest class index.
    std::string predict(std::span<const double> row) const;
    std::vector<std::string> predict_batch(const LabeledDataset& dataset) const;
};

// Gini-impurity CART forest. Each tree grows on a bootstrap resample (when
// enabled) and examines max_features split candidates per node, both drawn
// from streams derived from `seed`. A node splits only if the best split
// strictly reduces weighted Gini impurity. Equal-impurity candidates resolve
// to the lowest (feature, threshold) pair, so training never depends on
// container iteration order.
ForestModel train_forest(const LabeledDataset& train, const ForestParams& params,
                         std::uint64_t seed);

// A depth-unbounded tree restricted to a single feature, evaluated on the
// test partition; the maximum over features is the nontriviality gate of the
// shipped calibration ("can any single trace point classify on its own?").
double best_single_feature_accuracy(const LabeledDataset& train, const LabeledDataset& test);

}  // namespace linkfp
