#pragma once

// Exhaustive best-Gini-split tree builder: tries every (feature, threshold)
// pair by direct counting, no incremental bookkeeping. Reference for the
// production CART implementation; shares only the tie-break rule (lowest
// impurity, then lowest feature, then lowest threshold).

#include <algorithm>
#include <limits>
#include <vector>

#include "linkfp/dataset.hpp"

namespace forestoracle {

struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    std::vector<long> counts;
};

struct Tree {
    std::vector<Node> nodes;
};

inline double gini_of(const std::vector<int>& classes, std::size_t n_classes) {
    if (classes.empty()) return 0.0;
    std::vector<long> counts(n_classes, 0);
    for (int c : classes) ++counts[static_cast<std::size_t>(c)];
    double p2 = 0.0;
    for (long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(classes.size());
        p2 += p * p;
    }
    return 1.0 - p2;
}

inline int grow(Tree& tree, const linkfp::LabeledDataset& data,
                const std::vector<int>& row_class, std::vector<std::size_t> rows,
                std::size_t n_classes) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(Node{});
    tree.nodes[static_cast<std::size_t>(id)].counts.assign(n_classes, 0);
    for (std::size_t r : rows)
        ++tree.nodes[static_cast<std::size_t>(id)].counts[static_cast<std::size_t>(row_class[r])];

    std::vector<int> here;
    for (std::size_t r : rows) here.push_back(row_class[r]);
    const double parent = gini_of(here, n_classes);
    if (parent <= 0.0 || rows.size() < 2) return id;

    double best_gini = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < data.n_features; ++f) {
        std::vector<double> values;
        for (std::size_t r : rows) values.push_back(data.row(r)[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
            const double threshold = (values[v] + values[v + 1]) / 2.0;
            std::vector<int> left, right;
            for (std::size_t r : rows) {
                if (data.row(r)[f] <= threshold)
                    left.push_back(row_class[r]);
                else
                    right.push_back(row_class[r]);
            }
            const double child =
                (static_cast<double>(left.size()) * gini_of(left, n_classes) +
                 static_cast<double>(right.size()) * gini_of(right, n_classes)) /
                static_cast<double>(rows.size());
            const bool better =
                child < best_gini ||
                (child == best_gini &&
                 (static_cast<int>(f) < best_feature ||
                  (static_cast<int>(f) == best_feature && threshold < best_threshold)));
            if (better) {
                best_gini = child;
                best_feature = static_cast<int>(f);
                best_threshold = threshold;
            }
        }
    }
    if (best_feature < 0 || !(best_gini < parent - 1e-12)) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        if (data.row(r)[static_cast<std::size_t>(best_feature)] <= best_threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    const int left = grow(tree, data, row_class, left_rows, n_classes);
    const int right = grow(tree, data, row_class, right_rows, n_classes);
    Node& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return id;
}

inline Tree build(const linkfp::LabeledDataset& data) {
    const auto index = data.class_index();
    std::vector<int> row_class(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) row_class[i] = index.at(data.labels[i]);
    std::vector<std::size_t> rows(data.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    Tree tree;
    grow(tree, data, row_class, rows, index.size());
    return tree;
}

}  // namespace forestoracle
