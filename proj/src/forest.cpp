#include "linkfp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "linkfp/errors.hpp"
#include "linkfp/metrics.hpp"
#include "linkfp/rng.hpp"

namespace linkfp {

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double child_gini = 0.0;  // weighted by child sizes

    bool better_than(const SplitChoice& o) const {
        if (!o.found) return found;
        if (child_gini != o.child_gini) return child_gini < o.child_gini;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

double gini(const std::vector<long>& counts, long total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

class TreeBuilder {
public:
    TreeBuilder(const LabeledDataset& data, const std::vector<int>& row_class,
                std::size_t n_classes, const ForestParams& params, Rng& rng)
        : data_(data), row_class_(row_class), n_classes_(n_classes), params_(params), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> rows) {
        DecisionTree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    int grow(DecisionTree& tree, std::vector<std::size_t> rows, int depth) {
        std::vector<long> counts(n_classes_, 0);
        for (std::size_t r : rows) ++counts[static_cast<std::size_t>(row_class_[r])];
        const long total = static_cast<long>(rows.size());

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        tree.nodes[static_cast<std::size_t>(node_id)].counts = counts;

        const double node_gini = gini(counts, total);
        const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
        if (node_gini <= 0.0 || total < 2 * params_.min_leaf || !depth_ok) return node_id;

        const SplitChoice split = find_split(rows, counts, total, node_gini);
        if (!split.found) return node_id;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (std::size_t r : rows) {
            if (data_.row(r)[static_cast<std::size_t>(split.feature)] <= split.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left = grow(tree, std::move(left_rows), depth + 1);
        const int right = grow(tree, std::move(right_rows), depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return node_id;
    }

    SplitChoice find_split(const std::vector<std::size_t>& rows, const std::vector<long>& counts,
                           long total, double node_gini) {
        const int d = static_cast<int>(data_.n_features);
        int n_candidates = params_.max_features > 0
                               ? std::min(params_.max_features, d)
                               : std::max(1, static_cast<int>(std::floor(
                                                 std::sqrt(static_cast<double>(d)))));

        // Candidate features without replacement, then sorted so that the
        // tie-break rule is independent of the draw order.
        std::vector<int> candidates;
        if (n_candidates >= d) {
            candidates.resize(static_cast<std::size_t>(d));
            for (int f = 0; f < d; ++f) candidates[static_cast<std::size_t>(f)] = f;
        } else {
            std::vector<int> pool(static_cast<std::size_t>(d));
            for (int f = 0; f < d; ++f) pool[static_cast<std::size_t>(f)] = f;
            for (int k = 0; k < n_candidates; ++k) {
                const std::size_t pick =
                    static_cast<std::size_t>(k) +
                    rng_.below(static_cast<std::uint64_t>(d - k));
                std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
            }
            candidates.assign(pool.begin(), pool.begin() + n_candidates);
            std::sort(candidates.begin(), candidates.end());
        }

        SplitChoice best;
        std::vector<std::pair<double, int>> column(rows.size());
        std::vector<long> left_counts(n_classes_);
        for (int f : candidates) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                column[i] = {data_.row(rows[i])[static_cast<std::size_t>(f)],
                             row_class_[rows[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0);
            long n_left = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                ++left_counts[static_cast<std::size_t>(column[i].second)];
                ++n_left;
                if (column[i].first == column[i + 1].first) continue;
                const long n_right = total - n_left;
                if (n_left < params_.min_leaf || n_right < params_.min_leaf) continue;

                double left_sq = 0.0, right_sq = 0.0;
                for (std::size_t c = 0; c < n_classes_; ++c) {
                    const double lc = static_cast<double>(left_counts[c]);
                    const double rc = static_cast<double>(counts[c] - left_counts[c]);
                    left_sq += lc * lc;
                    right_sq += rc * rc;
                }
                const double gini_left = 1.0 - left_sq / (static_cast<double>(n_left) *
                                                          static_cast<double>(n_left));
                const double gini_right = 1.0 - right_sq / (static_cast<double>(n_right) *
                                                            static_cast<double>(n_right));
                const double child =
                    (static_cast<double>(n_left) * gini_left +
                     static_cast<double>(n_right) * gini_right) /
                    static_cast<double>(total);

                SplitChoice candidate{true, f,
                                      std::midpoint(column[i].first, column[i + 1].first),
                                      child};
                if (candidate.better_than(best)) best = candidate;
            }
        }
        // A split must strictly reduce impurity or the node stays a leaf.
        if (best.found && !(best.child_gini < node_gini - 1e-12)) best.found = false;
        return best;
    }

    const LabeledDataset& data_;
    const std::vector<int>& row_class_;
    std::size_t n_classes_;
    const ForestParams& params_;
    Rng& rng_;
};

}  // namespace

int DecisionTree::predict(std::span<const double> row) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    const std::vector<long>& counts = nodes[static_cast<std::size_t>(node)].counts;
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::string ForestModel::predict(std::span<const double> row) const {
    if (row.size() != n_features)
        throw ValidationError("forest: row width " + std::to_string(row.size()) +
                              " != " + std::to_string(n_features));
    std::vector<long> votes(classes.size(), 0);
    for (const DecisionTree& tree : trees) ++votes[static_cast<std::size_t>(tree.predict(row))];
    const std::size_t winner =
        static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    return classes[winner];
}

std::vector<std::string> ForestModel::predict_batch(const LabeledDataset& dataset) const {
    std::vector<std::string> out;
    out.reserve(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) out.push_back(predict(dataset.row(i)));
    return out;
}

ForestModel train_forest(const LabeledDataset& train, const ForestParams& params,
                         std::uint64_t seed) {
    if (train.n_rows() == 0) throw ValidationError("forest: empty training data");
    ForestModel model;
    model.classes = train.class_codes();
    model.params = params;
    model.n_features = train.n_features;
    if (model.classes.size() < 2)
        throw ValidationError("forest: degenerate training data (single class)");

    const std::map<std::string, int> index = train.class_index();
    std::vector<int> row_class(train.n_rows());
    for (std::size_t i = 0; i < train.n_rows(); ++i)
        row_class[i] = index.at(train.labels[i]);

    model.trees.resize(static_cast<std::size_t>(params.n_trees));
    const std::size_t n = train.n_rows();
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(Rng::derive(seed, {static_cast<std::uint64_t>(t)}));
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = rng.below(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        TreeBuilder builder(train, row_class, model.classes.size(), params, rng);
        model.trees[static_cast<std::size_t>(t)] = builder.build(std::move(rows));
    }
    return model;
}

namespace {

LabeledDataset one_column(const LabeledDataset& data, std::size_t f) {
    LabeledDataset out;
    out.n_features = 1;
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        out.add_row(std::span<const double>(&data.row(i)[f], 1), data.labels[i]);
    return out;
}

}  // namespace

double best_single_feature_accuracy(const LabeledDataset& train, const LabeledDataset& test) {
    ForestParams params;
    params.n_trees = 1;
    params.max_features = 1;  // single candidate = the lone feature
    params.bootstrap = false;

    // The attacker picks the feature with training data only: an internal
    // stratified holdout ranks features, the winner is refit on the full
    // training partition and scored on the test partition once.
    const SplitPair holdout = split_stratified(train, 0.7, /*seed=*/0x5eedf00d);
    double best_holdout = -1.0;
    std::size_t best_feature = 0;
    for (std::size_t f = 0; f < train.n_features; ++f) {
        const ForestModel model = train_forest(one_column(holdout.train, f), params, 0);
        const LabeledDataset probe = one_column(holdout.test, f);
        const double acc = compute_metrics(probe.labels, model.predict_batch(probe)).accuracy;
        if (acc > best_holdout) {
            best_holdout = acc;
            best_feature = f;
        }
    }
    const ForestModel model = train_forest(one_column(train, best_feature), params, 0);
    const LabeledDataset probe = one_column(test, best_feature);
    return compute_metrics(probe.labels, model.predict_batch(probe)).accuracy;
}

}  // namespace linkfp
