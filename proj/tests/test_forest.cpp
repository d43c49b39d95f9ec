#include "doctest.h"
#include "forest_oracle.hpp"
#include "linkfp/errors.hpp"
#include "linkfp/forest.hpp"
#include "linkfp/metrics.hpp"
#include "linkfp/rng.hpp"

using namespace linkfp;

namespace {

LabeledDataset random_rows(std::size_t n, std::size_t d, std::size_t classes,
                           std::uint64_t seed) {
    LabeledDataset out;
    Rng rng(seed);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : row) v = rng.uniform();
        out.add_row(row, "c" + std::to_string(rng.below(classes)));
    }
    // guarantee at least two classes
    if (out.class_codes().size() < 2) out.labels[0] = "c_extra";
    return out;
}

double train_accuracy(const ForestModel& model, const LabeledDataset& data) {
    return compute_metrics(data.labels, model.predict_batch(data)).accuracy;
}

// Structural equality of tree and oracle tree.
void check_same_tree(const DecisionTree& tree, const forestoracle::Tree& oracle) {
    REQUIRE(tree.nodes.size() == oracle.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        INFO("node ", i);
        CHECK(tree.nodes[i].feature == oracle.nodes[i].feature);
        CHECK(tree.nodes[i].left == oracle.nodes[i].left);
        CHECK(tree.nodes[i].right == oracle.nodes[i].right);
        CHECK(tree.nodes[i].counts == oracle.nodes[i].counts);
        if (tree.nodes[i].feature >= 0)
            CHECK(tree.nodes[i].threshold == oracle.nodes[i].threshold);
    }
}

}  // namespace

TEST_CASE("forest memorizes tiny training sets") {
    SUBCASE("two rows, two classes") {
        LabeledDataset d;
        d.add_row(std::vector<double>{0.0, 1.0}, "a");
        d.add_row(std::vector<double>{1.0, 0.0}, "b");
        const ForestModel model = train_forest(d, ForestParams{}, 1);
        CHECK(train_accuracy(model, d) == 1.0);
    }
    SUBCASE("xor pattern is not linearly separable but trees shatter it") {
        LabeledDataset d;
        d.add_row(std::vector<double>{0.0, 0.0}, "a");
        d.add_row(std::vector<double>{1.0, 1.0}, "a");
        d.add_row(std::vector<double>{0.0, 1.0}, "b");
        d.add_row(std::vector<double>{1.0, 0.0}, "b");
        ForestParams params;
        params.max_features = 2;  // xor needs both coordinates available
        params.bootstrap = false;
        const ForestModel model = train_forest(d, params, 3);
        CHECK(train_accuracy(model, d) == 1.0);
    }
}

TEST_CASE("deseeded single tree reproduces the exhaustive best-split oracle") {
    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.max_features = 0;  // 0 is floor(sqrt(d)); set below
    for (std::uint64_t seed = 100; seed < 108; ++seed) {
        const LabeledDataset d = random_rows(6, 3, 3, seed);
        params.max_features = static_cast<int>(d.n_features);  // consider all features
        const ForestModel model = train_forest(d, params, 0);
        const forestoracle::Tree oracle = forestoracle::build(d);
        INFO("dataset seed ", seed);
        check_same_tree(model.trees[0], oracle);
    }
}

TEST_CASE("training errors") {
    SUBCASE("single-class data is degenerate") {
        LabeledDataset d;
        d.add_row(std::vector<double>{1.0}, "only");
        d.add_row(std::vector<double>{2.0}, "only");
        CHECK_THROWS_AS(train_forest(d, ForestParams{}, 1), ValidationError);
    }
    SUBCASE("prediction row width must match training width") {
        const LabeledDataset d = random_rows(20, 4, 2, 5);
        const ForestModel model = train_forest(d, ForestParams{}, 1);
        CHECK_THROWS_AS(model.predict(std::vector<double>{1.0, 2.0}), ValidationError);
    }
}

TEST_CASE("training is a deterministic function of data, params and seed") {
    const LabeledDataset d = random_rows(60, 8, 3, 9);
    const ForestModel a = train_forest(d, ForestParams{}, 42);
    const ForestModel b = train_forest(d, ForestParams{}, 42);
    const LabeledDataset probe = random_rows(100, 8, 2, 10);
    CHECK(a.predict_batch(probe) == b.predict_batch(probe));

    const ForestModel c = train_forest(d, ForestParams{}, 43);
    bool any_difference = false;
    for (std::size_t t = 0; t < a.trees.size(); ++t)
        any_difference = any_difference || a.trees[t].nodes.size() != c.trees[t].nodes.size();
    CHECK(any_difference);  // different seed, different bootstrap draws
}

TEST_CASE("affine feature transforms leave predictions unchanged") {
    const LabeledDataset train = random_rows(80, 5, 3, 21);
    const LabeledDataset probe = random_rows(40, 5, 2, 22);

    LabeledDataset train_t = train, probe_t = probe;
    for (double& v : train_t.values) v = 3.5 * v + 11.0;
    for (double& v : probe_t.values) v = 3.5 * v + 11.0;

    const ForestModel base = train_forest(train, ForestParams{}, 7);
    const ForestModel scaled = train_forest(train_t, ForestParams{}, 7);
    CHECK(base.predict_batch(probe) == scaled.predict_batch(probe_t));
}

TEST_CASE("single-feature gate stays honest on noise-only data") {
    // pure noise: whatever feature the holdout picks, test accuracy stays
    // near chance
    const LabeledDataset train = random_rows(200, 6, 4, 31);
    const LabeledDataset test = random_rows(80, 6, 4, 32);
    const double gate = best_single_feature_accuracy(train, test);
    CHECK(gate < 0.45);
}
