#include "doctest.h"
#include "linkfp/errors.hpp"
#include "linkfp/model_io.hpp"
#include "linkfp/rng.hpp"

#include <cstdio>
#include <fstream>

using namespace linkfp;

namespace {

LabeledDataset toy_train(std::uint64_t seed) {
    LabeledDataset d;
    Rng rng(seed);
    std::vector<double> row(12);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 12; ++i) {
            for (std::size_t f = 0; f < row.size(); ++f)
                row[f] = std::clamp(0.3 * c + 0.15 * rng.gaussian() + 0.2, 0.0, 1.0);
            d.add_row(row, "c" + std::to_string(c));
        }
    return d;
}

LabeledDataset probe_rows(std::size_t n, std::uint64_t seed) {
    LabeledDataset d;
    Rng rng(seed);
    std::vector<double> row(12);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : row) v = rng.uniform();
        d.add_row(row, "?");
    }
    return d;
}

void check_round_trip(const TrainedModel& model, const char* path) {
    save_model(model, path);
    const TrainedModel loaded = load_model(path);
    CHECK(loaded.kind() == model.kind());
    CHECK(loaded.classes() == model.classes());
    const LabeledDataset probe = probe_rows(200, 999);
    CHECK(loaded.predict_batch(probe) == model.predict_batch(probe));
    std::remove(path);
}

}  // namespace

TEST_CASE("every model kind round-trips with bit-exact predictions") {
    const LabeledDataset train = toy_train(5);
    SUBCASE("forest") {
        TrainedModel m{train_forest(train, ForestParams{}, 3), NormMeta{0.0, 1.0}};
        check_round_trip(m, "/tmp/linkfp_model_forest.txt");
    }
    SUBCASE("svm") {
        TrainedModel m{train_svm(train, SvmParams{}), std::nullopt};
        check_round_trip(m, "/tmp/linkfp_model_svm.txt");
    }
    SUBCASE("mlp") {
        MlpParams params;
        params.epochs = 50;
        TrainedModel m{train_mlp(train, params, 3), NormMeta{-0.5, 2.0}};
        check_round_trip(m, "/tmp/linkfp_model_mlp.txt");
    }
    SUBCASE("conv1d") {
        Conv1dParams params;
        params.epochs = 50;
        TrainedModel m{train_conv1d(train, params, 3), std::nullopt};
        check_round_trip(m, "/tmp/linkfp_model_conv1d.txt");
    }
}

TEST_CASE("norm meta survives the round trip and rescales raw rows") {
    const LabeledDataset train = toy_train(7);
    TrainedModel m{train_forest(train, ForestParams{}, 1), NormMeta{10.0, 30.0}};
    save_model(m, "/tmp/linkfp_model_norm.txt");
    const TrainedModel loaded = load_model("/tmp/linkfp_model_norm.txt");
    REQUIRE(loaded.norm.has_value());
    CHECK(loaded.norm->min == 10.0);
    CHECK(loaded.norm->max == 30.0);
    std::remove("/tmp/linkfp_model_norm.txt");
}

TEST_CASE("corrupt files are parse errors") {
    SUBCASE("truncated") {
        std::ofstream out("/tmp/linkfp_model_bad.txt");
        out << "linkfp-model 1\nkind forest\nnorm none\nclasses 2\na\nb\nfeatures 3\n";
        out.close();
        CHECK_THROWS_AS(load_model("/tmp/linkfp_model_bad.txt"), ParseError);
    }
    SUBCASE("wrong magic") {
        std::ofstream out("/tmp/linkfp_model_bad.txt");
        out << "something-else 1\n";
        out.close();
        CHECK_THROWS_AS(load_model("/tmp/linkfp_model_bad.txt"), ParseError);
    }
    SUBCASE("unknown kind") {
        std::ofstream out("/tmp/linkfp_model_bad.txt");
        out << "linkfp-model 1\nkind perceptron9000\n";
        out.close();
        CHECK_THROWS_AS(load_model("/tmp/linkfp_model_bad.txt"), ValidationError);
    }
    SUBCASE("unsupported version") {
        std::ofstream out("/tmp/linkfp_model_bad.txt");
        out << "linkfp-model 99\nkind forest\n";
        out.close();
        CHECK_THROWS_AS(load_model("/tmp/linkfp_model_bad.txt"), ParseError);
    }
    std::remove("/tmp/linkfp_model_bad.txt");
    CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}
