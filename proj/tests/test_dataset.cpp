#include "doctest.h"
#include "linkfp/dataset.hpp"
#include "linkfp/errors.hpp"
#include "linkfp/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

using namespace linkfp;

namespace {

LabeledDataset toy(std::initializer_list<std::pair<std::vector<double>, std::string>> rows) {
    LabeledDataset d;
    for (const auto& [features, label] : rows) d.add_row(features, label);
    return d;
}

LabeledDataset random_corpus(std::size_t classes, std::size_t per_class, std::size_t width,
                             std::uint64_t seed) {
    LabeledDataset d;
    Rng rng(seed);
    std::vector<double> row(width);
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            for (double& v : row) v = rng.uniform();
            d.add_row(row, "K" + std::to_string(c));
        }
    return d;
}

}  // namespace

TEST_CASE("normalize_minmax") {
    SUBCASE("maps the global span onto [0,1]") {
        const LabeledDataset d = toy({{{2}, "a"}, {{4}, "b"}, {{6}, "c"}});
        const LabeledDataset n = normalize_minmax(d);
        CHECK(n.values == std::vector<double>{0.0, 0.5, 1.0});
        REQUIRE(n.norm_meta.has_value());
        CHECK(n.norm_meta->min == 2.0);
        CHECK(n.norm_meta->max == 6.0);
    }
    SUBCASE("idempotent on already-normalized data") {
        const LabeledDataset d = toy({{{0.0, 0.25}, "a"}, {{0.5, 1.0}, "b"}});
        const LabeledDataset once = normalize_minmax(d);
        const LabeledDataset twice = normalize_minmax(once);
        CHECK(once.values == twice.values);
    }
    SUBCASE("per-row argmax preserved (monotone affine)") {
        const LabeledDataset d = random_corpus(2, 10, 7, 5);
        const LabeledDataset n = normalize_minmax(d);
        for (std::size_t i = 0; i < d.n_rows(); ++i) {
            const auto raw = d.row(i);
            const auto scaled = n.row(i);
            CHECK(std::max_element(raw.begin(), raw.end()) - raw.begin() ==
                  std::max_element(scaled.begin(), scaled.end()) - scaled.begin());
        }
    }
    SUBCASE("constant data is degenerate") {
        const LabeledDataset d = toy({{{3, 3}, "a"}, {{3, 3}, "b"}});
        CHECK_THROWS_AS(normalize_minmax(d), ValidationError);
    }
    SUBCASE("test-time scaling clamps to [0,1]") {
        const LabeledDataset d = toy({{{-1}, "a"}, {{0.5}, "b"}, {{9}, "c"}});
        const LabeledDataset applied = apply_minmax(d, NormMeta{0.0, 1.0});
        CHECK(applied.values == std::vector<double>{0.0, 0.5, 1.0});
    }
}

TEST_CASE("split_stratified") {
    SUBCASE("8 classes x 50 rows split 35/15 per class") {
        const LabeledDataset d = random_corpus(8, 50, 4, 11);
        const SplitPair pair = split_stratified(d, 0.7, 99);
        CHECK(pair.train.n_rows() == 8 * 35);
        CHECK(pair.test.n_rows() == 8 * 15);
        for (const auto& [code, count] : pair.train.class_counts()) CHECK(count == 35);
        for (const auto& [code, count] : pair.test.class_counts()) CHECK(count == 15);
    }
    SUBCASE("one class of 10 splits 7/3") {
        const LabeledDataset d = random_corpus(1, 10, 2, 3);
        const SplitPair pair = split_stratified(d, 0.7, 1);
        CHECK(pair.train.n_rows() == 7);
        CHECK(pair.test.n_rows() == 3);
    }
    SUBCASE("same seed gives the identical partition") {
        const LabeledDataset d = random_corpus(3, 9, 5, 17);
        const SplitPair a = split_stratified(d, 0.7, 7);
        const SplitPair b = split_stratified(d, 0.7, 7);
        CHECK(a.train.values == b.train.values);
        CHECK(a.test.values == b.test.values);
    }
    SUBCASE("train and test partition the rows disjointly") {
        LabeledDataset d = random_corpus(2, 6, 1, 23);
        // every row value unique with probability 1, so identity = value
        const SplitPair pair = split_stratified(d, 0.7, 5);
        std::vector<double> all = pair.train.values;
        all.insert(all.end(), pair.test.values.begin(), pair.test.values.end());
        std::sort(all.begin(), all.end());
        std::vector<double> original = d.values;
        std::sort(original.begin(), original.end());
        CHECK(all == original);
    }
    SUBCASE("a class with fewer than 2 rows cannot be stratified") {
        LabeledDataset d = random_corpus(1, 5, 2, 3);
        d.add_row(std::vector<double>{1.0, 2.0}, "LONER");
        CHECK_THROWS_AS(split_stratified(d, 0.7, 1), ValidationError);
    }
}

TEST_CASE("make_open_world") {
    const LabeledDataset d = random_corpus(4, 10, 3, 31);  // classes K0..K3
    const SplitPair pair = split_stratified(d, 0.7, 2);

    SUBCASE("unknown classes vanish from train but stay in test") {
        const SplitPair ow = make_open_world(pair, "K1", {"K3"});
        for (const std::string& label : ow.train.labels)
            CHECK((label == kLabelTarget || label == kLabelOther));
        CHECK(ow.train.n_rows() == pair.train.n_rows() - 7);  // K3's 7 train rows removed
        CHECK(ow.test.n_rows() == pair.test.n_rows());        // unchanged
        const auto counts = ow.test.class_counts();
        CHECK(counts.at(kLabelTarget) == 3);
        CHECK(counts.at(kLabelOther) == 9);
    }
    SUBCASE("empty unknown set is a pure binary relabeling") {
        const SplitPair ow = make_open_world(pair, "K0", {});
        CHECK(ow.train.n_rows() == pair.train.n_rows());
        CHECK(ow.train.class_counts().at(kLabelTarget) == 7);
    }
    SUBCASE("removing every other class leaves a single-class train set") {
        const SplitPair ow = make_open_world(pair, "K2", {"K0", "K1", "K3"});
        CHECK(ow.train.class_codes() == std::vector<std::string>{kLabelTarget});
        CHECK(ow.test.n_rows() == pair.test.n_rows());
    }
    SUBCASE("target in the unknown set is invalid") {
        CHECK_THROWS_AS(make_open_world(pair, "K1", {"K1"}), ValidationError);
    }
    SUBCASE("absent target is invalid") {
        CHECK_THROWS_AS(make_open_world(pair, "NOPE", {}), ValidationError);
    }
}

TEST_CASE("csv round trip") {
    const std::string path = "/tmp/linkfp_test_dataset.csv";
    SUBCASE("save then load reproduces the matrix exactly") {
        LabeledDataset d = random_corpus(4, 100, 100, 41);
        d.values[0] = 1.0 / 3.0;
        d.values[1] = 1e-17;
        save_csv(d, path);
        const LabeledDataset loaded = load_csv(path);
        CHECK(loaded.n_features == d.n_features);
        CHECK(loaded.values == d.values);  // bit-exact
        CHECK(loaded.labels == d.labels);
    }
    SUBCASE("width mismatch reported with the row number") {
        std::ofstream out(path);
        out << "f0,f1,label\n1.0,2.0,a\n1.0,b\n";
        out.close();
        try {
            load_csv(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        }
    }
    SUBCASE("non-numeric cell rejected") {
        std::ofstream out(path);
        out << "f0,label\nxyz,a\n";
        out.close();
        CHECK_THROWS_AS(load_csv(path), ParseError);
    }
    SUBCASE("empty file rejected") {
        std::ofstream out(path);
        out.close();
        CHECK_THROWS_AS(load_csv(path), ParseError);
    }
    std::remove(path.c_str());
}
