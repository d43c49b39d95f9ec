#include "linkfp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "linkfp/errors.hpp"
#include "linkfp/kvfile.hpp"
#include "linkfp/rng.hpp"

namespace linkfp {

void LabeledDataset::add_row(std::span<const double> features, const std::string& label) {
    if (n_features == 0 && values.empty()) n_features = features.size();
    if (features.size() != n_features)
        throw ValidationError("dataset: row width " + std::to_string(features.size()) +
                              " != " + std::to_string(n_features));
    values.insert(values.end(), features.begin(), features.end());
    labels.push_back(label);
}

std::vector<std::string> LabeledDataset::class_codes() const {
    std::set<std::string> unique(labels.begin(), labels.end());
    return {unique.begin(), unique.end()};
}

std::map<std::string, int> LabeledDataset::class_index() const {
    std::map<std::string, int> index;
    int next = 0;
    for (const std::string& code : class_codes()) index[code] = next++;
    return index;
}

std::map<std::string, std::size_t> LabeledDataset::class_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const std::string& label : labels) ++counts[label];
    return counts;
}

LabeledDataset normalize_minmax(const LabeledDataset& dataset) {
    if (dataset.n_rows() == 0) throw ValidationError("normalize: empty dataset");
    double lo = dataset.values[0], hi = dataset.values[0];
    for (double v : dataset.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw ValidationError("normalize: degenerate data (max == min)");
    LabeledDataset out = dataset;
    for (double& v : out.values) v = (v - lo) / (hi - lo);
    out.norm_meta = NormMeta{lo, hi};
    return out;
}

LabeledDataset apply_minmax(const LabeledDataset& dataset, NormMeta meta) {
    if (!(meta.max > meta.min)) throw ValidationError("normalize: degenerate meta");
    LabeledDataset out = dataset;
    for (double& v : out.values)
        v = std::clamp((v - meta.min) / (meta.max - meta.min), 0.0, 1.0);
    out.norm_meta = meta;
    return out;
}

SplitPair split_stratified(const LabeledDataset& dataset, double train_fraction,
                           std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split: train fraction must be in (0, 1)");
    SplitPair pair;
    pair.split_seed = seed;
    pair.train.n_features = pair.test.n_features = dataset.n_features;
    pair.train.norm_meta = pair.test.norm_meta = dataset.norm_meta;

    const std::vector<std::string> codes = dataset.class_codes();
    for (std::size_t c = 0; c < codes.size(); ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < dataset.n_rows(); ++i)
            if (dataset.labels[i] == codes[c]) rows.push_back(i);
        if (rows.size() < 2)
            throw ValidationError("split: class '" + codes[c] + "' has " +
                                  std::to_string(rows.size()) + " rows, needs >= 2");
        Rng rng(Rng::derive(seed, {c}));
        rng.shuffle(rows);
        const std::size_t n_train =
            static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(rows.size())));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            LabeledDataset& dst = k < n_train ? pair.train : pair.test;
            dst.add_row(dataset.row(rows[k]), codes[c]);
        }
    }
    return pair;
}

SplitPair make_open_world(const SplitPair& pair, const std::string& target_code,
                          const std::set<std::string>& unknown_codes) {
    if (unknown_codes.count(target_code))
        throw ValidationError("open-world: target '" + target_code + "' is in the unknown set");
    const auto has_code = [&](const LabeledDataset& d) {
        return std::find(d.labels.begin(), d.labels.end(), target_code) != d.labels.end();
    };
    if (!has_code(pair.train) || !has_code(pair.test))
        throw ValidationError("open-world: target '" + target_code +
                              "' missing from train or test partition");

    SplitPair out;
    out.split_seed = pair.split_seed;
    out.train.n_features = out.test.n_features = pair.train.n_features;
    out.train.norm_meta = pair.train.norm_meta;
    out.test.norm_meta = pair.test.norm_meta;

    for (std::size_t i = 0; i < pair.train.n_rows(); ++i) {
        const std::string& label = pair.train.labels[i];
        if (unknown_codes.count(label)) continue;  // agnostic to the classifier
        out.train.add_row(pair.train.row(i), label == target_code ? kLabelTarget : kLabelOther);
    }
    for (std::size_t i = 0; i < pair.test.n_rows(); ++i) {
        const std::string& label = pair.test.labels[i];
        out.test.add_row(pair.test.row(i), label == target_code ? kLabelTarget : kLabelOther);
    }
    if (out.train.class_codes().size() < 2)
        std::cerr << "warning: open-world train partition holds a single class ("
                  << target_code << " only)\n";
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void save_csv(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF on every platform
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t f = 0; f < dataset.n_features; ++f) out << "f" << f << ",";
    out << "label\n";
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        const auto row = dataset.row(i);
        for (double v : row) out << format_double(v) << ",";
        out << dataset.labels[i] << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

LabeledDataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty dataset file");
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();

    const std::vector<std::string> header = split_csv_list(line);
    if (header.size() < 2 || header.back() != "label")
        throw ParseError(path + ": header must be f0,..,f{N-1},label");
    for (std::size_t f = 0; f + 1 < header.size(); ++f)
        if (header[f] != "f" + std::to_string(f))
            throw ParseError(path + ": unexpected header column '" + header[f] + "'");

    LabeledDataset out;
    out.n_features = header.size() - 1;
    std::vector<double> row(out.n_features);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0, field = 0;
        std::string label;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (field < out.n_features) {
                char* end = nullptr;
                row[field] = std::strtod(cell.c_str(), &end);
                if (end == cell.c_str() || *end != '\0')
                    throw ParseError(path + ": row " + std::to_string(lineno) +
                                     ": non-numeric cell '" + cell + "'");
            } else if (field == out.n_features) {
                label = cell;
            }
            ++field;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != out.n_features + 1)
            throw ParseError(path + ": row " + std::to_string(lineno) + ": expected " +
                             std::to_string(out.n_features + 1) + " fields, got " +
                             std::to_string(field));
        if (label.empty())
            throw ParseError(path + ": row " + std::to_string(lineno) + ": empty label token");
        out.add_row(row, label);
    }
    if (out.n_rows() == 0) throw ParseError(path + ": empty dataset file");
    return out;
}

}  // namespace linkfp
