#include "linkfp/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "linkfp/errors.hpp"
#include "linkfp/rng.hpp"

namespace linkfp {

EvalMetrics compute_metrics(const std::vector<std::string>& truth,
                            const std::vector<std::string>& predicted) {
    if (truth.empty() || truth.size() != predicted.size())
        throw ValidationError("metrics: truth/prediction size mismatch or empty");

    std::set<std::string> all(truth.begin(), truth.end());
    all.insert(predicted.begin(), predicted.end());

    EvalMetrics m;
    m.classes.assign(all.begin(), all.end());
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < m.classes.size(); ++i) index[m.classes[i]] = static_cast<int>(i);

    const std::size_t k = m.classes.size();
    m.confusion.assign(k, std::vector<long>(k, 0));
    long correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++m.confusion[index[truth[i]]][index[predicted[i]]];
        if (truth[i] == predicted[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < k; ++c) {
        long tp = m.confusion[c][c], row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += m.confusion[c][j];
            col += m.confusion[j][c];
        }
        if (row == 0) continue;  // class absent from the truth
        ++present;
        const double precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        const double recall = static_cast<double>(tp) / static_cast<double>(row);
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    m.macro_precision = precision_sum / static_cast<double>(present);
    m.macro_recall = recall_sum / static_cast<double>(present);
    m.macro_f1 = f1_sum / static_cast<double>(present);
    return m;
}

std::vector<EvalMetrics> cross_validate(const LabeledDataset& dataset,
                                        const TrainEvalFn& train_eval, int k,
                                        std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation: k must be >= 2");
    const std::vector<std::string> codes = dataset.class_codes();
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < codes.size(); ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < dataset.n_rows(); ++i)
            if (dataset.labels[i] == codes[c]) rows.push_back(i);
        if (rows.size() < static_cast<std::size_t>(k))
            throw ValidationError("cross-validation: class '" + codes[c] + "' has " +
                                  std::to_string(rows.size()) + " rows, needs >= " +
                                  std::to_string(k));
        Rng rng(Rng::derive(seed, {c}));
        rng.shuffle(rows);
        for (std::size_t r = 0; r < rows.size(); ++r)
            folds[r % static_cast<std::size_t>(k)].push_back(rows[r]);
    }

    std::vector<EvalMetrics> results;
    results.reserve(static_cast<std::size_t>(k));
    for (std::size_t f = 0; f < folds.size(); ++f) {
        LabeledDataset train, test;
        train.n_features = test.n_features = dataset.n_features;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            LabeledDataset& dst = g == f ? test : train;
            for (std::size_t i : folds[g]) dst.add_row(dataset.row(i), dataset.labels[i]);
        }
        results.push_back(train_eval(train, test));
    }
    return results;
}

}  // namespace linkfp
