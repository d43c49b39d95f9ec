#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linkfp/dataset.hpp"

namespace linkfp {

struct SvmParams {
    double C = 1.0;
    double gamma = 0.0;  // 0 = "scale": 1 / (n_features * var(features))
    double tol = 1e-3;
    long max_iter = 100000;  // optimization passes per binary machine
};

// One trained binary machine of the one-vs-one ensemble: decision value
// sum_i coef_i * K(sv_i, x) + bias, positive means the lower-index class.
struct BinarySvm {
    int class_pos = 0;  // lower class index
    int class_neg = 0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coef;  // alpha_i * y_i, |coef| <= C
    double bias = 0.0;
    double kkt_residual = 0.0;

    double decision(std::span<const double> row, double gamma) const;
};

class SvmModel {
public:
    std::vector<std::string> classes;
    SvmParams params;
    double gamma = 0.0;  // resolved value actually used
    std::size_t n_features = 0;
    std::vector<BinarySvm> machines;  // all pairs (i, j), i < j

    // Pairwise voting; ties resolve to the lowest class index.
    std::string predict(std::span<const double> row) const;
    std::vector<std::string> predict_batch(const LabeledDataset& dataset) const;

    double max_kkt_residual() const;
};

// RBF-kernel C-SVM, one machine per class pair, each solved by sequential
// optimization on the maximal-violating pair until the KKT violation drops
// below tol. Throws ConvergenceError (reporting the residual) if a machine
// exhausts max_iter.
SvmModel train_svm(const LabeledDataset& train, const SvmParams& params);

}  // namespace linkfp
