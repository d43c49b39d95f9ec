#include "linkfp/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "linkfp/errors.hpp"

namespace linkfp {

namespace {

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        dist_sq += d * d;
    }
    return std::exp(-gamma * dist_sq);
}

// Dual solver for min 1/2 a^T Q a - e^T a, 0 <= a <= C, y^T a = 0 with
// Q_ij = y_i y_j K_ij. Working set: the maximal violating pair.
struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    double residual = 0.0;
};

SmoResult solve_smo(const std::vector<std::span<const double>>& rows,
                    const std::vector<double>& y, double C, double gamma, double tol,
                    long max_iter) {
    const std::size_t n = rows.size();
    constexpr double kTau = 1e-12;

    // Cache the kernel matrix; pair subproblems are small (tens of rows).
    std::vector<double> kernel(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            kernel[i * n + j] = kernel[j * n + i] = rbf(rows[i], rows[j], gamma);
    const auto q = [&](std::size_t i, std::size_t j) {
        return y[i] * y[j] * kernel[i * n + j];
    };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    double residual = std::numeric_limits<double>::infinity();
    for (long iter = 0;; ++iter) {
        // Maximal violating pair over I_up / I_low.
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t i_up = n, i_low = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
            if (in_up && v > m_up) {
                m_up = v;
                i_up = t;
            }
            if (in_low && v < m_low) {
                m_low = v;
                i_low = t;
            }
        }
        residual = m_up - m_low;
        if (i_up == n || i_low == n || residual < tol) break;
        if (iter >= max_iter)
            throw ConvergenceError("svm: optimization exceeded " + std::to_string(max_iter) +
                                   " passes, KKT residual " + std::to_string(residual));

        const std::size_t i = i_up, j = i_low;
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0 && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if (diff <= 0.0 && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0 && alpha[i] > C) {
                alpha[i] = C;
                alpha[j] = C - diff;
            } else if (diff <= 0.0 && alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C && alpha[i] > C) {
                alpha[i] = C;
                alpha[j] = sum - C;
            } else if (sum <= C && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C && alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = sum - C;
            } else if (sum <= C && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double d_ai = alpha[i] - old_ai;
        const double d_aj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * d_ai + q(j, t) * d_aj;
    }

    // Bias from free support vectors, else the midpoint of the bounds.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C) {
            free_sum += -y[t] * grad[t];
            ++free_count;
        }
    }
    SmoResult result;
    result.alpha = std::move(alpha);
    result.residual = std::max(residual, 0.0);
    if (free_count > 0) {
        result.bias = free_sum / static_cast<double>(free_count);
    } else {
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if ((y[t] > 0 && result.alpha[t] < C) || (y[t] < 0 && result.alpha[t] > 0))
                m_up = std::max(m_up, v);
            if ((y[t] > 0 && result.alpha[t] > 0) || (y[t] < 0 && result.alpha[t] < C))
                m_low = std::min(m_low, v);
        }
        result.bias = (m_up + m_low) / 2.0;
    }
    return result;
}

}  // namespace

double BinarySvm::decision(std::span<const double> row, double gamma) const {
    double value = bias;
    for (std::size_t s = 0; s < support_vectors.size(); ++s)
        value += dual_coef[s] * rbf(support_vectors[s], row, gamma);
    return value;
}

std::string SvmModel::predict(std::span<const double> row) const {
    if (row.size() != n_features)
        throw ValidationError("svm: row width " + std::to_string(row.size()) +
                              " != " + std::to_string(n_features));
    std::vector<int> votes(classes.size(), 0);
    for (const BinarySvm& machine : machines) {
        const double value = machine.decision(row, gamma);
        ++votes[static_cast<std::size_t>(value > 0.0 ? machine.class_pos : machine.class_neg)];
    }
    const std::size_t winner =
        static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    return classes[winner];
}

std::vector<std::string> SvmModel::predict_batch(const LabeledDataset& dataset) const {
    std::vector<std::string> out;
    out.reserve(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) out.push_back(predict(dataset.row(i)));
    return out;
}

double SvmModel::max_kkt_residual() const {
    double worst = 0.0;
    for (const BinarySvm& m : machines) worst = std::max(worst, m.kkt_residual);
    return worst;
}

SvmModel train_svm(const LabeledDataset& train, const SvmParams& params) {
    if (train.n_rows() == 0) throw ValidationError("svm: empty training data");
    SvmModel model;
    model.classes = train.class_codes();
    model.params = params;
    model.n_features = train.n_features;
    if (model.classes.size() < 2)
        throw ValidationError("svm: degenerate training data (single class)");

    if (params.gamma > 0.0) {
        model.gamma = params.gamma;
    } else {
        double mean = 0.0;
        for (double v : train.values) mean += v;
        mean /= static_cast<double>(train.values.size());
        double var = 0.0;
        for (double v : train.values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(train.values.size());
        model.gamma = var > 0.0 ? 1.0 / (static_cast<double>(train.n_features) * var) : 1.0;
    }

    const std::map<std::string, int> index = train.class_index();
    const std::size_t k = model.classes.size();
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<std::span<const double>> rows;
            std::vector<double> y;
            for (std::size_t i = 0; i < train.n_rows(); ++i) {
                const int c = index.at(train.labels[i]);
                if (c == static_cast<int>(a)) {
                    rows.push_back(train.row(i));
                    y.push_back(1.0);
                } else if (c == static_cast<int>(b)) {
                    rows.push_back(train.row(i));
                    y.push_back(-1.0);
                }
            }
            const SmoResult solved =
                solve_smo(rows, y, params.C, model.gamma, params.tol, params.max_iter);

            BinarySvm machine;
            machine.class_pos = static_cast<int>(a);
            machine.class_neg = static_cast<int>(b);
            machine.kkt_residual = solved.residual;
            machine.bias = solved.bias;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (solved.alpha[i] > 0.0) {
                    machine.support_vectors.emplace_back(rows[i].begin(), rows[i].end());
                    machine.dual_coef.push_back(solved.alpha[i] * y[i]);
                }
            }
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

}  // namespace linkfp
