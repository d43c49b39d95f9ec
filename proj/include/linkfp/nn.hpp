#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linkfp/dataset.hpp"
#include "linkfp/rng.hpp"

namespace linkfp {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct MlpParams {
    double lr = 0.001;
    int epochs = 1500;
    int hidden1 = 64;
    int hidden2 = 32;
};

struct Conv1dParams {
    double lr = 0.001;
    int epochs = 1500;
    int filters = 8;
    int kernel_width = 5;
    int hidden1 = 64;
    int hidden2 = 32;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;
};

namespace detail {

// Glorot-uniform fill in storage order so float/double nets draw the same
// stream positions.
template <typename Scalar>
void glorot_fill(MatX<Scalar>& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
}

template <typename Scalar>
void softmax_rows(MatX<Scalar>& z) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const Scalar peak = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - peak).exp();
        z.row(i) /= z.row(i).sum();
    }
}

template <typename Scalar>
Scalar cross_entropy(const MatX<Scalar>& probs, const std::vector<int>& y) {
    Scalar total = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        total -= std::log(std::max(probs(i, y[static_cast<std::size_t>(i)]),
                                   Scalar(1e-30)));
    return total / static_cast<Scalar>(probs.rows());
}

}  // namespace detail

// Three fully-connected layers (in -> h1 -> h2 -> k), ReLU hidden units,
// softmax output with cross-entropy loss.
template <typename Scalar>
struct MlpNet {
    MatX<Scalar> w1, w2, w3;
    VecX<Scalar> b1, b2, b3;

    void init(int in, int k, const MlpParams& params, std::uint64_t seed) {
        w1.resize(in, params.hidden1);
        w2.resize(params.hidden1, params.hidden2);
        w3.resize(params.hidden2, k);
        b1 = VecX<Scalar>::Zero(params.hidden1);
        b2 = VecX<Scalar>::Zero(params.hidden2);
        b3 = VecX<Scalar>::Zero(k);
        Rng rng(seed);
        detail::glorot_fill(w1, rng);
        detail::glorot_fill(w2, rng);
        detail::glorot_fill(w3, rng);
    }

    MatX<Scalar> forward(const MatX<Scalar>& x) const {
        MatX<Scalar> h1 = ((x * w1).rowwise() + b1.transpose()).cwiseMax(Scalar(0));
        MatX<Scalar> h2 = ((h1 * w2).rowwise() + b2.transpose()).cwiseMax(Scalar(0));
        MatX<Scalar> z = (h2 * w3).rowwise() + b3.transpose();
        detail::softmax_rows(z);
        return z;
    }

    Scalar loss(const MatX<Scalar>& x, const std::vector<int>& y) const {
        return detail::cross_entropy(forward(x), y);
    }

    Eigen::Index n_params() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
    }

    VecX<Scalar> get_params() const {
        VecX<Scalar> out(n_params());
        Eigen::Index at = 0;
        for (const auto* m : {&w1, &w2, &w3}) {
            out.segment(at, m->size()) = Eigen::Map<const VecX<Scalar>>(m->data(), m->size());
            at += m->size();
        }
        for (const auto* v : {&b1, &b2, &b3}) {
            out.segment(at, v->size()) = *v;
            at += v->size();
        }
        return out;
    }

    void set_params(const VecX<Scalar>& p) {
        Eigen::Index at = 0;
        for (auto* m : {&w1, &w2, &w3}) {
            Eigen::Map<VecX<Scalar>>(m->data(), m->size()) = p.segment(at, m->size());
            at += m->size();
        }
        for (auto* v : {&b1, &b2, &b3}) {
            *v = p.segment(at, v->size());
            at += v->size();
        }
    }

    // Full-batch loss and gradient (flattened in get_params() order).
    Scalar gradients(const MatX<Scalar>& x, const std::vector<int>& y,
                     VecX<Scalar>& grad) const {
        const Scalar n = static_cast<Scalar>(x.rows());
        MatX<Scalar> z1 = (x * w1).rowwise() + b1.transpose();
        MatX<Scalar> h1 = z1.cwiseMax(Scalar(0));
        MatX<Scalar> z2 = (h1 * w2).rowwise() + b2.transpose();
        MatX<Scalar> h2 = z2.cwiseMax(Scalar(0));
        MatX<Scalar> probs = (h2 * w3).rowwise() + b3.transpose();
        detail::softmax_rows(probs);
        const Scalar loss_value = detail::cross_entropy(probs, y);

        MatX<Scalar> dz3 = probs;
        for (Eigen::Index i = 0; i < dz3.rows(); ++i)
            dz3(i, y[static_cast<std::size_t>(i)]) -= Scalar(1);
        dz3 /= n;

        MatX<Scalar> dw3 = h2.transpose() * dz3;
        VecX<Scalar> db3 = dz3.colwise().sum();
        MatX<Scalar> dz2 =
            (dz3 * w3.transpose()).cwiseProduct((z2.array() > Scalar(0)).template cast<Scalar>().matrix());
        MatX<Scalar> dw2 = h1.transpose() * dz2;
        VecX<Scalar> db2 = dz2.colwise().sum();
        MatX<Scalar> dz1 =
            (dz2 * w2.transpose()).cwiseProduct((z1.array() > Scalar(0)).template cast<Scalar>().matrix());
        MatX<Scalar> dw1 = x.transpose() * dz1;
        VecX<Scalar> db1 = dz1.colwise().sum();

        grad.resize(n_params());
        Eigen::Index at = 0;
        for (const auto* m : {&dw1, &dw2, &dw3}) {
            grad.segment(at, m->size()) = Eigen::Map<const VecX<Scalar>>(m->data(), m->size());
            at += m->size();
        }
        for (const auto* v : {&db1, &db2, &db3}) {
            grad.segment(at, v->size()) = *v;
            at += v->size();
        }
        return loss_value;
    }
};

// One 1-D convolution layer (valid padding) -> per-filter batch norm -> ReLU
// -> the same three-layer fully-connected head as the MLP. Flattened feature
// order is channel-major: index = filter * conv_out + position.
template <typename Scalar>
struct Conv1dNet {
    int input_len = 0;
    int filters = 0;
    int kwidth = 0;
    int conv_out = 0;
    Scalar bn_eps = Scalar(1e-5);

    MatX<Scalar> wc;  // kwidth x filters
    VecX<Scalar> bc;
    VecX<Scalar> bn_gamma, bn_beta;
    VecX<Scalar> bn_run_mean, bn_run_var;
    MatX<Scalar> w1, w2, w3;
    VecX<Scalar> b1, b2, b3;

    void init(int in_len, int k, const Conv1dParams& params, std::uint64_t seed) {
        input_len = in_len;
        filters = params.filters;
        kwidth = params.kernel_width;
        conv_out = in_len - params.kernel_width + 1;
        bn_eps = static_cast<Scalar>(params.bn_eps);
        if (conv_out < 1)
            throw std::invalid_argument("conv1d: input shorter than kernel width");
        wc.resize(kwidth, filters);
        bc = VecX<Scalar>::Zero(filters);
        bn_gamma = VecX<Scalar>::Ones(filters);
        bn_beta = VecX<Scalar>::Zero(filters);
        bn_run_mean = VecX<Scalar>::Zero(filters);
        bn_run_var = VecX<Scalar>::Ones(filters);
        w1.resize(filters * conv_out, params.hidden1);
        w2.resize(params.hidden1, params.hidden2);
        w3.resize(params.hidden2, k);
        b1 = VecX<Scalar>::Zero(params.hidden1);
        b2 = VecX<Scalar>::Zero(params.hidden2);
        b3 = VecX<Scalar>::Zero(k);
        Rng rng(seed);
        detail::glorot_fill(wc, rng);
        detail::glorot_fill(w1, rng);
        detail::glorot_fill(w2, rng);
        detail::glorot_fill(w3, rng);
    }

    // (n * conv_out) x kwidth patch matrix; row r = sample(r / conv_out),
    // window starting at (r % conv_out).
    MatX<Scalar> im2col(const MatX<Scalar>& x) const {
        MatX<Scalar> cols(x.rows() * conv_out, kwidth);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (int p = 0; p < conv_out; ++p)
                for (int k = 0; k < kwidth; ++k)
                    cols(i * conv_out + p, k) = x(i, p + k);
        return cols;
    }

    // Pre-batch-norm conv activations, (n * conv_out) x filters.
    MatX<Scalar> conv_activations(const MatX<Scalar>& x) const {
        return (im2col(x) * wc).rowwise() + bc.transpose();
    }

    MatX<Scalar> forward(const MatX<Scalar>& x, bool training) const {
        MatX<Scalar> z0 = conv_activations(x);
        const Scalar m = static_cast<Scalar>(z0.rows());
        for (int f = 0; f < filters; ++f) {
            Scalar mean, var;
            if (training) {
                mean = z0.col(f).mean();
                var = (z0.col(f).array() - mean).square().sum() / m;
            } else {
                mean = bn_run_mean(f);
                var = bn_run_var(f);
            }
            z0.col(f) = bn_gamma(f) * (z0.col(f).array() - mean) /
                            std::sqrt(var + bn_eps) +
                        bn_beta(f);
        }
        z0 = z0.cwiseMax(Scalar(0));

        MatX<Scalar> flat(x.rows(), filters * conv_out);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (int f = 0; f < filters; ++f)
                for (int p = 0; p < conv_out; ++p)
                    flat(i, f * conv_out + p) = z0(i * conv_out + p, f);

        MatX<Scalar> h1 = ((flat * w1).rowwise() + b1.transpose()).cwiseMax(Scalar(0));
        MatX<Scalar> h2 = ((h1 * w2).rowwise() + b2.transpose()).cwiseMax(Scalar(0));
        MatX<Scalar> z = (h2 * w3).rowwise() + b3.transpose();
        detail::softmax_rows(z);
        return z;
    }

    Scalar loss(const MatX<Scalar>& x, const std::vector<int>& y, bool training) const {
        return detail::cross_entropy(forward(x, training), y);
    }

    Eigen::Index n_params() const {
        return wc.size() + bc.size() + bn_gamma.size() + bn_beta.size() + w1.size() +
               b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
    }

    VecX<Scalar> get_params() const {
        VecX<Scalar> out(n_params());
        Eigen::Index at = 0;
        for (const auto* m : {&wc, &w1, &w2, &w3}) {
            out.segment(at, m->size()) = Eigen::Map<const VecX<Scalar>>(m->data(), m->size());
            at += m->size();
        }
        for (const auto* v : {&bc, &bn_gamma, &bn_beta, &b1, &b2, &b3}) {
            out.segment(at, v->size()) = *v;
            at += v->size();
        }
        return out;
    }

    void set_params(const VecX<Scalar>& p) {
        Eigen::Index at = 0;
        for (auto* m : {&wc, &w1, &w2, &w3}) {
            Eigen::Map<VecX<Scalar>>(m->data(), m->size()) = p.segment(at, m->size());
            at += m->size();
        }
        for (auto* v : {&bc, &bn_gamma, &bn_beta, &b1, &b2, &b3}) {
            *v = p.segment(at, v->size());
            at += v->size();
        }
    }

    // Full-batch loss + gradient with batch-mode batch norm. Batch statistics
    // are written to batch_mean/batch_var so the trainer can maintain running
    // stats; this function itself mutates nothing.
    Scalar gradients(const MatX<Scalar>& x, const std::vector<int>& y, VecX<Scalar>& grad,
                     VecX<Scalar>& batch_mean, VecX<Scalar>& batch_var) const {
        const Eigen::Index n = x.rows();
        const MatX<Scalar> cols = im2col(x);
        MatX<Scalar> z0 = (cols * wc).rowwise() + bc.transpose();
        const Scalar m = static_cast<Scalar>(z0.rows());

        batch_mean.resize(filters);
        batch_var.resize(filters);
        MatX<Scalar> xhat(z0.rows(), filters);
        VecX<Scalar> inv_sigma(filters);
        for (int f = 0; f < filters; ++f) {
            batch_mean(f) = z0.col(f).mean();
            batch_var(f) = (z0.col(f).array() - batch_mean(f)).square().sum() / m;
            inv_sigma(f) = Scalar(1) / std::sqrt(batch_var(f) + bn_eps);
            xhat.col(f) = (z0.col(f).array() - batch_mean(f)) * inv_sigma(f);
        }
        MatX<Scalar> z1(z0.rows(), filters);
        for (int f = 0; f < filters; ++f)
            z1.col(f) = bn_gamma(f) * xhat.col(f).array() + bn_beta(f);
        MatX<Scalar> a1 = z1.cwiseMax(Scalar(0));

        MatX<Scalar> flat(n, filters * conv_out);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int f = 0; f < filters; ++f)
                for (int p = 0; p < conv_out; ++p)
                    flat(i, f * conv_out + p) = a1(i * conv_out + p, f);

        MatX<Scalar> zf1 = (flat * w1).rowwise() + b1.transpose();
        MatX<Scalar> h1 = zf1.cwiseMax(Scalar(0));
        MatX<Scalar> zf2 = (h1 * w2).rowwise() + b2.transpose();
        MatX<Scalar> h2 = zf2.cwiseMax(Scalar(0));
        MatX<Scalar> probs = (h2 * w3).rowwise() + b3.transpose();
        detail::softmax_rows(probs);
        const Scalar loss_value = detail::cross_entropy(probs, y);

        MatX<Scalar> dz3 = probs;
        for (Eigen::Index i = 0; i < n; ++i)
            dz3(i, y[static_cast<std::size_t>(i)]) -= Scalar(1);
        dz3 /= static_cast<Scalar>(n);

        MatX<Scalar> dw3 = h2.transpose() * dz3;
        VecX<Scalar> db3 = dz3.colwise().sum();
        MatX<Scalar> dzf2 =
            (dz3 * w3.transpose()).cwiseProduct((zf2.array() > Scalar(0)).template cast<Scalar>().matrix());
        MatX<Scalar> dw2 = h1.transpose() * dzf2;
        VecX<Scalar> db2 = dzf2.colwise().sum();
        MatX<Scalar> dzf1 =
            (dzf2 * w2.transpose()).cwiseProduct((zf1.array() > Scalar(0)).template cast<Scalar>().matrix());
        MatX<Scalar> dw1 = flat.transpose() * dzf1;
        VecX<Scalar> db1 = dzf1.colwise().sum();
        MatX<Scalar> dflat = dzf1 * w1.transpose();

        MatX<Scalar> da1(z0.rows(), filters);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int f = 0; f < filters; ++f)
                for (int p = 0; p < conv_out; ++p)
                    da1(i * conv_out + p, f) = dflat(i, f * conv_out + p);

        MatX<Scalar> dz1 =
            da1.cwiseProduct((z1.array() > Scalar(0)).template cast<Scalar>().matrix());

        VecX<Scalar> dgamma(filters), dbeta(filters);
        MatX<Scalar> dz0(z0.rows(), filters);
        for (int f = 0; f < filters; ++f) {
            dgamma(f) = dz1.col(f).cwiseProduct(xhat.col(f)).sum();
            dbeta(f) = dz1.col(f).sum();
            // d/dz0 of batch-mode normalization.
            const auto dxhat = (dz1.col(f) * bn_gamma(f)).eval();
            dz0.col(f) = (inv_sigma(f) / m) *
                         (m * dxhat.array() - dxhat.sum() -
                          xhat.col(f).array() * dxhat.cwiseProduct(xhat.col(f)).sum());
        }

        MatX<Scalar> dwc = cols.transpose() * dz0;
        VecX<Scalar> dbc = dz0.colwise().sum();

        grad.resize(n_params());
        Eigen::Index at = 0;
        for (const auto* g : {&dwc, &dw1, &dw2, &dw3}) {
            grad.segment(at, g->size()) = Eigen::Map<const VecX<Scalar>>(g->data(), g->size());
            at += g->size();
        }
        for (const auto* v : {&dbc, &dgamma, &dbeta, &db1, &db2, &db3}) {
            grad.segment(at, v->size()) = *v;
            at += v->size();
        }
        return loss_value;
    }
};

class MlpModel {
public:
    std::vector<std::string> classes;
    MlpParams params;
    std::size_t n_features = 0;
    MlpNet<double> net;
    std::vector<double> loss_history;

    std::string predict(std::span<const double> row) const;
    std::vector<std::string> predict_batch(const LabeledDataset& dataset) const;
};

class Conv1dModel {
public:
    std::vector<std::string> classes;
    Conv1dParams params;
    std::size_t n_features = 0;
    Conv1dNet<double> net;
    std::vector<double> loss_history;

    std::string predict(std::span<const double> row) const;
    std::vector<std::string> predict_batch(const LabeledDataset& dataset) const;
};

// Full-batch plain gradient descent for `epochs` epochs. Requires features
// in [0, 1] and at least two classes; throws ConvergenceError naming the
// epoch if the loss turns non-finite.
MlpModel train_mlp(const LabeledDataset& train, const MlpParams& params, std::uint64_t seed);

// Full-batch Adam with batch-norm statistics maintained per epoch.
Conv1dModel train_conv1d(const LabeledDataset& train, const Conv1dParams& params,
                         std::uint64_t seed);

}  // namespace linkfp
