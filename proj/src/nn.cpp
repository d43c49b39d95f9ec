#include "linkfp/nn.hpp"

#include <cmath>

#include "linkfp/errors.hpp"

namespace linkfp {

namespace {

// Training runs in single precision for speed (the fully-connected products
// dominate); trained weights are widened to double for storage and
// prediction, which is exact.
using TrainScalar = float;

struct Encoded {
    MatX<TrainScalar> x;
    std::vector<int> y;
    std::vector<std::string> classes;
};

Encoded encode(const LabeledDataset& train) {
    if (train.n_rows() == 0) throw ValidationError("nn: empty training data");
    Encoded out;
    out.classes = train.class_codes();
    if (out.classes.size() < 2)
        throw ValidationError("nn: degenerate training data (single class)");
    const auto index = train.class_index();
    out.x.resize(static_cast<Eigen::Index>(train.n_rows()),
                 static_cast<Eigen::Index>(train.n_features));
    out.y.resize(train.n_rows());
    for (std::size_t i = 0; i < train.n_rows(); ++i) {
        const auto row = train.row(i);
        for (std::size_t f = 0; f < train.n_features; ++f) {
            if (!(row[f] >= -1e-9 && row[f] <= 1.0 + 1e-9))
                throw ValidationError("nn: feature outside [0, 1]; normalize first");
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
                static_cast<TrainScalar>(row[f]);
        }
        out.y[i] = index.at(train.labels[i]);
    }
    return out;
}

template <typename Scalar>
void widen(const MlpNet<Scalar>& src, MlpNet<double>& dst) {
    dst.w1 = src.w1.template cast<double>();
    dst.w2 = src.w2.template cast<double>();
    dst.w3 = src.w3.template cast<double>();
    dst.b1 = src.b1.template cast<double>();
    dst.b2 = src.b2.template cast<double>();
    dst.b3 = src.b3.template cast<double>();
}

template <typename Scalar>
void widen(const Conv1dNet<Scalar>& src, Conv1dNet<double>& dst) {
    dst.input_len = src.input_len;
    dst.filters = src.filters;
    dst.kwidth = src.kwidth;
    dst.conv_out = src.conv_out;
    dst.bn_eps = static_cast<double>(src.bn_eps);
    dst.wc = src.wc.template cast<double>();
    dst.bc = src.bc.template cast<double>();
    dst.bn_gamma = src.bn_gamma.template cast<double>();
    dst.bn_beta = src.bn_beta.template cast<double>();
    dst.bn_run_mean = src.bn_run_mean.template cast<double>();
    dst.bn_run_var = src.bn_run_var.template cast<double>();
    dst.w1 = src.w1.template cast<double>();
    dst.w2 = src.w2.template cast<double>();
    dst.w3 = src.w3.template cast<double>();
    dst.b1 = src.b1.template cast<double>();
    dst.b2 = src.b2.template cast<double>();
    dst.b3 = src.b3.template cast<double>();
}

int argmax_row(const MatX<double>& probs) {
    int best = 0;
    for (Eigen::Index j = 1; j < probs.cols(); ++j)
        if (probs(0, j) > probs(0, best)) best = static_cast<int>(j);
    return best;
}

}  // namespace

std::string MlpModel::predict(std::span<const double> row) const {
    if (row.size() != n_features)
        throw ValidationError("mlp: row width " + std::to_string(row.size()) +
                              " != " + std::to_string(n_features));
    MatX<double> x(1, static_cast<Eigen::Index>(row.size()));
    for (std::size_t f = 0; f < row.size(); ++f) x(0, static_cast<Eigen::Index>(f)) = row[f];
    return classes[static_cast<std::size_t>(argmax_row(net.forward(x)))];
}

std::vector<std::string> MlpModel::predict_batch(const LabeledDataset& dataset) const {
    std::vector<std::string> out;
    out.reserve(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) out.push_back(predict(dataset.row(i)));
    return out;
}

std::string Conv1dModel::predict(std::span<const double> row) const {
    if (row.size() != n_features)
        throw ValidationError("conv1d: row width " + std::to_string(row.size()) +
                              " != " + std::to_string(n_features));
    MatX<double> x(1, static_cast<Eigen::Index>(row.size()));
    for (std::size_t f = 0; f < row.size(); ++f) x(0, static_cast<Eigen::Index>(f)) = row[f];
    return classes[static_cast<std::size_t>(argmax_row(net.forward(x, /*training=*/false)))];
}

std::vector<std::string> Conv1dModel::predict_batch(const LabeledDataset& dataset) const {
    std::vector<std::string> out;
    out.reserve(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) out.push_back(predict(dataset.row(i)));
    return out;
}

MlpModel train_mlp(const LabeledDataset& train, const MlpParams& params, std::uint64_t seed) {
    const Encoded data = encode(train);
    MlpNet<TrainScalar> net;
    net.init(static_cast<int>(train.n_features), static_cast<int>(data.classes.size()), params,
             seed);

    MlpModel model;
    model.classes = data.classes;
    model.params = params;
    model.n_features = train.n_features;
    model.loss_history.reserve(static_cast<std::size_t>(params.epochs));

    const TrainScalar lr = static_cast<TrainScalar>(params.lr);
    VecX<TrainScalar> grad;
    VecX<TrainScalar> p = net.get_params();
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const TrainScalar loss = net.gradients(data.x, data.y, grad);
        if (!std::isfinite(static_cast<double>(loss)))
            throw ConvergenceError("mlp: loss diverged at epoch " + std::to_string(epoch));
        p -= lr * grad;
        net.set_params(p);
        model.loss_history.push_back(static_cast<double>(loss));
    }
    widen(net, model.net);
    return model;
}

Conv1dModel train_conv1d(const LabeledDataset& train, const Conv1dParams& params,
                         std::uint64_t seed) {
    const Encoded data = encode(train);
    Conv1dNet<TrainScalar> net;
    net.init(static_cast<int>(train.n_features), static_cast<int>(data.classes.size()), params,
             seed);

    Conv1dModel model;
    model.classes = data.classes;
    model.params = params;
    model.n_features = train.n_features;
    model.loss_history.reserve(static_cast<std::size_t>(params.epochs));

    const TrainScalar lr = static_cast<TrainScalar>(params.lr);
    const TrainScalar beta1 = static_cast<TrainScalar>(params.adam_beta1);
    const TrainScalar beta2 = static_cast<TrainScalar>(params.adam_beta2);
    const TrainScalar eps = static_cast<TrainScalar>(params.adam_eps);
    const TrainScalar momentum = static_cast<TrainScalar>(params.bn_momentum);

    VecX<TrainScalar> p = net.get_params();
    VecX<TrainScalar> m = VecX<TrainScalar>::Zero(p.size());
    VecX<TrainScalar> v = VecX<TrainScalar>::Zero(p.size());
    VecX<TrainScalar> grad, batch_mean, batch_var;
    const TrainScalar count = static_cast<TrainScalar>(train.n_rows() * net.conv_out);

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const TrainScalar loss = net.gradients(data.x, data.y, grad, batch_mean, batch_var);
        if (!std::isfinite(static_cast<double>(loss)))
            throw ConvergenceError("conv1d: loss diverged at epoch " + std::to_string(epoch));

        m = beta1 * m + (TrainScalar(1) - beta1) * grad;
        v = beta2 * v + (TrainScalar(1) - beta2) * grad.cwiseProduct(grad);
        const TrainScalar t = static_cast<TrainScalar>(epoch + 1);
        const TrainScalar corr1 = TrainScalar(1) - std::pow(beta1, t);
        const TrainScalar corr2 = TrainScalar(1) - std::pow(beta2, t);
        p -= (lr / corr1) * m.cwiseQuotient(((v / corr2).cwiseSqrt().array() + eps).matrix());
        net.set_params(p);

        // Running statistics use the unbiased batch variance.
        const TrainScalar unbias = count > 1 ? count / (count - 1) : TrainScalar(1);
        net.bn_run_mean = (TrainScalar(1) - momentum) * net.bn_run_mean + momentum * batch_mean;
        net.bn_run_var =
            (TrainScalar(1) - momentum) * net.bn_run_var + momentum * unbias * batch_var;
        model.loss_history.push_back(static_cast<double>(loss));
    }
    widen(net, model.net);
    return model;
}

}  // namespace linkfp
