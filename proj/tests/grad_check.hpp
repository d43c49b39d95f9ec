#pragma once

// Central finite-difference gradient checks for the double-precision network
// cores. Returns the worst per-component relative error; the loss used for
// differencing is the same batch-mode loss the analytic path reports.

#include <vector>

#include "linkfp/nn.hpp"
#include "linkfp/rng.hpp"

namespace gradcheck {

template <typename Net, typename LossFn, typename GradFn>
double worst_relative_error(Net& net, const LossFn& loss_at, const GradFn& analytic_grad,
                            double h = 1e-6) {
    linkfp::VecX<double> theta = net.get_params();
    linkfp::VecX<double> grad;
    analytic_grad(grad);

    double worst = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double saved = theta(k);
        theta(k) = saved + h;
        net.set_params(theta);
        const double up = loss_at();
        theta(k) = saved - h;
        net.set_params(theta);
        const double down = loss_at();
        theta(k) = saved;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(fd - grad(k)) / std::max(std::abs(fd) + std::abs(grad(k)), 1e-8);
        worst = std::max(worst, rel);
    }
    net.set_params(theta);
    return worst;
}

inline double check_mlp(int in, int k, int n_samples, std::uint64_t seed) {
    linkfp::MlpParams params;
    params.hidden1 = 8;
    params.hidden2 = 6;
    linkfp::MlpNet<double> net;
    net.init(in, k, params, seed);

    linkfp::Rng rng(seed + 1);
    linkfp::MatX<double> x(n_samples, in);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    std::vector<int> y(static_cast<std::size_t>(n_samples));
    for (auto& label : y) label = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));

    return worst_relative_error(
        net, [&] { return net.loss(x, y); },
        [&](linkfp::VecX<double>& g) { net.gradients(x, y, g); });
}

inline double check_conv1d(int len, int k, int n_samples, std::uint64_t seed) {
    linkfp::Conv1dParams params;
    params.filters = 4;
    params.kernel_width = 5;
    params.hidden1 = 8;
    params.hidden2 = 6;
    linkfp::Conv1dNet<double> net;
    net.init(len, k, params, seed);

    linkfp::Rng rng(seed + 1);
    linkfp::MatX<double> x(n_samples, len);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    std::vector<int> y(static_cast<std::size_t>(n_samples));
    for (auto& label : y) label = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));

    linkfp::VecX<double> mean, var;
    return worst_relative_error(
        net, [&] { return net.loss(x, y, /*training=*/true); },
        [&](linkfp::VecX<double>& g) { net.gradients(x, y, g, mean, var); });
}

}  // namespace gradcheck
