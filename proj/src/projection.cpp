#include "linkfp/projection.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>

#include "linkfp/errors.hpp"
#include "linkfp/rng.hpp"

namespace linkfp {

namespace {

Eigen::MatrixXd to_matrix(const LabeledDataset& dataset) {
    Eigen::MatrixXd x(dataset.n_rows(), dataset.n_features);
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        const auto row = dataset.row(i);
        for (std::size_t f = 0; f < dataset.n_features; ++f)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = row[f];
    }
    return x;
}

std::vector<std::array<double, 2>> pca_2d(const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(x.rows() - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw InternalError("pca: eigendecomposition failed");

    // Eigen orders eigenvalues ascending; the top two sit at the end.
    const Eigen::Index d = cov.rows();
    const double scale = std::max(solver.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    Eigen::MatrixXd components = Eigen::MatrixXd::Zero(d, 2);
    int rank = 0;
    for (int c = 0; c < 2 && c < d; ++c) {
        const Eigen::Index idx = d - 1 - c;
        if (solver.eigenvalues()(idx) > 1e-12 * scale) {
            components.col(c) = solver.eigenvectors().col(idx);
            ++rank;
        }
    }
    if (rank < 2)
        std::cerr << "warning: pca: degenerate covariance, embedding has rank " << rank << "\n";
    // Deterministic sign: largest-magnitude loading positive.
    for (int c = 0; c < 2; ++c) {
        Eigen::Index at = 0;
        components.col(c).cwiseAbs().maxCoeff(&at);
        if (components(at, c) < 0.0) components.col(c) = -components.col(c);
    }

    const Eigen::MatrixXd y = centered * components;
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = {y(i, 0), y(i, 1)};
    return out;
}

// Row conditional affinities at the precision that hits log(perplexity)
// entropy, found by bisection on beta = 1 / (2 sigma^2).
void gaussian_affinities(const Eigen::MatrixXd& dist_sq, double perplexity,
                         Eigen::MatrixXd& p) {
    const Eigen::Index n = dist_sq.rows();
    const double target_entropy = std::log(perplexity);
    p.setZero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0, beta_lo = -1.0, beta_hi = -1.0;
        Eigen::VectorXd row;
        for (int pass = 0; pass < 64; ++pass) {
            row = (-beta * dist_sq.row(i)).array().exp();
            row(i) = 0.0;
            const double sum = std::max(row.sum(), 1e-300);
            const double entropy = std::log(sum) + beta * dist_sq.row(i).dot(row) / sum;
            row /= sum;
            const double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-7) break;
            if (diff > 0.0) {  // entropy too high -> sharpen
                beta_lo = beta;
                beta = beta_hi < 0.0 ? beta * 2.0 : (beta + beta_hi) / 2.0;
            } else {
                beta_hi = beta;
                beta = beta_lo < 0.0 ? beta / 2.0 : (beta + beta_lo) / 2.0;
            }
        }
        p.row(i) = row;
    }
}

std::vector<std::array<double, 2>> tsne_2d(const Eigen::MatrixXd& x, const TsneParams& params,
                                           std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    if (!(params.perplexity > 0.0 &&
          params.perplexity < static_cast<double>(n - 1) / 3.0))
        throw ValidationError("tsne: perplexity must be in (0, (n-1)/3)");

    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd dist_sq =
        (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * x * x.transpose())
            .cwiseMax(0.0);

    Eigen::MatrixXd p;
    gaussian_affinities(dist_sq, params.perplexity, p);
    p = (p + p.transpose()).eval() / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);

    Rng rng(seed);
    Eigen::MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) y(i, c) = 1e-4 * rng.gaussian();

    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd grad(n, 2), q_num(n, n);
    for (int iter = 0; iter < params.iters; ++iter) {
        const double exaggeration =
            iter < params.exaggeration_iters ? params.early_exaggeration : 1.0;
        const double momentum = iter < params.exaggeration_iters ? 0.5 : 0.8;

        const Eigen::VectorXd ysq = y.rowwise().squaredNorm();
        q_num = (1.0 + (ysq.replicate(1, n) + ysq.transpose().replicate(n, 1) -
                        2.0 * y * y.transpose())
                           .cwiseMax(0.0)
                           .array())
                    .inverse()
                    .matrix();
        q_num.diagonal().setZero();
        const double z = std::max(q_num.sum(), 1e-300);

        for (Eigen::Index i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double q = std::max(q_num(i, j) / z, 1e-12);
                const double coeff = (exaggeration * p(i, j) - q) * q_num(i, j);
                gx += coeff * (y(i, 0) - y(j, 0));
                gy += coeff * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4.0 * gx;
            grad(i, 1) = 4.0 * gy;
        }
        velocity = momentum * velocity - params.lr * grad;
        y += velocity;
        y.rowwise() -= y.colwise().mean();
    }

    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {y(i, 0), y(i, 1)};
    return out;
}

}  // namespace

std::vector<std::array<double, 2>> project_2d(const LabeledDataset& dataset,
                                              ProjectionMethod method,
                                              const TsneParams& params, std::uint64_t seed) {
    if (dataset.n_rows() < 3) throw ValidationError("project: need at least 3 rows");
    const Eigen::MatrixXd x = to_matrix(dataset);
    return method == ProjectionMethod::Pca ? pca_2d(x) : tsne_2d(x, params, seed);
}

}  // namespace linkfp
