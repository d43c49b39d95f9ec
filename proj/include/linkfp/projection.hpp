#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "linkfp/dataset.hpp"

namespace linkfp {

enum class ProjectionMethod { Pca, Tsne };

struct TsneParams {
    double perplexity = 30.0;
    int iters = 1000;
    double lr = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
};

// 2-D embedding of the feature rows. PCA projects onto the top two principal
// components of the centered data (rank-deficient data falls back to the
// available rank with a warning). t-SNE runs the exact O(n^2) gradient on the
// KL divergence between Gaussian input affinities and Student-t embedding
// affinities. Both are deterministic given the seed.
std::vector<std::array<double, 2>> project_2d(const LabeledDataset& dataset,
                                              ProjectionMethod method,
                                              const TsneParams& params, std::uint64_t seed);

}  // namespace linkfp
