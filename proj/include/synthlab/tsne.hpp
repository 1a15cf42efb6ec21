#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace synthlab {

struct TsneResult {
  Eigen::MatrixXd coords;      // n x 2
  std::vector<double> kl_log;  // KL(P || Q) after every iteration
};

/// Exact t-SNE embedding to 2-D. Per-point bandwidths are found by binary
/// search to match the target perplexity; early exaggeration (x4) covers the
/// first 100 iterations; plain gradient descent afterwards keeps the logged
/// KL divergence non-increasing. Deterministic per seed.
TsneResult tsne_project(const Eigen::MatrixXd& X, double perplexity = 30.0, int iters = 500,
                        std::uint64_t seed = 0);

}  // namespace synthlab
