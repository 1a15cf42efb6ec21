#pragma once

#include <vector>

#include <Eigen/Dense>

namespace synthlab {

struct NnResult {
  std::vector<std::vector<int>> index;   // per query, ascending distance
  std::vector<std::vector<double>> dist;  // Euclidean
};

/// Exact k-nearest-neighbor search by full scan; ties broken by lower corpus
/// index. With `exclude_self`, corpus row i is skipped for query i (corpus and
/// queries must then be the same matrix).
NnResult nn_search(const Eigen::MatrixXd& corpus, const Eigen::MatrixXd& queries, int k,
                   bool exclude_self = false);

}  // namespace synthlab
