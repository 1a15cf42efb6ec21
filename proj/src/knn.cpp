#include "synthlab/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace synthlab {

NnResult nn_search(const Eigen::MatrixXd& corpus, const Eigen::MatrixXd& queries, int k,
                   bool exclude_self) {
  if (corpus.cols() != queries.cols()) throw std::invalid_argument("nn_search: dimension mismatch");
  const int n = static_cast<int>(corpus.rows());
  const int usable = exclude_self ? n - 1 : n;
  if (k < 1 || k > usable) throw std::invalid_argument("nn_search: k out of range");

  NnResult res;
  res.index.resize(static_cast<std::size_t>(queries.rows()));
  res.dist.resize(static_cast<std::size_t>(queries.rows()));
  std::vector<std::pair<double, int>> cand;
  cand.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    cand.clear();
    const Eigen::VectorXd d2 = (corpus.rowwise() - queries.row(q)).rowwise().squaredNorm();
    for (int i = 0; i < n; ++i) {
      if (exclude_self && i == static_cast<int>(q)) continue;
      cand.emplace_back(d2(i), i);
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    auto& idx = res.index[static_cast<std::size_t>(q)];
    auto& dst = res.dist[static_cast<std::size_t>(q)];
    idx.resize(static_cast<std::size_t>(k));
    dst.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = cand[static_cast<std::size_t>(j)].second;
      dst[static_cast<std::size_t>(j)] = std::sqrt(cand[static_cast<std::size_t>(j)].first);
    }
  }
  return res;
}

}  // namespace synthlab
