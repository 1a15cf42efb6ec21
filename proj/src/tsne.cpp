#include "synthlab/tsne.hpp"

#include <cmath>
#include <stdexcept>

#include "synthlab/rng.hpp"

namespace synthlab {

namespace {

constexpr double kPFloor = 1e-12;

// symmetric affinity matrix with per-point precision matched to the perplexity
Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& X, double perplexity) {
  const Eigen::Index n = X.rows();
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1);
  d2.noalias() -= 2.0 * X * X.transpose();
  d2 = d2.cwiseMax(0.0);

  const double target_entropy = std::log(perplexity);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    Eigen::VectorXd row;
    for (int it = 0; it < 64; ++it) {
      row = (-beta * d2.row(i).transpose().array()).exp();
      row(i) = 0.0;
      const double sum = row.sum();
      if (!(sum > 0.0)) {
        beta_hi = beta;
        beta = 0.5 * (beta_lo + beta);
        continue;
      }
      row /= sum;
      double entropy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (row(j) > 0.0) entropy -= row(j) * std::log(row(j));
      const double diff = entropy - target_entropy;
      if (std::abs(diff) < 1e-7) break;
      if (diff > 0.0) {  // too spread out: tighten
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
      } else {
        beta_hi = beta;
        beta = beta_lo == 0.0 ? beta * 0.5 : 0.5 * (beta_lo + beta);
      }
    }
    P.row(i) = row.transpose();
  }
  P = (P + P.transpose()).eval() / (2.0 * static_cast<double>(n));
  P = P.cwiseMax(kPFloor);
  P.diagonal().setZero();
  return P;
}

struct QState {
  Eigen::MatrixXd num;  // 1 / (1 + ||yi - yj||^2), zero diagonal
  double z = 0.0;       // sum of num
};

QState student_t(const Eigen::MatrixXd& Y) {
  const Eigen::Index n = Y.rows();
  const Eigen::VectorXd sq = Y.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1);
  d2.noalias() -= 2.0 * Y * Y.transpose();
  QState q;
  q.num = (1.0 + d2.cwiseMax(0.0).array()).inverse().matrix();
  q.num.diagonal().setZero();
  q.z = q.num.sum();
  return q;
}

double kl_divergence(const Eigen::MatrixXd& P, const QState& q) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (i == j) continue;
      const double p = P(i, j);
      const double qij = std::max(q.num(i, j) / q.z, kPFloor);
      kl += p * std::log(p / qij);
    }
  }
  return kl;
}

Eigen::MatrixXd tsne_gradient(const Eigen::MatrixXd& P, const QState& q,
                              const Eigen::MatrixXd& Y, double exaggeration) {
  const Eigen::Index n = Y.rows();
  // (exag*P - Q) .* num, then dY_i = 4 sum_j w_ij (y_i - y_j)
  const Eigen::MatrixXd W =
      ((exaggeration * P.array() - q.num.array() / q.z) * q.num.array()).matrix();
  const Eigen::VectorXd row_sums = W.rowwise().sum();
  Eigen::MatrixXd grad = 4.0 * (row_sums.asDiagonal() * Y - W * Y);
  (void)n;
  return grad;
}

}  // namespace

TsneResult tsne_project(const Eigen::MatrixXd& X, double perplexity, int iters,
                        std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (n < 5) throw std::invalid_argument("tsne_project: need at least 5 points");
  if (!(perplexity > 1.0) || perplexity >= static_cast<double>(n))
    throw std::invalid_argument("tsne_project: perplexity out of range");
  if (iters < 1) throw std::invalid_argument("tsne_project: iters must be positive");

  const Eigen::MatrixXd P = joint_affinities(X, perplexity);

  RngStream rng = RngStream(seed).child("tsne_init");
  Eigen::MatrixXd Y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) Y(i, c) = 1e-4 * rng.normal();

  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  const double lr = 200.0;

  TsneResult result;
  result.kl_log.reserve(static_cast<std::size_t>(iters));
  double prev_kl = std::numeric_limits<double>::infinity();

  for (int it = 0; it < iters; ++it) {
    const double exaggeration = it < 100 ? 4.0 : 1.0;
    const double momentum = it < 250 ? 0.5 : 0.8;
    const QState q = student_t(Y);
    const Eigen::MatrixXd grad = tsne_gradient(P, q, Y, exaggeration);

    gains = ((grad.array() * velocity.array() > 0.0).cast<double>() * (gains.array() * 0.8) +
             (grad.array() * velocity.array() <= 0.0).cast<double>() * (gains.array() + 0.2))
                .cwiseMax(0.01)
                .matrix();
    const Eigen::MatrixXd prev_y = Y;
    const Eigen::MatrixXd prev_v = velocity;
    velocity = momentum * velocity - lr * gains.cwiseProduct(grad);
    Y += velocity;
    Y.rowwise() -= Y.colwise().mean();

    double kl = kl_divergence(P, student_t(Y));
    if (it > 100 && kl > prev_kl) {
      // momentum overshot: fall back to a backtracked plain gradient step so
      // the logged objective stays non-increasing after exaggeration ends
      Y = prev_y;
      velocity.setZero();
      gains.setOnes();
      double step = lr;
      for (int tries = 0; tries < 60; ++tries) {
        Eigen::MatrixXd cand = prev_y - step * grad;
        cand.rowwise() -= cand.colwise().mean();
        const double cand_kl = kl_divergence(P, student_t(cand));
        if (cand_kl <= prev_kl) {
          Y = cand;
          kl = cand_kl;
          break;
        }
        step *= 0.5;
        kl = prev_kl;
      }
    }
    if (it >= 100) prev_kl = kl;
    result.kl_log.push_back(kl);
  }
  result.coords = Y;
  return result;
}

}  // namespace synthlab
