#include "synthlab/gmm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace synthlab {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)

// per-component log densities for one point
Eigen::VectorXd component_logpdf(const GmmModel& m, const Eigen::RowVectorXd& x) {
  const int k = m.components();
  Eigen::VectorXd out(k);
  for (int c = 0; c < k; ++c) {
    double s = 0.0;
    for (int j = 0; j < m.dim(); ++j) {
      const double var = m.vars(c, j);
      const double diff = x(j) - m.means(c, j);
      s += -0.5 * (kLog2Pi + std::log(var) + diff * diff / var);
    }
    out(c) = s;
  }
  return out;
}

double logsumexp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// k-means++ seeding
Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& X, int k, RngStream& rng) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd centers(k, X.cols());
  centers.row(0) = X.row(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::size_t>(n))));
  Eigen::VectorXd d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2(i);
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::size_t>(n)));
    }
    centers.row(c) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

GmmModel gmm_fit(const Eigen::MatrixXd& X, int k, RngStream rng, int max_iter, double tol,
                 std::vector<double>* ll_trace) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (k < 1 || n < k) throw std::invalid_argument("gmm_fit: need n >= k >= 1");

  GmmModel m;
  m.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  m.means = n == k ? X : kmeanspp_init(X, k, rng);
  const Eigen::RowVectorXd global_var =
      ((X.rowwise() - X.colwise().mean()).array().square().colwise().mean())
          .cwiseMax(kGmmVarianceFloor);
  m.vars = global_var.replicate(k, 1);

  if (ll_trace) ll_trace->clear();
  double prev_ll = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd resp(n, k);
  for (int iter = 0; iter < max_iter; ++iter) {
    // E step
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd lp = component_logpdf(m, X.row(i)) + m.weights.array().log().matrix();
      const double lse = logsumexp(lp);
      ll += lse;
      resp.row(i) = (lp.array() - lse).exp().matrix().transpose();
    }
    if (ll_trace) ll_trace->push_back(ll);
    if (ll - prev_ll < tol && iter > 0) break;
    prev_ll = ll;
    // M step
    Eigen::VectorXd nk = resp.colwise().sum().transpose().cwiseMax(1e-12);
    m.weights = nk / static_cast<double>(n);
    m.means = (resp.transpose() * X).array().colwise() / nk.array();
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd diff = X.row(i) - m.means.row(c);
        var += resp(i, c) * diff.cwiseProduct(diff);
      }
      m.vars.row(c) = (var / nk(c)).cwiseMax(kGmmVarianceFloor);
    }
  }
  return m;
}

double gmm_loglik(const GmmModel& model, const Eigen::RowVectorXd& x) {
  if (x.size() != model.dim()) throw std::invalid_argument("gmm_loglik: dimension mismatch");
  Eigen::VectorXd lp =
      component_logpdf(model, x) + model.weights.array().max(1e-300).log().matrix();
  return logsumexp(lp);
}

Eigen::VectorXd gmm_responsibilities(const GmmModel& model, const Eigen::RowVectorXd& x) {
  Eigen::VectorXd lp =
      component_logpdf(model, x) + model.weights.array().max(1e-300).log().matrix();
  const double lse = logsumexp(lp);
  return (lp.array() - lse).exp().matrix();
}

double gmm_bic(const GmmModel& model, const Eigen::MatrixXd& samples) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) ll += gmm_loglik(model, samples.row(i));
  const double p = static_cast<double>(model.components() - 1 +
                                       2 * model.components() * model.dim());
  return -2.0 * ll + p * std::log(static_cast<double>(samples.rows()));
}

}  // namespace synthlab
