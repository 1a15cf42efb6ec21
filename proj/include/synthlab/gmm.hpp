#pragma once

#include <vector>

#include <Eigen/Dense>

#include "synthlab/rng.hpp"

namespace synthlab {

constexpr double kGmmVarianceFloor = 1e-6;

/// Diagonal-covariance Gaussian mixture.
struct GmmModel {
  Eigen::VectorXd weights;  // k, on the simplex
  Eigen::MatrixXd means;    // k x d
  Eigen::MatrixXd vars;     // k x d, >= kGmmVarianceFloor

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
};

/// EM fit with k-means++ initialization. Stops when the log-likelihood gain
/// drops below `tol` or after `max_iter` iterations; the per-iteration
/// log-likelihood (recorded in `ll_trace` when given) is non-decreasing.
GmmModel gmm_fit(const Eigen::MatrixXd& samples, int k, RngStream rng, int max_iter = 200,
                 double tol = 1e-6, std::vector<double>* ll_trace = nullptr);

/// log sum_k pi_k N(x; mu_k, sigma_k^2), evaluated via log-sum-exp.
double gmm_loglik(const GmmModel& model, const Eigen::RowVectorXd& x);

/// Posterior component responsibilities for a single point.
Eigen::VectorXd gmm_responsibilities(const GmmModel& model, const Eigen::RowVectorXd& x);

/// Bayesian information criterion (lower is better).
double gmm_bic(const GmmModel& model, const Eigen::MatrixXd& samples);

}  // namespace synthlab
