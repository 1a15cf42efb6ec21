#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthlab/dataset.hpp"

namespace synthlab {

// ---------------------------------------------------------------------------
// Resemblance

/// 1-Wasserstein distance between empirical distributions (exact quantile
/// integral; equal sizes reduce to the mean absolute sorted difference).
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

/// Jensen-Shannon divergence over matched count vectors, base-2 logs so the
/// value lies in [0, 1].
double jsd_categorical(const std::vector<double>& p_counts, const std::vector<double>& q_counts);

/// Goodness-of-fit p-value: observed = synthetic counts, expected = real
/// proportions scaled to the synthetic total. Categories with expected < 1
/// are merged into an "other" bucket before testing.
double chi2_pvalue(const std::vector<double>& real_counts, const std::vector<double>& syn_counts);

/// Regularized upper incomplete gamma Q(a, x); chi2 survival is Q(df/2, x/2).
double gamma_q(double a, double x);

struct ResemblanceReport {
  std::vector<int> continuous_columns;
  std::vector<double> wd_raw;       // per continuous column
  std::vector<double> wd_scaled;    // after min-max scaling by the real range
  std::vector<int> categorical_columns;
  std::vector<double> jsd;          // per categorical column
  std::vector<double> chi2_p;       // per categorical column
  double wd_raw_mean = 0.0;
  double wd_scaled_mean = 0.0;
  double jsd_mean = 0.0;            // NaN when no categorical columns
  double chi2_p_mean = 0.0;         // NaN when no categorical columns
};

ResemblanceReport resemblance_report(const Dataset& real, const Dataset& syn);

// ---------------------------------------------------------------------------
// Fidelity

std::vector<double> default_alpha_grid();  // 0.05 .. 0.95 step 0.05

/// Realism: fraction of synthetic rows inside real center-quantile balls,
/// scored as 1 - 2 * mean |P(alpha) - alpha|, clamped to [0, 1].
double alpha_precision(const Eigen::MatrixXd& real_enc, const Eigen::MatrixXd& syn_enc,
                       const std::vector<double>& grid = default_alpha_grid());

/// Coverage: alpha_precision with the roles of real and synthetic swapped.
double beta_recall(const Eigen::MatrixXd& real_enc, const Eigen::MatrixXd& syn_enc,
                   const std::vector<double>& grid = default_alpha_grid());

/// Fraction of synthetic rows farther from their nearest real neighbor than
/// that neighbor is from its own nearest real row.
double authenticity(const Eigen::MatrixXd& real_enc, const Eigen::MatrixXd& syn_enc);

struct FidelityReport {
  double alpha_precision = 0.0;
  double beta_recall = 0.0;
  double authenticity = 0.0;
  double quality = 0.0;  // mean of the three
};

/// Computes the three fidelity sub-metrics on a shared encoding (z-scored by
/// real statistics, one-hot scaled so a category flip costs distance 1).
FidelityReport quality(const Dataset& real, const Dataset& syn);

// ---------------------------------------------------------------------------
// Detection / OOD / SDIS

/// Mean test AUCROC of three real-vs-synthetic discriminators (gbt, mlp,
/// gmm density); 0.5 means indistinguishable.
double detection(const Dataset& real, const Dataset& syn, std::uint64_t seed);

struct OodResult {
  double mean_aucroc = 0.0;
  std::vector<double> per_classifier;  // gbt, mlp, linear
  bool degenerate_classes = false;     // a test class was absent from synthetic
};

/// Trains gbt/mlp/linear on synthetic data and scores AUCROC on held-out
/// real data (macro one-vs-rest for multiclass).
OodResult ood_aucroc(const Dataset& syn, const Dataset& real_test, int target_col,
                     std::uint64_t seed);

/// (quality + ood + (1 - detection)) / 3.
double sdis(double quality, double ood_aucroc, double detection);

// ---------------------------------------------------------------------------
// Classification scores

double accuracy(const std::vector<int>& y, const std::vector<int>& yhat);
double f1_weighted(const std::vector<int>& y, const std::vector<int>& yhat);

/// Binary AUCROC = P(score+ > score-), ties counted one half.
double aucroc_binary(const std::vector<int>& y01, const std::vector<double>& scores);

/// Macro one-vs-rest AUCROC over probability columns (binary inputs reduce to
/// the standard AUCROC of the positive class).
double aucroc_macro(const std::vector<int>& y, const Eigen::MatrixXd& proba,
                    const std::vector<int>& labels);

}  // namespace synthlab
