#include "synthlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "synthlab/classifiers.hpp"
#include "synthlab/knn.hpp"
#include "synthlab/rng.hpp"

namespace synthlab {

namespace {

constexpr double kCatWeight = 0.70710678118654752440;  // 1/sqrt(2)

std::vector<double> category_counts(const Dataset& ds, std::size_t col) {
  std::vector<double> counts(ds.schema().column(col).categories.size(), 0.0);
  for (double v : ds.column(col)) {
    if (std::isnan(v)) throw std::invalid_argument("metrics: missing cell in column");
    counts[static_cast<std::size_t>(v)] += 1.0;
  }
  return counts;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// alpha-quantile radius of distances to a center, plus the coverage curve
double curve_score(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& probe,
                   const std::vector<double>& grid) {
  if (ref.rows() == 0 || probe.rows() == 0)
    throw std::invalid_argument("fidelity: empty input");
  const Eigen::RowVectorXd center = ref.colwise().mean();
  std::vector<double> ref_d(static_cast<std::size_t>(ref.rows()));
  for (Eigen::Index i = 0; i < ref.rows(); ++i)
    ref_d[static_cast<std::size_t>(i)] = (ref.row(i) - center).norm();
  std::sort(ref_d.begin(), ref_d.end());
  std::vector<double> probe_d(static_cast<std::size_t>(probe.rows()));
  for (Eigen::Index i = 0; i < probe.rows(); ++i)
    probe_d[static_cast<std::size_t>(i)] = (probe.row(i) - center).norm();
  std::sort(probe_d.begin(), probe_d.end());

  const double n_ref = static_cast<double>(ref_d.size());
  const double n_probe = static_cast<double>(probe_d.size());
  double dev = 0.0;
  for (double alpha : grid) {
    const std::size_t qi = static_cast<std::size_t>(
        std::min<double>(n_ref - 1.0, std::max(0.0, std::ceil(alpha * n_ref) - 1.0)));
    const double radius = ref_d[qi];
    const double covered = static_cast<double>(
        std::upper_bound(probe_d.begin(), probe_d.end(), radius) - probe_d.begin());
    dev += std::abs(covered / n_probe - alpha);
  }
  dev /= static_cast<double>(grid.size());
  return std::clamp(1.0 - 2.0 * dev, 0.0, 1.0);
}

struct LabeledMatrix {
  Eigen::MatrixXd X;
  std::vector<int> y;
};

// stratified row split of an already-labeled matrix
std::pair<LabeledMatrix, LabeledMatrix> stratified_rows(const Eigen::MatrixXd& X,
                                                        const std::vector<int>& y,
                                                        double train_fraction, RngStream rng) {
  std::set<int> classes(y.begin(), y.end());
  std::vector<Eigen::Index> train_idx, test_idx;
  for (int c : classes) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == c) idx.push_back(static_cast<Eigen::Index>(i));
    rng.shuffle(idx);
    const std::size_t take =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < take ? train_idx : test_idx).push_back(idx[i]);
  }
  auto gather = [&](const std::vector<Eigen::Index>& rows) {
    LabeledMatrix out;
    out.X = Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
      out.y[i] = y[static_cast<std::size_t>(rows[i])];
    }
    return out;
  };
  return {gather(train_idx), gather(test_idx)};
}

// dataset without one column
Dataset drop_column(const Dataset& ds, std::size_t col) {
  std::vector<ColumnSpec> specs;
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    if (c == col) continue;
    ColumnSpec s = ds.schema().column(c);
    s.target = false;
    specs.push_back(std::move(s));
    cols.push_back(ds.column(c));
  }
  return Dataset(Schema(std::move(specs)), std::move(cols));
}

}  // namespace

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double q = 0.0, total = 0.0;
  while (i < na && j < nb) {
    const double qa = static_cast<double>(i + 1) / static_cast<double>(na);
    const double qb = static_cast<double>(j + 1) / static_cast<double>(nb);
    const double qn = std::min(qa, qb);
    total += (qn - q) * std::abs(a[i] - b[j]);
    q = qn;
    // exact boundary comparison via cross-multiplication
    const unsigned long long ca = static_cast<unsigned long long>(i + 1) * nb;
    const unsigned long long cb = static_cast<unsigned long long>(j + 1) * na;
    if (ca <= cb) ++i;
    if (cb <= ca) ++j;
  }
  return total;
}

double jsd_categorical(const std::vector<double>& p_counts, const std::vector<double>& q_counts) {
  if (p_counts.size() != q_counts.size())
    throw std::invalid_argument("jsd: mismatched category sets");
  const double ps = std::accumulate(p_counts.begin(), p_counts.end(), 0.0);
  const double qs = std::accumulate(q_counts.begin(), q_counts.end(), 0.0);
  if (!(ps > 0.0) || !(qs > 0.0)) throw std::invalid_argument("jsd: empty distribution");
  double div = 0.0;
  for (std::size_t k = 0; k < p_counts.size(); ++k) {
    const double p = p_counts[k] / ps;
    const double q = q_counts[k] / qs;
    const double m = 0.5 * (p + q);
    if (p > 0.0) div += 0.5 * p * std::log2(p / m);
    if (q > 0.0) div += 0.5 * q * std::log2(q / m);
  }
  return std::clamp(div, 0.0, 1.0);
}

double chi2_pvalue(const std::vector<double>& real_counts, const std::vector<double>& syn_counts) {
  if (real_counts.size() != syn_counts.size())
    throw std::invalid_argument("chi2: mismatched category sets");
  const double n_real = std::accumulate(real_counts.begin(), real_counts.end(), 0.0);
  const double n_syn = std::accumulate(syn_counts.begin(), syn_counts.end(), 0.0);
  if (!(n_real > 0.0) || !(n_syn > 0.0)) throw std::invalid_argument("chi2: empty counts");

  // merge categories with expected < 1 into an "other" bucket
  std::vector<std::pair<double, double>> cells;  // (expected, observed)
  double other_e = 0.0, other_o = 0.0;
  for (std::size_t k = 0; k < real_counts.size(); ++k) {
    const double e = real_counts[k] / n_real * n_syn;
    if (e < 1.0) {
      other_e += e;
      other_o += syn_counts[k];
    } else {
      cells.emplace_back(e, syn_counts[k]);
    }
  }
  if (other_e > 0.0 || other_o > 0.0) cells.emplace_back(other_e, other_o);
  if (cells.size() < 2) throw std::invalid_argument("chi2: fewer than 2 categories after merging");
  double stat = 0.0;
  for (const auto& [e, o] : cells) {
    if (!(e > 0.0)) throw std::invalid_argument("chi2: zero expected count");
    stat += (o - e) * (o - e) / e;
  }
  const double df = static_cast<double>(cells.size() - 1);
  return gamma_q(0.5 * df, 0.5 * stat);
}

ResemblanceReport resemblance_report(const Dataset& real, const Dataset& syn) {
  if (!real.schema().compatible_with(syn.schema()))
    throw std::invalid_argument("resemblance: schema mismatch");
  ResemblanceReport rep;
  for (std::size_t c = 0; c < real.cols(); ++c) {
    if (real.schema().column(c).kind == ColumnKind::Continuous) {
      const auto& a = real.column(c);
      const auto& b = syn.column(c);
      const double wd = wasserstein_1d(a, b);
      const double lo = *std::min_element(a.begin(), a.end());
      const double hi = *std::max_element(a.begin(), a.end());
      const double range = hi - lo;
      rep.continuous_columns.push_back(static_cast<int>(c));
      rep.wd_raw.push_back(wd);
      rep.wd_scaled.push_back(range > 0.0 ? wd / range : (wd == 0.0 ? 0.0 : wd));
    } else {
      rep.categorical_columns.push_back(static_cast<int>(c));
      const auto rc = category_counts(real, c);
      const auto sc = category_counts(syn, c);
      rep.jsd.push_back(jsd_categorical(rc, sc));
      rep.chi2_p.push_back(chi2_pvalue(rc, sc));
    }
  }
  rep.wd_raw_mean = mean_of(rep.wd_raw);
  rep.wd_scaled_mean = mean_of(rep.wd_scaled);
  rep.jsd_mean = mean_of(rep.jsd);
  rep.chi2_p_mean = mean_of(rep.chi2_p);
  return rep;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

double alpha_precision(const Eigen::MatrixXd& real_enc, const Eigen::MatrixXd& syn_enc,
                       const std::vector<double>& grid) {
  if (real_enc.cols() != syn_enc.cols())
    throw std::invalid_argument("alpha_precision: width mismatch");
  return curve_score(real_enc, syn_enc, grid);
}

double beta_recall(const Eigen::MatrixXd& real_enc, const Eigen::MatrixXd& syn_enc,
                   const std::vector<double>& grid) {
  if (real_enc.cols() != syn_enc.cols()) throw std::invalid_argument("beta_recall: width mismatch");
  return curve_score(syn_enc, real_enc, grid);
}

double authenticity(const Eigen::MatrixXd& real_enc, const Eigen::MatrixXd& syn_enc) {
  if (real_enc.rows() < 2) throw std::invalid_argument("authenticity: need >= 2 real rows");
  if (syn_enc.rows() == 0) throw std::invalid_argument("authenticity: empty synthetic");
  const NnResult syn_nn = nn_search(real_enc, syn_enc, 1);
  const NnResult real_nn = nn_search(real_enc, real_enc, 1, /*exclude_self=*/true);
  std::size_t authentic = 0;
  for (Eigen::Index s = 0; s < syn_enc.rows(); ++s) {
    const int r = syn_nn.index[static_cast<std::size_t>(s)][0];
    const double d_syn = syn_nn.dist[static_cast<std::size_t>(s)][0];
    const double d_real = real_nn.dist[static_cast<std::size_t>(r)][0];
    if (d_syn > d_real) ++authentic;
  }
  return static_cast<double>(authentic) / static_cast<double>(syn_enc.rows());
}

FidelityReport quality(const Dataset& real, const Dataset& syn) {
  if (!real.schema().compatible_with(syn.schema()))
    throw std::invalid_argument("quality: schema mismatch");
  const Encoder enc = Encoder::fit(real, Scaling::ZScore, kCatWeight);
  const Eigen::MatrixXd re = enc.apply(real).values;
  const Eigen::MatrixXd se = enc.apply(syn).values;
  FidelityReport rep;
  rep.alpha_precision = alpha_precision(re, se);
  rep.beta_recall = beta_recall(re, se);
  rep.authenticity = authenticity(re, se);
  rep.quality = (rep.alpha_precision + rep.beta_recall + rep.authenticity) / 3.0;
  return rep;
}

double detection(const Dataset& real, const Dataset& syn, std::uint64_t seed) {
  if (!real.schema().compatible_with(syn.schema()))
    throw std::invalid_argument("detection: schema mismatch");
  if (real.rows() < 20 || syn.rows() < 20)
    throw std::invalid_argument("detection: need >= 20 rows per side");
  RngStream rng = RngStream(seed).child("detection");

  // balance by downsampling the larger side
  const std::size_t m = std::min(real.rows(), syn.rows());
  auto downsample = [&](const Dataset& ds, const char* label) {
    if (ds.rows() == m) return ds;
    std::vector<std::size_t> idx(ds.rows());
    std::iota(idx.begin(), idx.end(), 0);
    RngStream r = rng.child(label);
    r.shuffle(idx);
    idx.resize(m);
    return ds.select(idx);
  };
  const Dataset real_b = downsample(real, "real");
  const Dataset syn_b = downsample(syn, "syn");

  const Encoder enc = Encoder::fit(real_b, Scaling::ZScore, kCatWeight);
  const Eigen::MatrixXd re = enc.apply(real_b).values;
  const Eigen::MatrixXd se = enc.apply(syn_b).values;
  Eigen::MatrixXd X(re.rows() + se.rows(), re.cols());
  X << re, se;
  std::vector<int> y(static_cast<std::size_t>(X.rows()), 0);
  for (std::size_t i = static_cast<std::size_t>(re.rows()); i < y.size(); ++i) y[i] = 1;

  const auto [train_part, test_part] = stratified_rows(X, y, 0.8, rng.child("split"));

  double total = 0.0;
  int count = 0;
  for (Family f : {Family::Gbt, Family::Mlp, Family::GmmDensity}) {
    ClassifierSpec spec = default_spec(f);
    spec.seed = RngStream(seed).child(family_name(f)).next_u64();
    const auto model = train(spec, train_part.X, train_part.y);
    total += aucroc_macro(test_part.y, model->predict_proba(test_part.X), model->labels());
    ++count;
  }
  return total / count;
}

OodResult ood_aucroc(const Dataset& syn, const Dataset& real_test, int target_col,
                     std::uint64_t seed) {
  if (!syn.schema().compatible_with(real_test.schema()))
    throw std::invalid_argument("ood_aucroc: schema mismatch");
  if (target_col < 0 || static_cast<std::size_t>(target_col) >= syn.cols())
    throw std::invalid_argument("ood_aucroc: target column out of range");
  if (syn.schema().column(static_cast<std::size_t>(target_col)).kind != ColumnKind::Categorical)
    throw std::invalid_argument("ood_aucroc: target column must be categorical");

  const Dataset syn_x = drop_column(syn, static_cast<std::size_t>(target_col));
  const Dataset test_x = drop_column(real_test, static_cast<std::size_t>(target_col));
  const Encoder enc = Encoder::fit(syn_x, Scaling::ZScore, kCatWeight);
  const Eigen::MatrixXd Xs = enc.apply(syn_x).values;
  const Eigen::MatrixXd Xt = enc.apply(test_x).values;
  std::vector<int> ys, yt;
  for (double v : syn.column(static_cast<std::size_t>(target_col)))
    ys.push_back(static_cast<int>(v));
  for (double v : real_test.column(static_cast<std::size_t>(target_col)))
    yt.push_back(static_cast<int>(v));

  OodResult res;
  const std::set<int> syn_classes(ys.begin(), ys.end());
  for (int c : std::set<int>(yt.begin(), yt.end()))
    if (!syn_classes.count(c)) res.degenerate_classes = true;

  for (Family f : {Family::Gbt, Family::Mlp, Family::Linear}) {
    ClassifierSpec spec = default_spec(f);
    spec.seed = RngStream(seed).child("ood").child(family_name(f)).next_u64();
    const auto model = train(spec, Xs, ys);
    res.per_classifier.push_back(aucroc_macro(yt, model->predict_proba(Xt), model->labels()));
  }
  res.mean_aucroc = mean_of(res.per_classifier);
  return res;
}

double sdis(double quality, double ood_aucroc, double detection) {
  return (quality + ood_aucroc + (1.0 - detection)) / 3.0;
}

double accuracy(const std::vector<int>& y, const std::vector<int>& yhat) {
  if (y.size() != yhat.size() || y.empty())
    throw std::invalid_argument("accuracy: length mismatch");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == yhat[i]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

double f1_weighted(const std::vector<int>& y, const std::vector<int>& yhat) {
  if (y.size() != yhat.size() || y.empty())
    throw std::invalid_argument("f1_weighted: length mismatch");
  std::set<int> classes(y.begin(), y.end());
  double total = 0.0;
  for (int c : classes) {
    double tp = 0.0, fp = 0.0, fn = 0.0, support = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) ++support;
      if (yhat[i] == c && y[i] == c) ++tp;
      if (yhat[i] == c && y[i] != c) ++fp;
      if (yhat[i] != c && y[i] == c) ++fn;
    }
    const double denom_p = tp + fp, denom_r = tp + fn;
    const double prec = denom_p > 0.0 ? tp / denom_p : 0.0;
    const double rec = denom_r > 0.0 ? tp / denom_r : 0.0;
    const double f1 = (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    total += support / static_cast<double>(y.size()) * f1;
  }
  return total;
}

double aucroc_binary(const std::vector<int>& y01, const std::vector<double>& scores) {
  if (y01.size() != scores.size()) throw std::invalid_argument("aucroc: length mismatch");
  // rank-based formulation with midranks for ties
  std::vector<std::size_t> idx(y01.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(y01.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  double pos = 0.0, neg = 0.0, rank_sum = 0.0;
  for (std::size_t k = 0; k < y01.size(); ++k) {
    if (y01[k] == 1) {
      pos += 1.0;
      rank_sum += rank[k];
    } else {
      neg += 1.0;
    }
  }
  if (pos == 0.0 || neg == 0.0)
    throw std::invalid_argument("aucroc: need at least one positive and one negative");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double aucroc_macro(const std::vector<int>& y, const Eigen::MatrixXd& proba,
                    const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(y.size()) != proba.rows())
    throw std::invalid_argument("aucroc: length mismatch");
  const std::set<int> classes(y.begin(), y.end());
  if (classes.size() < 2) throw std::invalid_argument("aucroc: single-class labels");
  if (classes.size() == 2) {
    // standard binary AUCROC of the larger (positive) class
    const int pos = *classes.rbegin();
    std::vector<int> y01(y.size());
    std::vector<double> s(y.size(), 0.0);
    const auto it = std::find(labels.begin(), labels.end(), pos);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y01[i] = y[i] == pos ? 1 : 0;
      if (it != labels.end())
        s[i] = proba(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(it - labels.begin()));
    }
    return aucroc_binary(y01, s);
  }
  double total = 0.0;
  for (int c : classes) {
    std::vector<int> y01(y.size());
    std::vector<double> s(y.size(), 0.0);  // class unknown to the model -> flat scores
    const auto it = std::find(labels.begin(), labels.end(), c);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y01[i] = y[i] == c ? 1 : 0;
      if (it != labels.end())
        s[i] = proba(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(it - labels.begin()));
    }
    total += aucroc_binary(y01, s);
  }
  return total / static_cast<double>(classes.size());
}

}  // namespace synthlab
