#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "synthlab/dataset.hpp"
#include "synthlab/metrics.hpp"
#include "synthlab/rng.hpp"

using namespace synthlab;

namespace {

// Transport oracle: expand both samples to a common mass grid (lcm of the
// sizes) and match order statistics one-for-one. For 1-D empirical
// distributions this equals the optimal-transport cost.
double wd_transport_oracle(std::vector<double> a, std::vector<double> b) {
  const std::size_t l = std::lcm(a.size(), b.size());
  std::vector<double> ea, eb;
  for (double v : a)
    for (std::size_t i = 0; i < l / a.size(); ++i) ea.push_back(v);
  for (double v : b)
    for (std::size_t i = 0; i < l / b.size(); ++i) eb.push_back(v);
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  double total = 0.0;
  for (std::size_t i = 0; i < l; ++i) total += std::abs(ea[i] - eb[i]);
  return total / static_cast<double>(l);
}

// all-pairs counting with half credit for score ties
double aucroc_pairs_oracle(const std::vector<int>& y, const std::vector<double>& s) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j])
        wins += 1.0;
      else if (s[i] == s[j])
        wins += 0.5;
    }
  }
  return wins / pairs;
}

// upper regularized gamma by Simpson quadrature in long double; the
// substitution t = u^2 removes the t^(a-1) singularity at the origin
long double gamma_q_quadrature(long double a, long double x) {
  if (x <= 0.0L) return 1.0L;
  auto f = [&](long double u) {
    if (u <= 0.0L) return a == 0.5L ? 2.0L / expl(lgammal(a)) : 0.0L;
    return 2.0L * expl((2.0L * a - 1.0L) * logl(u) - u * u - lgammal(a));
  };
  const long double upper = sqrtl(x);
  const int n = 200000;
  const long double h = upper / n;
  long double sum = f(0.0L) + f(upper);
  for (int i = 1; i < n; ++i) sum += f(h * i) * (i % 2 ? 4.0L : 2.0L);
  return 1.0L - sum * h / 3.0L;
}

Schema mixed_schema() {
  return Schema::parse(R"({"columns":[
    {"name":"x","kind":"continuous"},
    {"name":"c","kind":"categorical","categories":["A","B","C"],"target":true}]})");
}

Dataset toy_mixed(int n, std::uint64_t seed, double shift = 0.0) {
  Dataset ds(mixed_schema());
  RngStream rng(seed);
  for (int i = 0; i < n; ++i) {
    const double c = rng.uniform() < 0.5 ? 0.0 : (rng.uniform() < 0.6 ? 1.0 : 2.0);
    ds.append_row({rng.normal() + c + shift, c});
  }
  return ds;
}

Eigen::MatrixXd column_matrix(const std::vector<double>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return m;
}

}  // namespace

TEST_CASE("wasserstein basics") {
  CHECK(wasserstein_1d({1, 2, 3}, {3, 1, 2}) == 0.0);
  CHECK(wasserstein_1d({0, 1, 2}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wasserstein_1d({}, {1.0}), std::invalid_argument);
}

TEST_CASE("wasserstein equals the transport oracle on random unequal-size pairs") {
  RngStream rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t na = 1 + rng.uniform_int(20);
    const std::size_t nb = 1 + rng.uniform_int(20);
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = std::floor(rng.uniform() * 10.0);
    for (auto& v : b) v = std::floor(rng.uniform() * 10.0);
    CHECK(wasserstein_1d(a, b) == doctest::Approx(wd_transport_oracle(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("wasserstein symmetry and homogeneity") {
  RngStream rng(2);
  std::vector<double> a(17), b(9);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal() * 2.0;
  CHECK(wasserstein_1d(a, b) == doctest::Approx(wasserstein_1d(b, a)).epsilon(1e-14));
  std::vector<double> a2 = a, b2 = b;
  for (auto& v : a2) v *= 2.0;
  for (auto& v : b2) v *= 2.0;
  CHECK(wasserstein_1d(a2, b2) == doctest::Approx(2.0 * wasserstein_1d(a, b)).epsilon(1e-12));
}

TEST_CASE("jsd categorical") {
  CHECK(jsd_categorical({3, 7}, {30, 70}) == doctest::Approx(0.0));
  CHECK(jsd_categorical({1, 0}, {0, 1}) == doctest::Approx(1.0));
  CHECK(jsd_categorical({1, 0}, {0.5, 0.5}) == doctest::Approx(0.3113).epsilon(1e-3));
  CHECK_THROWS_AS(jsd_categorical({1, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("chi-squared p-values") {
  CHECK(chi2_pvalue({50, 50}, {80, 80}) == doctest::Approx(1.0));
  CHECK(chi2_pvalue({50, 50}, {60, 40}) == doctest::Approx(0.0455).epsilon(1e-2));
  CHECK(chi2_pvalue({50, 50}, {50, 50}) == doctest::Approx(1.0));
}

TEST_CASE("chi-squared merges rare expected categories") {
  // third category expects 0.5 < 1 under 100 synthetic draws
  CHECK_NOTHROW(chi2_pvalue({199, 199, 2}, {50, 50, 0}));
  // one synthetic draw makes every expected count < 1; everything merges into
  // a single bucket and the test becomes undefined
  CHECK_THROWS_AS(chi2_pvalue({1, 1, 1}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("incomplete gamma matches long-double quadrature") {
  RngStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double df = 1.0 + std::floor(rng.uniform() * 10.0);
    const double x = rng.uniform() * 25.0;
    const double ours = gamma_q(0.5 * df, 0.5 * x);
    const double ref = static_cast<double>(
        gamma_q_quadrature(static_cast<long double>(0.5 * df), static_cast<long double>(0.5 * x)));
    CHECK(std::abs(ours - ref) < 1e-6);
  }
}

TEST_CASE("resemblance of a dataset with itself") {
  const Dataset real = toy_mixed(300, 4);
  const ResemblanceReport rep = resemblance_report(real, real);
  CHECK(rep.wd_raw_mean == 0.0);
  CHECK(rep.wd_scaled_mean == 0.0);
  CHECK(rep.jsd_mean == doctest::Approx(0.0));
  CHECK(rep.chi2_p_mean == doctest::Approx(1.0));
}

TEST_CASE("resemblance flags missing sections on all-continuous data") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  RngStream rng(5);
  for (int i = 0; i < 50; ++i) ds.append_row({rng.normal()});
  const ResemblanceReport rep = resemblance_report(ds, ds);
  CHECK(rep.categorical_columns.empty());
  CHECK(std::isnan(rep.jsd_mean));
  CHECK(std::isnan(rep.chi2_p_mean));
}

TEST_CASE("independence baseline keeps marginals close") {
  const Dataset real = toy_mixed(500, 6);
  // column-wise reshuffle is exactly what the independence baseline does
  Dataset syn = real;
  RngStream rng(7);
  std::vector<std::size_t> idx(real.rows());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  for (std::size_t r = 0; r < real.rows(); ++r) syn.set_cell(r, 0, real.cell(idx[r], 0));
  const ResemblanceReport rep = resemblance_report(real, syn);
  CHECK(rep.wd_scaled_mean < 0.02);
  CHECK(rep.jsd_mean < 0.02);
}

TEST_CASE("alpha precision grid arithmetic") {
  RngStream rng(8);
  Eigen::MatrixXd real(400, 2);
  for (int i = 0; i < real.size(); ++i) real.data()[i] = rng.normal();
  CHECK(alpha_precision(real, real) >= 0.9);

  // all synthetic at the center: P(alpha) = 1 for every level -> score 0
  Eigen::MatrixXd center = real.colwise().mean().replicate(50, 1);
  CHECK(alpha_precision(real, center) == doctest::Approx(0.0).epsilon(1e-9));

  // all synthetic beyond the maximum radius: P(alpha) = 0 -> score 0
  Eigen::MatrixXd far = Eigen::MatrixXd::Constant(50, 2, 1e6);
  CHECK(alpha_precision(real, far) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("beta recall mirrors alpha precision") {
  RngStream rng(9);
  Eigen::MatrixXd a(120, 3), b(80, 3);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (int i = 0; i < b.size(); ++i) b.data()[i] = rng.normal() * 1.4;
  CHECK(beta_recall(a, b) == doctest::Approx(alpha_precision(b, a)).epsilon(1e-14));
  CHECK(beta_recall(a, a) >= 0.9);
  // collapsed synthetic covers almost none of the real mass
  Eigen::MatrixXd collapsed = Eigen::MatrixXd::Zero(60, 3);
  CHECK(beta_recall(a, collapsed) <= 0.1);
}

TEST_CASE("authenticity hand case and extremes") {
  const Eigen::MatrixXd real = column_matrix({0.0, 1.0});
  CHECK(authenticity(real, column_matrix({0.05, 3.0})) == doctest::Approx(0.5));
  CHECK(authenticity(real, real) == 0.0);
  CHECK(authenticity(real, column_matrix({100.0, -50.0})) == 1.0);
  CHECK_THROWS_AS(authenticity(column_matrix({0.0}), real), std::invalid_argument);
}

TEST_CASE("quality on an exact copy lands in the identity band") {
  const Dataset real = toy_mixed(500, 10);
  const FidelityReport rep = quality(real, real);
  CHECK(rep.alpha_precision >= 0.9);
  CHECK(rep.beta_recall >= 0.9);
  CHECK(rep.authenticity <= 0.05);
  CHECK(rep.quality ==
        doctest::Approx((rep.alpha_precision + rep.beta_recall + rep.authenticity) / 3.0)
            .epsilon(1e-12));
}

TEST_CASE("detection separates a shifted copy and replays per seed") {
  const Dataset real = toy_mixed(300, 11);
  Dataset shifted = real;
  for (std::size_t r = 0; r < real.rows(); ++r)
    shifted.set_cell(r, 0, real.cell(r, 0) + 10.0 * 1.5);  // ~10 sd
  CHECK(detection(real, shifted, 1) >= 0.95);
  CHECK(detection(real, shifted, 2) == doctest::Approx(detection(real, shifted, 2)).epsilon(1e-12));

  Dataset small(mixed_schema());
  for (int i = 0; i < 10; ++i) small.append_row({static_cast<double>(i), 0.0});
  CHECK_THROWS_AS(detection(small, small, 1), std::invalid_argument);
}

TEST_CASE("ood aucroc on a separable rule is perfect") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"f","kind":"continuous"},
    {"name":"y","kind":"categorical","categories":["n","p"],"target":true}]})");
  Dataset syn(s), test(s);
  RngStream rng(12);
  for (int i = 0; i < 200; ++i) {
    const double cls = i % 2;
    syn.append_row({cls * 10.0 + rng.normal(), cls});
    test.append_row({cls * 10.0 + rng.normal(), cls});
  }
  const OodResult r = ood_aucroc(syn, test, 1, 13);
  CHECK(r.mean_aucroc == doctest::Approx(1.0));
  CHECK(r.per_classifier.size() == 3);
  CHECK(!r.degenerate_classes);
}

TEST_CASE("ood aucroc collapses to chance on permuted labels") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"f","kind":"continuous"},
    {"name":"y","kind":"categorical","categories":["n","p"],"target":true}]})");
  Dataset syn(s), test(s);
  RngStream rng(14);
  for (int i = 0; i < 400; ++i) {
    // labels carry no information about the feature on either side, so any
    // fitted scorer must land at chance level
    test.append_row({(i / 2 % 2) * 4.0 + rng.normal(), static_cast<double>(i % 2)});
    syn.append_row({(i / 2 % 2) * 4.0 + rng.normal(), static_cast<double>(i % 2)});
  }
  const OodResult r = ood_aucroc(syn, test, 1, 15);
  CHECK(std::abs(r.mean_aucroc - 0.5) < 0.08);
}

TEST_CASE("ood flags classes absent from synthetic") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"f","kind":"continuous"},
    {"name":"y","kind":"categorical","categories":["a","b","c"],"target":true}]})");
  Dataset syn(s), test(s);
  RngStream rng(16);
  for (int i = 0; i < 120; ++i) {
    syn.append_row({(i % 2) * 3.0 + rng.normal(), static_cast<double>(i % 2)});
    test.append_row({(i % 3) * 3.0 + rng.normal(), static_cast<double>(i % 3)});
  }
  const OodResult r = ood_aucroc(syn, test, 1, 17);
  CHECK(r.degenerate_classes);
  CHECK(r.mean_aucroc >= 0.0);
  CHECK(r.mean_aucroc <= 1.0);
}

TEST_CASE("sdis formula") {
  CHECK(sdis(1.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(sdis(0.6403, 0.5335, 0.6454) == doctest::Approx(0.5095).epsilon(1e-3));
  CHECK(sdis(0.5707, -0.0088, 0.5413) == doctest::Approx(0.3402).epsilon(1e-3));
  const double q = 0.43, o = 0.61, d = 0.52;
  CHECK(std::abs(3.0 * sdis(q, o, d) - q - o - (1.0 - d)) < 1e-12);
}

TEST_CASE("accuracy and weighted f1 hand case") {
  const std::vector<int> y = {1, 1, 1, 0, 0};
  const std::vector<int> yhat = {1, 1, 0, 1, 0};
  CHECK(accuracy(y, yhat) == doctest::Approx(0.6));
  CHECK(f1_weighted(y, yhat) == doctest::Approx(0.6));
  CHECK(accuracy(y, y) == 1.0);
  CHECK(f1_weighted(y, y) == doctest::Approx(1.0));
}

TEST_CASE("binary aucroc hand case and tie handling") {
  CHECK(aucroc_binary({0, 0, 1, 1}, {0.1, 0.4, 0.35, 0.8}) == doctest::Approx(0.75));
  CHECK(aucroc_binary({0, 1}, {0.5, 0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(aucroc_binary({1, 1}, {0.2, 0.3}), std::invalid_argument);
}

TEST_CASE("aucroc equals the all-pairs oracle on random instances") {
  RngStream rng(18);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(49);
    std::vector<int> y(n);
    std::vector<double> s(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.5 ? 1 : 0;
      s[i] = std::floor(rng.uniform() * 8.0) / 8.0;  // coarse grid forces ties
      (y[i] ? pos : neg) = true;
    }
    if (!pos) y[0] = 1;
    if (!neg) y[n - 1] = 0;
    CHECK(aucroc_binary(y, s) == doctest::Approx(aucroc_pairs_oracle(y, s)).epsilon(1e-12));
  }
}

TEST_CASE("aucroc is invariant to strictly increasing transforms") {
  RngStream rng(19);
  std::vector<int> y(60);
  std::vector<double> s(60), t(60);
  for (int i = 0; i < 60; ++i) {
    y[static_cast<std::size_t>(i)] = rng.uniform() < 0.4 ? 1 : 0;
    s[static_cast<std::size_t>(i)] = rng.normal();
    t[static_cast<std::size_t>(i)] = std::exp(s[static_cast<std::size_t>(i)]);
  }
  y[0] = 1;
  y[1] = 0;
  CHECK(aucroc_binary(y, s) == doctest::Approx(aucroc_binary(y, t)).epsilon(1e-14));
}

TEST_CASE("macro aucroc over three classes") {
  // three separable score columns
  std::vector<int> y = {0, 0, 1, 1, 2, 2};
  Eigen::MatrixXd p(6, 3);
  p << 0.8, 0.1, 0.1, 0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.2, 0.7, 0.1, 0.1, 0.1, 0.8, 0.2, 0.2, 0.6;
  CHECK(aucroc_macro(y, p, {0, 1, 2}) == doctest::Approx(1.0));
}
