#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "synthlab/generators.hpp"
#include "synthlab/metrics.hpp"

using namespace synthlab;

namespace {

Schema cat_schema(const std::string& name, std::vector<std::string> cats) {
  ColumnSpec c;
  c.name = name;
  c.kind = ColumnKind::Categorical;
  c.categories = std::move(cats);
  return Schema({c});
}

GeneratorConfig tiny_config() {
  GeneratorConfig cfg;
  cfg.iterations = 300;
  cfg.batch_size = 40;
  cfg.noise_dim = 16;
  cfg.hidden = {32, 32};
  return cfg;
}

}  // namespace

TEST_CASE("config invariants") {
  GeneratorConfig cfg;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GeneratorConfig{};
  cfg.batch_size = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GeneratorConfig{};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(GeneratorConfig{}.validate());
}

TEST_CASE("config json round-trip") {
  GeneratorConfig cfg;
  cfg.iterations = 123;
  cfg.hidden = {10, 20};
  cfg.seed = 77;
  const GeneratorConfig back = GeneratorConfig::from_json(cfg.to_json());
  CHECK(back.iterations == 123);
  CHECK(back.hidden == std::vector<int>{10, 20});
  CHECK(back.seed == 77);
}

TEST_CASE("mode normalizer: constant column forces one mode") {
  const ModeEntry e = fit_mode_normalizer(std::vector<double>(50, 3.5), 5, RngStream(1));
  CHECK(e.n_modes == 1);
  CHECK(e.gmm.means(0, 0) == doctest::Approx(3.5));
  CHECK(e.gmm.vars(0, 0) >= kGmmVarianceFloor);
}

TEST_CASE("mode normalizer: bimodal column selects two modes") {
  RngStream rng(2);
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) values.push_back(0.0 + 0.3 * rng.normal());
  for (int i = 0; i < 200; ++i) values.push_back(10.0 + 0.3 * rng.normal());
  const ModeEntry e = fit_mode_normalizer(values, 5, RngStream(3));
  CHECK(e.n_modes == 2);
  std::vector<double> means;
  for (int k = 0; k < e.n_modes; ++k) means.push_back(e.gmm.means(k, 0));
  std::sort(means.begin(), means.end());
  CHECK(std::abs(means[0] - 0.0) < 0.1);
  CHECK(std::abs(means[1] - 10.0) < 0.1);
}

TEST_CASE("mode normalizer: unimodal data usually selects one mode") {
  int ones = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    std::vector<double> values;
    for (int i = 0; i < 500; ++i) values.push_back(rng.normal());
    if (fit_mode_normalizer(values, 5, rng.child("fit")).n_modes == 1) ++ones;
  }
  CHECK(ones >= 18);
}

TEST_CASE("mode normalization formula and round-trip") {
  ModeEntry e;
  e.n_modes = 1;
  e.gmm.weights = Eigen::VectorXd::Ones(1);
  e.gmm.means = Eigen::MatrixXd::Constant(1, 1, 5.0);
  e.gmm.vars = Eigen::MatrixXd::Constant(1, 1, 1.0);
  RngStream rng(4);
  auto [alpha_mid, mode_mid] = mode_normalize(e, 5.0, rng);
  CHECK(alpha_mid == doctest::Approx(0.0));
  auto [alpha, mode] = mode_normalize(e, 7.0, rng);
  CHECK(alpha == doctest::Approx(0.5));
  CHECK(mode_denormalize(e, alpha, mode) == doctest::Approx(7.0));

  // round-trip over sampled in-range values on a fitted two-mode model
  RngStream drng(5);
  std::vector<double> values;
  for (int i = 0; i < 300; ++i) values.push_back((i % 2 ? 8.0 : -1.0) + 0.5 * drng.normal());
  const ModeEntry fitted = fit_mode_normalizer(values, 5, RngStream(6));
  for (double v : {-1.2, -0.8, 7.7, 8.4}) {
    auto [a, m] = mode_normalize(fitted, v, drng);
    if (std::abs(a) < 1.0)  // unclamped
      CHECK(std::abs(mode_denormalize(fitted, a, m) - v) < 1e-9);
  }
}

TEST_CASE("condition sampler: balanced binary column is symmetric") {
  Dataset ds(cat_schema("c", {"A", "B"}));
  for (int i = 0; i < 100; ++i) ds.append_row({i < 50 ? 0.0 : 1.0});
  const CondSampler cs = CondSampler::build(ds);
  CHECK(cs.width == 2);
  CHECK(cs.probability(0, 0) == doctest::Approx(0.5));
  RngStream rng(7);
  int a = 0;
  for (int i = 0; i < 4000; ++i)
    if (cs.sample(rng).second == 0) ++a;
  CHECK(std::abs(a / 4000.0 - 0.5) < 0.03);
}

TEST_CASE("condition sampler: log-frequency weighting") {
  Dataset ds(cat_schema("c", {"A", "B"}));
  for (int i = 0; i < 100; ++i) ds.append_row({i < 99 ? 0.0 : 1.0});
  const CondSampler cs = CondSampler::build(ds);
  const double expected = std::log(100.0) / (std::log(100.0) + std::log(2.0));
  CHECK(cs.probability(0, 0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.869).epsilon(1e-3));
}

TEST_CASE("condition sampler: no categorical columns means unconditional") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  ds.append_row({1.0});
  const CondSampler cs = CondSampler::build(ds);
  CHECK(cs.width == 0);
  RngStream rng(8);
  CHECK(cs.sample(rng) == std::pair<int, int>{-1, -1});
}

TEST_CASE("ctgan learns a skewed categorical marginal") {
  Dataset ds(cat_schema("c", {"A", "B"}));
  for (int i = 0; i < 200; ++i) ds.append_row({i < 160 ? 0.0 : 1.0});
  GeneratorConfig cfg = tiny_config();
  cfg.iterations = 2000;
  cfg.seed = 11;
  const CtganModel model = ctgan_fit(ds, cfg);
  const Dataset syn = ctgan_sample(model, 2000, 12);
  int a = 0;
  for (std::size_t r = 0; r < syn.rows(); ++r)
    if (syn.category(r, 0) == 0) ++a;
  CHECK(std::abs(a / 2000.0 - 0.8) <= 0.08);
}

TEST_CASE("ctgan training is deterministic and logs a non-negative penalty") {
  Dataset ds(cat_schema("c", {"A", "B"}));
  RngStream rng(13);
  for (int i = 0; i < 80; ++i) ds.append_row({rng.uniform() < 0.5 ? 0.0 : 1.0});
  GeneratorConfig cfg = tiny_config();
  cfg.iterations = 60;
  cfg.seed = 14;
  const CtganModel m1 = ctgan_fit(ds, cfg);
  const CtganModel m2 = ctgan_fit(ds, cfg);
  const Dataset s1 = ctgan_sample(m1, 50, 15);
  const Dataset s2 = ctgan_sample(m2, 50, 15);
  CHECK(s1.equals(s2));
  const Dataset other = ctgan_sample(m1, 50, 16);
  CHECK(!s1.equals(other));
  CHECK(m1.log.size() == 60);
  for (const auto& entry : m1.log) CHECK(entry.grad_penalty >= 0.0);
}

TEST_CASE("ctgan samples keep the training schema and pass validation") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"x","kind":"continuous"},
    {"name":"c","kind":"categorical","categories":["A","B"]}]})");
  Dataset ds(s);
  RngStream rng(17);
  for (int i = 0; i < 395; ++i)
    ds.append_row({rng.normal(), rng.uniform() < 0.5 ? 0.0 : 1.0});
  GeneratorConfig cfg = tiny_config();
  cfg.iterations = 80;
  cfg.seed = 18;
  const CtganModel model = ctgan_fit(ds, cfg);
  const Dataset syn = ctgan_sample(model, 395, 19);
  CHECK(syn.rows() == 395);
  CHECK(syn.schema().compatible_with(ds.schema()));
  CHECK(!syn.has_missing());
  CHECK_NOTHROW(syn.validate());
}

TEST_CASE("ctgan model serialization round-trips") {
  Dataset ds(cat_schema("c", {"A", "B"}));
  RngStream rng(20);
  for (int i = 0; i < 60; ++i) ds.append_row({rng.uniform() < 0.3 ? 0.0 : 1.0});
  GeneratorConfig cfg = tiny_config();
  cfg.iterations = 30;
  cfg.seed = 21;
  const CtganModel model = ctgan_fit(ds, cfg);
  const CtganModel back = CtganModel::from_json(model.to_json());
  CHECK(ctgan_sample(model, 40, 22).equals(ctgan_sample(back, 40, 22)));
}

TEST_CASE("bootstrap baseline resamples training rows") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  for (int i = 0; i < 10; ++i) ds.append_row({static_cast<double>(i)});
  const Dataset syn = baseline_fit_sample(BaselineKind::Bootstrap, ds, 100, 23);
  CHECK(syn.rows() == 100);
  for (std::size_t r = 0; r < syn.rows(); ++r) {
    const double v = syn.cell(r, 0);
    CHECK(v == std::floor(v));
    CHECK(v >= 0.0);
    CHECK(v <= 9.0);
  }
  CHECK_THROWS_AS(baseline_fit_sample(BaselineKind::Bootstrap, ds, 0, 1), std::invalid_argument);
}

TEST_CASE("independence baseline destroys cross-column dependence") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"c1","kind":"categorical","categories":["A","B","C","D"]},
    {"name":"c2","kind":"categorical","categories":["A","B","C","D"]}]})");
  Dataset ds(s);
  RngStream rng(24);
  for (int i = 0; i < 400; ++i) {
    const double c = static_cast<double>(rng.uniform_int(4));
    ds.append_row({c, c});  // perfectly correlated
  }
  const Dataset syn = baseline_fit_sample(BaselineKind::Independence, ds, 4000, 25);
  double match = 0.0;
  for (std::size_t r = 0; r < syn.rows(); ++r)
    if (syn.category(r, 0) == syn.category(r, 1)) match += 1.0;
  match /= static_cast<double>(syn.rows());
  // expected collision rate = sum p_i^2 (about 0.25 for near-uniform marginals)
  std::vector<double> p(4, 0.0);
  for (std::size_t r = 0; r < ds.rows(); ++r) p[static_cast<std::size_t>(ds.category(r, 0))] += 1.0;
  double collide = 0.0;
  for (double x : p) collide += (x / 400.0) * (x / 400.0);
  CHECK(std::abs(match - collide) < 0.05);
  CHECK(match < 0.6);  // far from the perfectly-correlated value 1.0
}

TEST_CASE("external synthetic ingestion") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"x","kind":"continuous"},
    {"name":"c","kind":"categorical","categories":["A","B"]}]})");
  std::istringstream good("c,x\nA,1.5\nB,2.5\n");  // permuted columns accepted
  const Dataset ds = load_external_synthetic(good, s);
  CHECK(ds.rows() == 2);
  CHECK(ds.cell(0, 0) == 1.5);
  CHECK(ds.category(1, 1) == 1);

  std::istringstream bad("x,c\n1,A\n2,Z\n3,Q\n4,B\n");
  CHECK_THROWS_WITH_AS(load_external_synthetic(bad, s),
                       doctest::Contains("2 offending row(s)"), std::runtime_error);
}
