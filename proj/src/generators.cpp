#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "synthlab/generators.hpp"

namespace synthlab {

void GeneratorConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("generator config: iterations must be >= 1");
  if (batch_size < 2 || batch_size % 2 != 0)
    throw std::invalid_argument("generator config: batch_size must be even and positive");
  if (!(lr > 0.0)) throw std::invalid_argument("generator config: lr must be > 0");
  if (noise_dim < 1) throw std::invalid_argument("generator config: noise_dim must be >= 1");
  if (max_modes < 1) throw std::invalid_argument("generator config: max_modes must be >= 1");
  if (hidden.empty()) throw std::invalid_argument("generator config: hidden sizes required");
  if (pac < 1) throw std::invalid_argument("generator config: pac must be >= 1");
  if (batch_size % pac != 0)
    throw std::invalid_argument("generator config: batch_size must be a multiple of pac");
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.iterations = j.value("iterations", c.iterations);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.noise_dim = j.value("noise_dim", c.noise_dim);
  if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<int>>();
  c.max_modes = j.value("max_modes", c.max_modes);
  c.gp_weight = j.value("gp_weight", c.gp_weight);
  c.pac = j.value("pac", c.pac);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json GeneratorConfig::to_json() const {
  return nlohmann::json{{"iterations", iterations}, {"batch_size", batch_size},
                        {"lr", lr},                 {"noise_dim", noise_dim},
                        {"hidden", hidden},         {"max_modes", max_modes},
                        {"gp_weight", gp_weight},   {"pac", pac},
                        {"seed", seed}};
}

ModeEntry fit_mode_normalizer(const std::vector<double>& values, int max_modes, RngStream rng) {
  if (values.empty()) throw std::invalid_argument("mode normalizer: empty column");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) X(static_cast<Eigen::Index>(i), 0) = values[i];

  const std::set<double> distinct(values.begin(), values.end());
  const int cap = distinct.size() < 2
                      ? 1
                      : std::min<int>(max_modes, static_cast<int>(distinct.size()));

  ModeEntry best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cap; ++k) {
    if (static_cast<Eigen::Index>(k) > X.rows()) break;
    GmmModel m = gmm_fit(X, k, rng.child("gmm", static_cast<std::uint64_t>(k)));
    const double bic = gmm_bic(m, X);
    if (bic < best_bic) {
      best_bic = bic;
      best.gmm = std::move(m);
      best.n_modes = k;
    }
  }
  return best;
}

std::pair<double, int> mode_normalize(const ModeEntry& entry, double value, RngStream& rng) {
  if (!std::isfinite(value)) throw std::invalid_argument("mode_normalize: non-finite value");
  Eigen::RowVectorXd x(1);
  x(0) = value;
  int mode = 0;
  if (entry.n_modes > 1) {
    const Eigen::VectorXd r = gmm_responsibilities(entry.gmm, x);
    std::vector<double> w(r.data(), r.data() + r.size());
    mode = static_cast<int>(rng.pick_weighted(w));
  }
  const double mu = entry.gmm.means(mode, 0);
  const double sd = std::sqrt(entry.gmm.vars(mode, 0));
  const double alpha = std::clamp((value - mu) / (4.0 * sd), -1.0, 1.0);
  return {alpha, mode};
}

double mode_denormalize(const ModeEntry& entry, double alpha, int mode) {
  const double mu = entry.gmm.means(mode, 0);
  const double sd = std::sqrt(entry.gmm.vars(mode, 0));
  return mu + 4.0 * sd * alpha;
}

CondSampler CondSampler::build(const Dataset& ds) {
  CondSampler cs;
  const Schema& schema = ds.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema.column(c).kind != ColumnKind::Categorical) continue;
    std::vector<double> counts(schema.column(c).categories.size(), 0.0);
    for (double v : ds.column(c)) {
      if (std::isnan(v)) throw std::invalid_argument("cond sampler: missing cells present");
      counts[static_cast<std::size_t>(v)] += 1.0;
    }
    std::vector<double> lw(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) lw[k] = std::log1p(counts[k]);
    cs.columns.push_back(static_cast<int>(c));
    cs.block_begin.push_back(cs.width);
    cs.width += static_cast<int>(counts.size());
    cs.log_weights.push_back(std::move(lw));
  }
  return cs;
}

std::pair<int, int> CondSampler::sample(RngStream& rng) const {
  if (columns.empty()) return {-1, -1};
  const int slot = static_cast<int>(rng.uniform_int(columns.size()));
  const int cat = static_cast<int>(rng.pick_weighted(log_weights[static_cast<std::size_t>(slot)]));
  return {slot, cat};
}

std::pair<int, int> CondSampler::sample_original(RngStream& rng) const {
  if (columns.empty()) return {-1, -1};
  const int slot = static_cast<int>(rng.uniform_int(columns.size()));
  // invert the log1p stored at build time to recover the raw counts
  std::vector<double> counts(log_weights[static_cast<std::size_t>(slot)].size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    counts[k] = std::expm1(log_weights[static_cast<std::size_t>(slot)][k]);
  const int cat = static_cast<int>(rng.pick_weighted(counts));
  return {slot, cat};
}

double CondSampler::probability(int slot, int category) const {
  const auto& w = log_weights.at(static_cast<std::size_t>(slot));
  double total = 0.0;
  for (double x : w) total += x;
  return w.at(static_cast<std::size_t>(category)) / total;
}

Dataset baseline_fit_sample(BaselineKind kind, const Dataset& train, int n, std::uint64_t seed) {
  if (train.rows() == 0) throw std::invalid_argument("baseline: empty training data");
  if (n < 1) throw std::invalid_argument("baseline: n must be >= 1");
  RngStream rng = RngStream(seed).child(kind == BaselineKind::Bootstrap ? "bootstrap"
                                                                        : "independence");
  if (kind == BaselineKind::Bootstrap) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = rng.uniform_int(train.rows());
    return train.select(idx);
  }
  std::vector<std::vector<double>> cols(train.cols());
  for (std::size_t c = 0; c < train.cols(); ++c) {
    cols[c].resize(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r)
      cols[c][static_cast<std::size_t>(r)] = train.column(c)[rng.uniform_int(train.rows())];
  }
  return Dataset(train.schema(), std::move(cols));
}

Dataset load_external_synthetic(std::istream& in, const Schema& schema) {
  // Load with open categorical columns so every row parses, then validate
  // against the declared category sets to report how many rows offend.
  std::vector<ColumnSpec> open_cols = schema.columns();
  std::vector<std::size_t> declared(open_cols.size(), 0);
  for (std::size_t c = 0; c < open_cols.size(); ++c) {
    declared[c] = open_cols[c].categories.size();
    if (open_cols[c].kind == ColumnKind::Categorical) open_cols[c].open = true;
  }
  Dataset ds = load_csv(in, Schema(open_cols));

  std::size_t offending = 0;
  std::string first_detail;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c) {
      const double v = ds.cell(r, c);
      const bool bad_cat = !std::isnan(v) &&
                           schema.column(c).kind == ColumnKind::Categorical &&
                           v >= static_cast<double>(declared[c]);
      if (std::isnan(v) || bad_cat) {
        ++offending;
        if (first_detail.empty())
          first_detail = "first at row " + std::to_string(r + 1) + ", column '" +
                         schema.column(c).name + "'";
        break;
      }
    }
  }
  if (offending > 0)
    throw std::runtime_error("external synthetic rejected: " + std::to_string(offending) +
                             " offending row(s); " + first_detail);

  Schema closed = schema;
  closed.close_all();
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) cols.push_back(ds.column(c));
  Dataset out(closed, std::move(cols));
  out.validate();
  return out;
}

Dataset load_external_synthetic_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("external synthetic: cannot open '" + path + "'");
  return load_external_synthetic(in, schema);
}

}  // namespace synthlab
