#include "synthlab/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "synthlab/rng.hpp"

namespace synthlab {

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), cols_(std::move(columns)) {
  if (cols_.size() != schema_.size())
    throw std::invalid_argument("dataset: column count does not match schema");
  n_ = cols_.empty() ? 0 : cols_[0].size();
  for (const auto& c : cols_)
    if (c.size() != n_) throw std::invalid_argument("dataset: ragged columns");
}

void Dataset::append_row(const std::vector<double>& row) {
  if (row.size() != schema_.size())
    throw std::invalid_argument("dataset: row width does not match schema");
  for (std::size_t c = 0; c < row.size(); ++c) cols_[c].push_back(row[c]);
  ++n_;
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
  Dataset out(schema_);
  out.n_ = indices.size();
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    out.cols_[c].reserve(indices.size());
    for (std::size_t i : indices) out.cols_[c].push_back(cols_[c].at(i));
  }
  return out;
}

bool Dataset::has_missing() const {
  for (const auto& col : cols_)
    for (double v : col)
      if (std::isnan(v)) return true;
  return false;
}

void Dataset::validate() const {
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    const auto& spec = schema_.column(c);
    for (std::size_t r = 0; r < n_; ++r) {
      const double v = cols_[c][r];
      if (std::isnan(v)) continue;
      if (spec.kind == ColumnKind::Categorical) {
        const double idx = std::floor(v);
        if (idx != v || v < 0 || v >= static_cast<double>(spec.categories.size()))
          throw std::runtime_error("dataset: invalid category index in column '" + spec.name +
                                   "' at row " + std::to_string(r + 1));
      } else if (!std::isfinite(v)) {
        throw std::runtime_error("dataset: non-finite value in column '" + spec.name +
                                 "' at row " + std::to_string(r + 1));
      }
    }
  }
}

bool Dataset::equals(const Dataset& other, double tol) const {
  if (n_ != other.n_ || cols_.size() != other.cols_.size()) return false;
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    for (std::size_t r = 0; r < n_; ++r) {
      const double a = cols_[c][r], b = other.cols_[c][r];
      if (std::isnan(a) && std::isnan(b)) continue;
      if (std::isnan(a) != std::isnan(b)) return false;
      if (std::abs(a - b) > tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

Dataset impute_missing(const Dataset& ds) {
  const Schema& schema = ds.schema();
  std::vector<std::vector<double>> cols(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    const auto& src = ds.column(c);
    double fill = 0.0;
    if (spec.kind == ColumnKind::Continuous) {
      double sum = 0.0;
      std::size_t count = 0;
      for (double v : src)
        if (!std::isnan(v)) {
          sum += v;
          ++count;
        }
      if (count == 0 && ds.rows() > 0)
        throw std::runtime_error("impute: column '" + spec.name + "' is entirely missing");
      fill = count > 0 ? sum / static_cast<double>(count) : 0.0;
    } else {
      std::vector<std::size_t> counts(spec.categories.size(), 0);
      std::size_t seen = 0;
      for (double v : src)
        if (!std::isnan(v)) {
          ++counts[static_cast<std::size_t>(v)];
          ++seen;
        }
      if (seen == 0 && ds.rows() > 0)
        throw std::runtime_error("impute: column '" + spec.name + "' is entirely missing");
      // modal category, ties broken by schema order
      std::size_t best = 0;
      for (std::size_t k = 1; k < counts.size(); ++k)
        if (counts[k] > counts[best]) best = k;
      fill = static_cast<double>(best);
    }
    cols[c] = src;
    for (double& v : cols[c])
      if (std::isnan(v)) v = fill;
  }
  return Dataset(schema, std::move(cols));
}

Encoder Encoder::fit(const Dataset& ds, Scaling scaling, double categorical_weight) {
  if (ds.has_missing()) throw std::runtime_error("encode: dataset has missing cells");
  Encoder enc;
  enc.schema_ = ds.schema();
  enc.scaling_ = scaling;
  enc.cat_weight_ = categorical_weight;
  int pos = 0;
  for (std::size_t c = 0; c < enc.schema_.size(); ++c) {
    const auto& spec = enc.schema_.column(c);
    if (spec.kind == ColumnKind::Continuous) {
      const auto& col = ds.column(c);
      double a = 0.0, b = 0.0;
      if (scaling == Scaling::ZScore) {
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= std::max<std::size_t>(col.size(), 1);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= std::max<std::size_t>(col.size(), 1);
        a = mean;
        b = std::sqrt(var);
      } else {
        a = col.empty() ? 0.0 : *std::min_element(col.begin(), col.end());
        b = col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
      }
      enc.scale_.emplace_back(a, b);
      enc.spans_.push_back({pos, 1});
      pos += 1;
    } else {
      enc.scale_.emplace_back(0.0, 0.0);
      enc.spans_.push_back({pos, static_cast<int>(spec.categories.size())});
      pos += static_cast<int>(spec.categories.size());
    }
  }
  enc.width_ = static_cast<std::size_t>(pos);
  return enc;
}

EncodedMatrix Encoder::apply(const Dataset& ds) const {
  if (!ds.schema().compatible_with(schema_))
    throw std::runtime_error("encode: schema mismatch");
  if (ds.has_missing()) throw std::runtime_error("encode: dataset has missing cells");
  EncodedMatrix out;
  out.scaling = scaling_;
  out.spans = spans_;
  out.scale = scale_;
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.rows()),
                                     static_cast<Eigen::Index>(width_));
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    const auto& spec = schema_.column(c);
    const auto& span = spans_[c];
    const auto& col = ds.column(c);
    if (spec.kind == ColumnKind::Continuous) {
      const auto [a, b] = scale_[c];
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        double v;
        if (scaling_ == Scaling::ZScore) {
          v = b > 0.0 ? (col[r] - a) / b : 0.0;  // zero-variance column -> zeros
        } else {
          v = b > a ? (col[r] - a) / (b - a) : 0.0;
        }
        out.values(static_cast<Eigen::Index>(r), span.begin) = v;
      }
    } else {
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        const int k = static_cast<int>(col[r]);
        out.values(static_cast<Eigen::Index>(r), span.begin + k) = cat_weight_;
      }
    }
  }
  return out;
}

EncodedMatrix encode(const Dataset& ds, Scaling scaling) {
  return Encoder::fit(ds, scaling).apply(ds);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed,
                                  int stratify_col) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: train_fraction must be in (0,1)");
  if (ds.rows() < 2) throw std::invalid_argument("split: need at least 2 rows");
  const std::size_t n = ds.rows();
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  RngStream rng = RngStream(seed).child("split");

  std::vector<std::size_t> train_idx, test_idx;
  if (stratify_col < 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  } else {
    const auto& spec = ds.schema().column(static_cast<std::size_t>(stratify_col));
    if (spec.kind != ColumnKind::Categorical)
      throw std::invalid_argument("split: stratify column must be categorical");
    std::vector<std::vector<std::size_t>> strata(spec.categories.size());
    for (std::size_t r = 0; r < n; ++r) {
      const double v = ds.cell(r, static_cast<std::size_t>(stratify_col));
      if (std::isnan(v)) throw std::invalid_argument("split: missing value in stratify column");
      strata[static_cast<std::size_t>(v)].push_back(r);
    }
    // per-stratum floor counts, remainder assigned by largest fractional part
    std::vector<std::size_t> take(strata.size(), 0);
    std::vector<std::pair<double, std::size_t>> frac;
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < strata.size(); ++s) {
      if (strata[s].empty()) continue;
      if (strata[s].size() < 2)
        throw std::invalid_argument("split: stratum '" + spec.categories[s] +
                                    "' has fewer than 2 rows");
      const double want = train_fraction * static_cast<double>(strata[s].size());
      take[s] = static_cast<std::size_t>(std::floor(want));
      assigned += take[s];
      frac.emplace_back(want - std::floor(want), s);
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; assigned < n_train && i < frac.size(); ++i) {
      ++take[frac[i].second];
      ++assigned;
    }
    for (std::size_t s = 0; s < strata.size(); ++s) {
      rng.shuffle(strata[s]);
      for (std::size_t i = 0; i < strata[s].size(); ++i)
        (i < take[s] ? train_idx : test_idx).push_back(strata[s][i]);
    }
  }
  return {ds.select(train_idx), ds.select(test_idx)};
}

Dataset sample_fraction(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("sample_fraction: fraction must be in (0,1]");
  std::vector<std::size_t> order(ds.rows());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng = RngStream(seed).child("sample_fraction");
  rng.shuffle(order);
  const std::size_t take =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.rows())));
  order.resize(take);
  return ds.select(order);
}

}  // namespace synthlab
