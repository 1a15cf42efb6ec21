#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synthlab/schema.hpp"

namespace synthlab {

/// Typed tabular container. Cells are stored column-major as doubles:
/// continuous columns hold the value itself, categorical columns hold the
/// category index, and NaN marks a missing cell in either kind.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema) : schema_(std::move(schema)), cols_(schema_.size()) {}
  Dataset(Schema schema, std::vector<std::vector<double>> columns);

  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return n_; }
  std::size_t cols() const { return schema_.size(); }

  double cell(std::size_t row, std::size_t col) const { return cols_[col][row]; }
  bool missing(std::size_t row, std::size_t col) const { return std::isnan(cell(row, col)); }
  int category(std::size_t row, std::size_t col) const {
    return static_cast<int>(cell(row, col));
  }
  const std::vector<double>& column(std::size_t col) const { return cols_.at(col); }

  void append_row(const std::vector<double>& row);
  void set_cell(std::size_t row, std::size_t col, double v) { cols_[col][row] = v; }

  /// New dataset containing the given rows, in the given order.
  Dataset select(const std::vector<std::size_t>& indices) const;

  bool has_missing() const;

  /// Checks every cell against the schema (category range, finiteness).
  void validate() const;

  bool equals(const Dataset& other, double tol = 0.0) const;

 private:
  Schema schema_;
  std::size_t n_ = 0;
  std::vector<std::vector<double>> cols_;
};

// ---------------------------------------------------------------------------
// CSV I/O (RFC 4180, UTF-8, header row required)

/// Loads a CSV stream against a schema. Header columns may appear in any
/// order. Empty cells, "NaN" and "nan" become the missing marker. Unseen
/// category labels extend open columns and are rejected for closed ones.
Dataset load_csv(std::istream& in, const Schema& schema);
Dataset load_csv_file(const std::string& path, const Schema& schema);

/// Writes a dataset as CSV; continuous cells use 9 significant digits,
/// missing cells are empty.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv_file(const Dataset& ds, const std::string& path);

// ---------------------------------------------------------------------------
// Preprocessing

/// Mean-imputes continuous columns and mode-imputes categorical columns
/// (ties broken by schema category order). A fully missing column is an error.
Dataset impute_missing(const Dataset& ds);

enum class Scaling { ZScore, MinMax };

struct EncodedMatrix {
  Eigen::MatrixXd values;  // n x d, no missing entries
  struct Span {
    int begin = 0;
    int size = 0;
  };
  std::vector<Span> spans;  // per original column
  // per original column: (mean, sd) or (min, max); unused for categoricals
  std::vector<std::pair<double, double>> scale;
  Scaling scaling = Scaling::ZScore;
};

/// Fitted encoding: continuous scaling statistics plus one-hot layout. Fit on
/// one dataset, applicable to any schema-compatible dataset.
class Encoder {
 public:
  /// `categorical_weight` scales one-hot entries (metric spaces use 1/sqrt(2)
  /// so a single category flip contributes distance 1).
  static Encoder fit(const Dataset& ds, Scaling scaling, double categorical_weight = 1.0);
  EncodedMatrix apply(const Dataset& ds) const;
  std::size_t width() const { return width_; }

 private:
  Schema schema_;
  Scaling scaling_ = Scaling::ZScore;
  double cat_weight_ = 1.0;
  std::vector<std::pair<double, double>> scale_;
  std::vector<EncodedMatrix::Span> spans_;
  std::size_t width_ = 0;
};

/// One-hot/scaled encoding of a missing-free dataset.
EncodedMatrix encode(const Dataset& ds, Scaling scaling);

/// Disjoint train/test partition with |train| = round(fraction * n).
/// Deterministic per seed. When `stratify_col` >= 0, per-class proportions
/// are preserved within one row.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed,
                                  int stratify_col = -1);

/// Uniform sample without replacement of round(fraction * n) rows.
Dataset sample_fraction(const Dataset& ds, double fraction, std::uint64_t seed);

}  // namespace synthlab
