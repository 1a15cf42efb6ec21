#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace synthlab {

enum class ColumnKind { Continuous, Categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<std::string> categories;  // categorical only, declared order
  bool target = false;
  bool open = false;  // categories to be inferred from data
};

/// Validated ordered list of column specifications. At most one column may be
/// flagged as the prediction target.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSpec> columns);

  /// Parses the JSON schema document `{columns:[{name,kind,categories?,target?}]}`.
  static Schema parse(const std::string& text);
  static Schema from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  std::size_t size() const { return cols_.size(); }
  const std::vector<ColumnSpec>& columns() const { return cols_; }
  const ColumnSpec& column(std::size_t i) const { return cols_.at(i); }

  /// Index of a column by name, -1 if absent.
  int index_of(const std::string& name) const;
  /// Index of the target column, -1 if none declared.
  int target_index() const;
  /// Index of a category label within a categorical column, -1 if absent.
  int category_index(std::size_t col, const std::string& label) const;

  /// Appends a category to an open categorical column.
  void add_category(std::size_t col, const std::string& label);
  void close_all();

  /// Width after one-hot encoding: #continuous + sum of category counts.
  std::size_t encoded_width() const;

  bool compatible_with(const Schema& other) const;

 private:
  void validate() const;
  std::vector<ColumnSpec> cols_;
};

}  // namespace synthlab
