#include "synthlab/schema.hpp"

#include <set>
#include <stdexcept>

namespace synthlab {

Schema::Schema(std::vector<ColumnSpec> columns) : cols_(std::move(columns)) { validate(); }

void Schema::validate() const {
  std::set<std::string> names;
  int targets = 0;
  for (const auto& c : cols_) {
    if (c.name.empty()) throw std::invalid_argument("schema: empty column name");
    if (!names.insert(c.name).second)
      throw std::invalid_argument("schema: duplicate column name '" + c.name + "'");
    if (c.target) ++targets;
    if (c.kind == ColumnKind::Categorical && !c.open && c.categories.empty())
      throw std::invalid_argument("schema: categorical column '" + c.name +
                                  "' has an empty category list");
    if (c.kind == ColumnKind::Categorical) {
      std::set<std::string> cats(c.categories.begin(), c.categories.end());
      if (cats.size() != c.categories.size())
        throw std::invalid_argument("schema: duplicate category in column '" + c.name + "'");
    }
    if (c.kind == ColumnKind::Continuous && !c.categories.empty())
      throw std::invalid_argument("schema: continuous column '" + c.name + "' lists categories");
  }
  if (targets > 1) throw std::invalid_argument("schema: multiple targets");
}

Schema Schema::parse(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("schema: invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

Schema Schema::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array())
    throw std::invalid_argument("schema: expected object with a 'columns' array");
  std::vector<ColumnSpec> cols;
  for (const auto& jc : doc["columns"]) {
    ColumnSpec c;
    c.name = jc.at("name").get<std::string>();
    const std::string kind = jc.at("kind").get<std::string>();
    if (kind == "continuous") {
      c.kind = ColumnKind::Continuous;
    } else if (kind == "categorical") {
      c.kind = ColumnKind::Categorical;
      if (jc.contains("categories")) {
        for (const auto& cat : jc["categories"]) c.categories.push_back(cat.get<std::string>());
      } else {
        c.open = true;  // categories inferred later from data
      }
    } else {
      throw std::invalid_argument("schema: unknown kind '" + kind + "' for column '" + c.name +
                                  "'");
    }
    c.target = jc.value("target", false);
    cols.push_back(std::move(c));
  }
  return Schema(std::move(cols));
}

nlohmann::json Schema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : cols_) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["kind"] = c.kind == ColumnKind::Continuous ? "continuous" : "categorical";
    if (c.kind == ColumnKind::Categorical) jc["categories"] = c.categories;
    if (c.target) jc["target"] = true;
    cols.push_back(jc);
  }
  return nlohmann::json{{"columns", cols}};
}

int Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < cols_.size(); ++i)
    if (cols_[i].name == name) return static_cast<int>(i);
  return -1;
}

int Schema::target_index() const {
  for (std::size_t i = 0; i < cols_.size(); ++i)
    if (cols_[i].target) return static_cast<int>(i);
  return -1;
}

int Schema::category_index(std::size_t col, const std::string& label) const {
  const auto& cats = cols_.at(col).categories;
  for (std::size_t i = 0; i < cats.size(); ++i)
    if (cats[i] == label) return static_cast<int>(i);
  return -1;
}

void Schema::add_category(std::size_t col, const std::string& label) {
  auto& c = cols_.at(col);
  if (!c.open)
    throw std::invalid_argument("schema: cannot extend closed column '" + c.name + "'");
  c.categories.push_back(label);
}

void Schema::close_all() {
  for (auto& c : cols_) c.open = false;
}

std::size_t Schema::encoded_width() const {
  std::size_t d = 0;
  for (const auto& c : cols_) d += c.kind == ColumnKind::Continuous ? 1 : c.categories.size();
  return d;
}

bool Schema::compatible_with(const Schema& other) const {
  if (cols_.size() != other.cols_.size()) return false;
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    if (cols_[i].name != other.cols_[i].name || cols_[i].kind != other.cols_[i].kind ||
        cols_[i].categories != other.cols_[i].categories)
      return false;
  }
  return true;
}

}  // namespace synthlab
