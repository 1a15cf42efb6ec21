#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "synthlab/dataset.hpp"

namespace synthlab {

namespace {

// RFC 4180 record reader; handles quoted fields with embedded commas,
// quotes and newlines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // swallow; CRLF handled at '\n'
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
  if (any) {
    fields.push_back(std::move(field));
    return true;
  }
  return false;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NaN" || s == "nan"; }

}  // namespace

Dataset load_csv(std::istream& in, const Schema& schema) {
  std::vector<std::string> header;
  if (!read_record(in, header)) throw std::runtime_error("csv: empty input, header required");

  // map file column -> schema column (any order, all schema columns required)
  std::vector<int> col_of(header.size(), -1);
  std::vector<bool> seen(schema.size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const int s = schema.index_of(header[i]);
    if (s < 0) throw std::runtime_error("csv: header column '" + header[i] + "' not in schema");
    if (seen[static_cast<std::size_t>(s)])
      throw std::runtime_error("csv: duplicate header column '" + header[i] + "'");
    seen[static_cast<std::size_t>(s)] = true;
    col_of[i] = s;
  }
  for (std::size_t s = 0; s < schema.size(); ++s)
    if (!seen[s])
      throw std::runtime_error("csv: schema column '" + schema.column(s).name +
                               "' missing from header");

  Schema working = schema;
  Dataset ds(working);
  std::vector<std::vector<double>> cols(schema.size());
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_record(in, fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != header.size())
      throw std::runtime_error("csv: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::size_t c = static_cast<std::size_t>(col_of[i]);
      const auto& spec = working.column(c);
      const std::string& tok = fields[i];
      double v;
      if (is_missing_token(tok)) {
        v = Dataset::kMissing;
      } else if (spec.kind == ColumnKind::Continuous) {
        std::size_t pos = 0;
        try {
          v = std::stod(tok, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != tok.size())
          throw std::runtime_error("csv: row " + std::to_string(row) + ", column '" + spec.name +
                                   "': non-numeric value '" + tok + "'");
      } else {
        int k = working.category_index(c, tok);
        if (k < 0) {
          if (!spec.open)
            throw std::runtime_error("csv: row " + std::to_string(row) + ", column '" +
                                     spec.name + "': unseen category '" + tok + "'");
          working.add_category(c, tok);
          k = working.category_index(c, tok);
        }
        v = static_cast<double>(k);
      }
      cols[c].push_back(v);
    }
  }
  working.close_all();  // inferred category sets are final from here on
  return Dataset(std::move(working), std::move(cols));
}

Dataset load_csv_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  return load_csv(in, schema);
}

void write_csv(const Dataset& ds, std::ostream& out) {
  const Schema& schema = ds.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out << ',';
    write_field(out, schema.column(c).name);
  }
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out << ',';
      const double v = ds.cell(r, c);
      if (std::isnan(v)) continue;  // missing -> empty field
      if (schema.column(c).kind == ColumnKind::Continuous) {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        out << buf;
      } else {
        write_field(out, schema.column(c).categories.at(static_cast<std::size_t>(v)));
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("csv: write failure");
}

void write_csv_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  write_csv(ds, out);
}

}  // namespace synthlab
