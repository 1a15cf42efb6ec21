#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "synthlab/dataset.hpp"
#include "synthlab/schema.hpp"

using namespace synthlab;

namespace {

Schema two_col_schema() {
  return Schema::parse(R"({"columns":[
    {"name":"age","kind":"continuous"},
    {"name":"grade","kind":"categorical","categories":["A","B"]}]})");
}

Dataset mixed_dataset() {
  Dataset ds(two_col_schema());
  ds.append_row({12, 0});
  ds.append_row({13, 1});
  ds.append_row({14.5, 0});
  return ds;
}

}  // namespace

TEST_CASE("schema parse and encoded width") {
  const Schema s = two_col_schema();
  CHECK(s.size() == 2);
  CHECK(s.encoded_width() == 3);
  CHECK(s.column(1).categories == std::vector<std::string>{"A", "B"});
}

TEST_CASE("schema rejects two targets") {
  CHECK_THROWS_WITH_AS(Schema::parse(R"({"columns":[
      {"name":"a","kind":"categorical","categories":["x","y"],"target":true},
      {"name":"b","kind":"categorical","categories":["x","y"],"target":true}]})"),
                       doctest::Contains("multiple targets"), std::invalid_argument);
}

TEST_CASE("schema rejects duplicate names") {
  CHECK_THROWS_AS(Schema::parse(R"({"columns":[
      {"name":"a","kind":"continuous"},{"name":"a","kind":"continuous"}]})"),
                  std::invalid_argument);
}

TEST_CASE("open categorical columns inferred from data") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"grade","kind":"categorical"}]})");
  CHECK(s.column(0).open);
  std::istringstream csv("grade\nB\nA\nB\n");
  const Dataset ds = load_csv(csv, s);
  CHECK(ds.rows() == 3);
  // categories appear in first-seen order
  CHECK(ds.schema().column(0).categories == std::vector<std::string>{"B", "A"});
  CHECK(!ds.schema().column(0).open);
}

TEST_CASE("load_csv basics") {
  std::istringstream csv("age,grade\n12,A\n13,B\n");
  const Dataset ds = load_csv(csv, two_col_schema());
  CHECK(ds.rows() == 2);
  CHECK(ds.cell(0, 0) == 12.0);
  CHECK(ds.category(1, 1) == 1);
}

TEST_CASE("load_csv maps permuted headers") {
  std::istringstream csv("grade,age\nA,12\n");
  const Dataset ds = load_csv(csv, two_col_schema());
  CHECK(ds.cell(0, 0) == 12.0);
  CHECK(ds.category(0, 1) == 0);
}

TEST_CASE("load_csv reports bad continuous cell with location") {
  std::istringstream csv("age,grade\nx,A\n");
  CHECK_THROWS_WITH_AS(load_csv(csv, two_col_schema()), doctest::Contains("age"),
                       std::runtime_error);
}

TEST_CASE("load_csv missing markers") {
  std::istringstream csv("age,grade\n,B\nNaN,A\nnan,B\n");
  const Dataset ds = load_csv(csv, two_col_schema());
  CHECK(ds.missing(0, 0));
  CHECK(ds.missing(1, 0));
  CHECK(ds.missing(2, 0));
  CHECK(ds.category(0, 1) == 1);
}

TEST_CASE("load_csv rejects unseen category in closed schema") {
  std::istringstream csv("age,grade\n12,C\n");
  CHECK_THROWS_AS(load_csv(csv, two_col_schema()), std::runtime_error);
}

TEST_CASE("impute continuous mean") {
  Dataset ds(two_col_schema());
  ds.append_row({1, 0});
  ds.append_row({Dataset::kMissing, 0});
  ds.append_row({3, 1});
  const Dataset out = impute_missing(ds);
  CHECK(out.cell(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("impute categorical mode with tie-break") {
  Dataset ds(two_col_schema());
  ds.append_row({1, 0});
  ds.append_row({1, 0});
  ds.append_row({1, Dataset::kMissing});
  ds.append_row({1, 1});
  CHECK(impute_missing(ds).category(2, 1) == 0);

  Dataset tie(two_col_schema());
  tie.append_row({1, 0});
  tie.append_row({1, 1});
  tie.append_row({1, Dataset::kMissing});
  CHECK(impute_missing(tie).category(2, 1) == 0);  // tie goes to schema order
}

TEST_CASE("impute rejects fully missing column and is idempotent") {
  Dataset ds(two_col_schema());
  ds.append_row({Dataset::kMissing, 0});
  CHECK_THROWS_AS(impute_missing(ds), std::runtime_error);

  Dataset ok(two_col_schema());
  ok.append_row({5, Dataset::kMissing});
  ok.append_row({Dataset::kMissing, 1});
  const Dataset once = impute_missing(ok);
  CHECK(impute_missing(once).equals(once));
}

TEST_CASE("encode one-hot and scaling") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"age","kind":"continuous"},
    {"name":"grade","kind":"categorical","categories":["A","B","C"]}]})");
  Dataset ds(s);
  ds.append_row({0, 1});
  ds.append_row({10, 0});
  const EncodedMatrix mm = encode(ds, Scaling::MinMax);
  CHECK(mm.values(0, 0) == doctest::Approx(0.0));
  CHECK(mm.values(1, 0) == doctest::Approx(1.0));
  CHECK(mm.values(0, 1) == 0.0);  // grade=B -> [0,1,0]
  CHECK(mm.values(0, 2) == 1.0);
  CHECK(mm.values(0, 3) == 0.0);

  // every categorical block sums to exactly 1 with 0/1 entries
  for (int r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (int c = 1; c < 4; ++c) {
      CHECK((mm.values(r, c) == 0.0 || mm.values(r, c) == 1.0));
      sum += mm.values(r, c);
    }
    CHECK(sum == 1.0);
  }
}

TEST_CASE("zscore of constant column is zeros") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  ds.append_row({5});
  ds.append_row({5});
  ds.append_row({5});
  const EncodedMatrix z = encode(ds, Scaling::ZScore);
  CHECK(z.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode rejects missing cells") {
  Dataset ds(two_col_schema());
  ds.append_row({Dataset::kMissing, 0});
  CHECK_THROWS_AS(encode(ds, Scaling::ZScore), std::runtime_error);
}

TEST_CASE("split sizes, disjointness, determinism") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  for (int i = 0; i < 10; ++i) ds.append_row({static_cast<double>(i)});
  const auto [a, b] = split(ds, 0.7, 42);
  CHECK(a.rows() == 7);
  CHECK(b.rows() == 3);
  std::multiset<double> all;
  for (std::size_t r = 0; r < a.rows(); ++r) all.insert(a.cell(r, 0));
  for (std::size_t r = 0; r < b.rows(); ++r) all.insert(b.cell(r, 0));
  CHECK(all.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(all.count(i) == 1);

  const auto [a2, b2] = split(ds, 0.7, 42);
  CHECK(a.equals(a2));
  CHECK(b.equals(b2));
}

TEST_CASE("stratified split preserves class balance") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"x","kind":"continuous"},
    {"name":"y","kind":"categorical","categories":["n","p"],"target":true}]})");
  Dataset ds(s);
  for (int i = 0; i < 100; ++i) ds.append_row({static_cast<double>(i), i < 60 ? 0.0 : 1.0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto [tr, te] = split(ds, 0.7, seed, 1);
    CHECK(tr.rows() == 70);
    int class0 = 0;
    for (std::size_t r = 0; r < tr.rows(); ++r)
      if (tr.category(r, 1) == 0) ++class0;
    CHECK(class0 >= 41);
    CHECK(class0 <= 43);
  }
}

TEST_CASE("stratified split rejects a tiny stratum") {
  const Schema s = Schema::parse(R"({"columns":[
    {"name":"y","kind":"categorical","categories":["n","p"]}]})");
  Dataset ds(s);
  ds.append_row({0});
  ds.append_row({0});
  ds.append_row({1});
  CHECK_THROWS_AS(split(ds, 0.5, 1, 0), std::invalid_argument);
}

TEST_CASE("sample_fraction sizing matches rounding convention") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  for (int i = 0; i < 32593; ++i) ds.append_row({static_cast<double>(i)});
  CHECK(sample_fraction(ds, 0.10, 7).rows() == 3259);
  CHECK(sample_fraction(ds, 0.30, 7).rows() == 9778);

  Dataset small(s);
  for (int i = 0; i < 5; ++i) small.append_row({static_cast<double>(i)});
  const Dataset all = sample_fraction(small, 1.0, 3);
  CHECK(all.rows() == 5);
  std::multiset<double> vals;
  for (std::size_t r = 0; r < all.rows(); ++r) vals.insert(all.cell(r, 0));
  CHECK(vals == std::multiset<double>({0, 1, 2, 3, 4}));
}

TEST_CASE("csv round-trip") {
  const Dataset ds = mixed_dataset();
  std::ostringstream out;
  write_csv(ds, out);
  std::istringstream in(out.str());
  CHECK(load_csv(in, ds.schema()).equals(ds));
}

TEST_CASE("csv writes header-only file for empty dataset") {
  std::ostringstream out;
  write_csv(Dataset(two_col_schema()), out);
  CHECK(out.str() == "age,grade\n");
}

TEST_CASE("csv precision survives a round-trip") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"x","kind":"continuous"}]})");
  Dataset ds(s);
  ds.append_row({1.0 / 3.0});
  std::ostringstream out;
  write_csv(ds, out);
  std::istringstream in(out.str());
  const Dataset back = load_csv(in, s);
  CHECK(std::abs(back.cell(0, 0) - 1.0 / 3.0) < 1e-9);
}

TEST_CASE("csv quotes fields that need it") {
  const Schema s = Schema::parse(R"({"columns":[{"name":"note","kind":"categorical"}]})");
  std::istringstream in("note\n\"a,b\"\n\"say \"\"hi\"\"\"\nplain\n");
  const Dataset ds = load_csv(in, s);
  CHECK(ds.schema().column(0).categories ==
        std::vector<std::string>{"a,b", "say \"hi\"", "plain"});
  std::ostringstream out;
  write_csv(ds, out);
  std::istringstream in2(out.str());
  CHECK(load_csv(in2, ds.schema()).equals(ds));
}
