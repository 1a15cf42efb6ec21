#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthlab/classifiers.hpp"
#include "synthlab/dataset.hpp"
#include "synthlab/generators.hpp"
#include "synthlab/metrics.hpp"

namespace synthlab {

struct DatasetEntry {
  std::string id;
  std::string path;
  std::string schema_path;
  double sample_fraction = 1.0;
};

struct GeneratorEntry {
  std::string id;
  std::string kind;  // ctgan | bootstrap | independence | external
  GeneratorConfig ctgan;
  std::string external_path;
};

struct BenchmarkConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<GeneratorEntry> generators;
  std::vector<Family> families = {Family::DecisionTree, Family::RandomForest, Family::Gbt,
                                  Family::Knn};
  std::string target;
  int repetitions = 2;
  std::uint64_t seed = 0;
  nlohmann::ordered_json echo;  // config as parsed, replayed into the report

  static BenchmarkConfig from_json(const nlohmann::ordered_json& j);
  static BenchmarkConfig from_file(const std::string& path);
  void validate() const;
};

struct UtilityRow {
  std::string family;
  bool degenerate = false;  // single-class training labels
  double syn_accuracy = 0.0, syn_f1 = 0.0, syn_aucroc = 0.0;
  double real_accuracy = 0.0, real_f1 = 0.0, real_aucroc = 0.0;
};

std::vector<UtilityRow> utility_experiment(const Dataset& real_train, const Dataset& real_test,
                                           const Dataset& syn, int target_col,
                                           const std::vector<Family>& families,
                                           std::uint64_t seed);

struct CellResult {
  std::string dataset_id;
  std::string generator_id;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  // flat scalar metrics; keys shared across cells drive aggregation
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<UtilityRow> utility;
  double seconds = 0.0;
};

struct AggregateRow {
  std::string dataset_id;
  std::string generator_id;
  std::string metric;
  double mean = 0.0;
  std::optional<double> sem;  // null when only one repetition succeeded
};

struct Report {
  std::string format_version = "1";
  std::string tool_version;
  nlohmann::ordered_json config;
  std::vector<CellResult> cells;
  std::vector<AggregateRow> aggregates;

  bool any_failed() const;
};

extern const char* kToolVersion;

/// Executes every (dataset, generator, repetition) cell, in parallel up to
/// SYNTHLAB_THREADS, with per-cell derived seeds; failures are recorded and
/// do not abort the run. Output is deterministic for a fixed config.
Report run_benchmark(const BenchmarkConfig& config);

/// Writes report.json plus cells.csv and aggregates.csv under `dir`.
void emit_report(const Report& report, const std::string& dir);

nlohmann::ordered_json report_to_json(const Report& report);

int thread_budget();

}  // namespace synthlab
