#include "synthlab/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "synthlab/rng.hpp"

namespace synthlab {

const char* kToolVersion = "1.0.0";

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset strip_target(const Dataset& ds, int target_col) {
  std::vector<ColumnSpec> specs;
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    if (static_cast<int>(c) == target_col) continue;
    ColumnSpec s = ds.schema().column(c);
    s.target = false;
    specs.push_back(std::move(s));
    cols.push_back(ds.column(c));
  }
  return Dataset(Schema(std::move(specs)), std::move(cols));
}

std::vector<int> target_labels(const Dataset& ds, int target_col) {
  std::vector<int> y;
  y.reserve(ds.rows());
  for (double v : ds.column(static_cast<std::size_t>(target_col))) y.push_back(static_cast<int>(v));
  return y;
}

struct FittedEval {
  double accuracy = 0.0;
  double f1 = 0.0;
  double aucroc = 0.0;
};

FittedEval fit_and_eval(Family family, const Dataset& train_ds, const Dataset& test_ds,
                        int target_col, std::uint64_t seed) {
  const Dataset train_x = strip_target(train_ds, target_col);
  const Encoder enc = Encoder::fit(train_x, Scaling::ZScore);
  const Eigen::MatrixXd Xtr = enc.apply(train_x).values;
  const Eigen::MatrixXd Xte = enc.apply(strip_target(test_ds, target_col)).values;
  const std::vector<int> ytr = target_labels(train_ds, target_col);
  const std::vector<int> yte = target_labels(test_ds, target_col);

  const ClassifierSpec best = grid_search(family, ParamGrid{}, Xtr, ytr, 3, seed);
  const auto model = train(best, Xtr, ytr);
  FittedEval ev;
  const std::vector<int> yhat = model->predict(Xte);
  ev.accuracy = accuracy(yte, yhat);
  ev.f1 = f1_weighted(yte, yhat);
  ev.aucroc = aucroc_macro(yte, model->predict_proba(Xte), model->labels());
  return ev;
}

double env_thread_cap() {
  const char* v = std::getenv("SYNTHLAB_THREADS");
  if (!v) return 0.0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || n < 1) throw std::runtime_error("SYNTHLAB_THREADS must be a positive integer");
  return static_cast<double>(n);
}

Dataset generate_synthetic(const GeneratorEntry& gen, const Dataset& train, const Schema& schema,
                           int n, std::uint64_t seed) {
  if (gen.kind == "ctgan") {
    GeneratorConfig cfg = gen.ctgan;
    cfg.seed = seed;
    const CtganModel model = ctgan_fit(train, cfg);
    return ctgan_sample(model, n, RngStream(seed).child("sample").next_u64());
  }
  if (gen.kind == "bootstrap")
    return baseline_fit_sample(BaselineKind::Bootstrap, train, n, seed);
  if (gen.kind == "independence")
    return baseline_fit_sample(BaselineKind::Independence, train, n, seed);
  if (gen.kind == "external") return load_external_synthetic_file(gen.external_path, schema);
  throw std::runtime_error("unknown generator kind: " + gen.kind);
}

CellResult run_cell(const BenchmarkConfig& config, const DatasetEntry& de,
                    const GeneratorEntry& ge, int rep) {
  CellResult cell;
  cell.dataset_id = de.id;
  cell.generator_id = ge.id;
  cell.repetition = rep;
  cell.seed = RngStream(config.seed)
                  .child("cell")
                  .child(de.id)
                  .child(ge.id)
                  .child("rep", static_cast<std::uint64_t>(rep))
                  .next_u64();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Schema schema = Schema::parse(read_file(de.schema_path));
    Dataset full = load_csv_file(de.path, schema);
    schema = full.schema();  // open columns closed by the data
    if (full.has_missing()) full = impute_missing(full);
    if (de.sample_fraction < 1.0)
      full = sample_fraction(full, de.sample_fraction, RngStream(cell.seed).child("sub").next_u64());

    const int target_col = schema.index_of(config.target);
    if (target_col < 0) throw std::runtime_error("target column not found: " + config.target);

    const auto [train_ds, test_ds] =
        split(full, 0.7, RngStream(cell.seed).child("split").next_u64(), target_col);
    const Dataset syn = generate_synthetic(ge, train_ds, schema, static_cast<int>(full.rows()),
                                           RngStream(cell.seed).child("gen").next_u64());

    const ResemblanceReport rr = resemblance_report(train_ds, syn);
    const FidelityReport fr = quality(train_ds, syn);
    const double det = detection(train_ds, syn, RngStream(cell.seed).child("det").next_u64());
    const OodResult ood =
        ood_aucroc(syn, test_ds, target_col, RngStream(cell.seed).child("ood").next_u64());
    const double score = sdis(fr.quality, ood.mean_aucroc, det);

    cell.metrics = {
        {"wd_raw_mean", rr.wd_raw_mean},     {"wd_scaled_mean", rr.wd_scaled_mean},
        {"jsd_mean", rr.jsd_mean},           {"chi2_p_mean", rr.chi2_p_mean},
        {"alpha_precision", fr.alpha_precision},
        {"beta_recall", fr.beta_recall},     {"authenticity", fr.authenticity},
        {"quality", fr.quality},             {"detection", det},
        {"ood_aucroc", ood.mean_aucroc},     {"sdis", score},
    };
    cell.utility = utility_experiment(train_ds, test_ds, syn, target_col, config.families,
                                      RngStream(cell.seed).child("utility").next_u64());
    for (const UtilityRow& row : cell.utility) {
      if (row.degenerate) continue;
      cell.metrics.emplace_back(row.family + "_syn_accuracy", row.syn_accuracy);
      cell.metrics.emplace_back(row.family + "_syn_f1", row.syn_f1);
      cell.metrics.emplace_back(row.family + "_syn_aucroc", row.syn_aucroc);
      cell.metrics.emplace_back(row.family + "_real_accuracy", row.real_accuracy);
      cell.metrics.emplace_back(row.family + "_real_f1", row.real_f1);
      cell.metrics.emplace_back(row.family + "_real_aucroc", row.real_aucroc);
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
    cell.metrics.clear();
    cell.utility.clear();
  }
  cell.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

BenchmarkConfig BenchmarkConfig::from_json(const nlohmann::ordered_json& j) {
  BenchmarkConfig cfg;
  cfg.echo = j;
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
  for (const auto& d : j.at("datasets")) {
    DatasetEntry e;
    e.id = d.at("id").get<std::string>();
    e.path = d.at("path").get<std::string>();
    e.schema_path = d.at("schema").get<std::string>();
    if (d.contains("sample_fraction")) e.sample_fraction = d["sample_fraction"].get<double>();
    cfg.datasets.push_back(std::move(e));
  }
  for (const auto& g : j.at("generators")) {
    GeneratorEntry e;
    e.id = g.at("id").get<std::string>();
    e.kind = g.at("kind").get<std::string>();
    if (e.kind == "ctgan" && g.contains("config"))
      e.ctgan = GeneratorConfig::from_json(g["config"]);
    if (e.kind == "external") e.external_path = g.at("path").get<std::string>();
    cfg.generators.push_back(std::move(e));
  }
  cfg.target = j.at("target").get<std::string>();
  if (j.contains("repetitions")) cfg.repetitions = j["repetitions"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("families")) {
    cfg.families.clear();
    for (const auto& f : j["families"]) cfg.families.push_back(family_from_name(f.get<std::string>()));
  }
  cfg.validate();
  return cfg;
}

BenchmarkConfig BenchmarkConfig::from_file(const std::string& path) {
  return from_json(nlohmann::ordered_json::parse(read_file(path)));
}

void BenchmarkConfig::validate() const {
  if (repetitions < 1) throw std::runtime_error("repetitions must be >= 1");
  if (datasets.empty()) throw std::runtime_error("config needs at least one dataset");
  if (generators.empty()) throw std::runtime_error("config needs at least one generator");
  if (target.empty()) throw std::runtime_error("config needs a target column");
  std::set<std::string> ids;
  for (const auto& d : datasets) {
    if (!ids.insert("d:" + d.id).second) throw std::runtime_error("duplicate dataset id: " + d.id);
    if (!std::filesystem::exists(d.path)) throw std::runtime_error("missing file: " + d.path);
    if (!std::filesystem::exists(d.schema_path))
      throw std::runtime_error("missing file: " + d.schema_path);
    if (!(d.sample_fraction > 0.0 && d.sample_fraction <= 1.0))
      throw std::runtime_error("sample_fraction must be in (0, 1]");
  }
  for (const auto& g : generators) {
    if (!ids.insert("g:" + g.id).second)
      throw std::runtime_error("duplicate generator id: " + g.id);
    if (g.kind != "ctgan" && g.kind != "bootstrap" && g.kind != "independence" &&
        g.kind != "external")
      throw std::runtime_error("unknown generator kind: " + g.kind);
    if (g.kind == "ctgan") g.ctgan.validate();
    if (g.kind == "external" && !std::filesystem::exists(g.external_path))
      throw std::runtime_error("missing file: " + g.external_path);
  }
}

std::vector<UtilityRow> utility_experiment(const Dataset& real_train, const Dataset& real_test,
                                           const Dataset& syn, int target_col,
                                           const std::vector<Family>& families,
                                           std::uint64_t seed) {
  if (!real_train.schema().compatible_with(syn.schema()))
    throw std::invalid_argument("utility: schema mismatch");
  if (target_col < 0 || static_cast<std::size_t>(target_col) >= syn.cols())
    throw std::invalid_argument("utility: target column out of range");

  std::vector<UtilityRow> rows;
  for (Family f : families) {
    UtilityRow row;
    row.family = family_name(f);
    const std::uint64_t fseed = RngStream(seed).child(row.family).next_u64();
    try {
      // classifier sees 70% of the synthetic sample
      const auto [syn70, syn30] =
          split(syn, 0.7, RngStream(fseed).child("syn_split").next_u64(), target_col);
      (void)syn30;
      const FittedEval se = fit_and_eval(f, syn70, real_test, target_col,
                                         RngStream(fseed).child("syn").next_u64());
      row.syn_accuracy = se.accuracy;
      row.syn_f1 = se.f1;
      row.syn_aucroc = se.aucroc;
    } catch (const std::exception&) {
      row.degenerate = true;
    }
    try {
      const FittedEval re = fit_and_eval(f, real_train, real_test, target_col,
                                         RngStream(fseed).child("real").next_u64());
      row.real_accuracy = re.accuracy;
      row.real_f1 = re.f1;
      row.real_aucroc = re.aucroc;
    } catch (const std::exception&) {
      row.degenerate = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int thread_budget() {
  const double cap = env_thread_cap();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (cap > 0.0) return static_cast<int>(std::min<double>(cap, 64.0));
  return static_cast<int>(std::min<unsigned>(hw, 16u));
}

bool Report::any_failed() const {
  for (const CellResult& c : cells)
    if (!c.ok) return true;
  return false;
}

Report run_benchmark(const BenchmarkConfig& config) {
  struct CellJob {
    const DatasetEntry* dataset;
    const GeneratorEntry* generator;
    int rep;
  };
  std::vector<CellJob> jobs;
  for (const auto& d : config.datasets)
    for (const auto& g : config.generators)
      for (int r = 0; r < config.repetitions; ++r) jobs.push_back({&d, &g, r});

  std::vector<CellResult> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      cells[i] = run_cell(config, *jobs[i].dataset, *jobs[i].generator, jobs[i].rep);
    }
  };
  const int n_threads = std::min<int>(thread_budget(), static_cast<int>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Report report;
  report.tool_version = kToolVersion;
  report.config = config.echo;
  report.cells = std::move(cells);

  // aggregate per (dataset, generator, metric) over successful repetitions
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>>
      grouped;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> metric_order;
  for (const CellResult& c : report.cells) {
    if (!c.ok) continue;
    auto key = std::make_pair(c.dataset_id, c.generator_id);
    for (const auto& [name, value] : c.metrics) {
      auto& bucket = grouped[key][name];
      if (bucket.empty()) metric_order[key].push_back(name);
      bucket.push_back(value);
    }
  }
  for (const auto& d : config.datasets) {
    for (const auto& g : config.generators) {
      const auto key = std::make_pair(d.id, g.id);
      const auto it = grouped.find(key);
      if (it == grouped.end()) continue;
      for (const std::string& name : metric_order[key]) {
        const std::vector<double>& vals = it->second[name];
        AggregateRow row;
        row.dataset_id = d.id;
        row.generator_id = g.id;
        row.metric = name;
        double sum = 0.0;
        for (double v : vals) sum += v;
        row.mean = sum / static_cast<double>(vals.size());
        if (vals.size() > 1) {
          double ss = 0.0;
          for (double v : vals) ss += (v - row.mean) * (v - row.mean);
          const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
          row.sem = sd / std::sqrt(static_cast<double>(vals.size()));
        }
        report.aggregates.push_back(std::move(row));
      }
    }
  }
  return report;
}

nlohmann::ordered_json report_to_json(const Report& report) {
  nlohmann::ordered_json j;
  j["format_version"] = report.format_version;
  j["tool_version"] = report.tool_version;
  j["config"] = report.config;
  j["cells"] = nlohmann::ordered_json::array();
  for (const CellResult& c : report.cells) {
    nlohmann::ordered_json jc;
    jc["dataset"] = c.dataset_id;
    jc["generator"] = c.generator_id;
    jc["repetition"] = c.repetition;
    jc["seed"] = c.seed;
    jc["ok"] = c.ok;
    if (!c.ok) jc["error"] = c.error;
    nlohmann::ordered_json jm = nlohmann::ordered_json::object();
    for (const auto& [name, value] : c.metrics) {
      if (std::isnan(value))
        jm[name] = nullptr;
      else
        jm[name] = value;
    }
    jc["metrics"] = jm;
    nlohmann::ordered_json ju = nlohmann::ordered_json::array();
    for (const UtilityRow& u : c.utility) {
      nlohmann::ordered_json row;
      row["family"] = u.family;
      row["degenerate"] = u.degenerate;
      row["synthetic_trained"] = {
          {"accuracy", u.syn_accuracy}, {"f1_weighted", u.syn_f1}, {"aucroc", u.syn_aucroc}};
      row["real_trained"] = {
          {"accuracy", u.real_accuracy}, {"f1_weighted", u.real_f1}, {"aucroc", u.real_aucroc}};
      ju.push_back(std::move(row));
    }
    jc["utility"] = ju;
    // Wall-clock time stays out of the serialized report so identical runs
    // produce identical bytes; it remains available on CellResult.
    j["cells"].push_back(std::move(jc));
  }
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const AggregateRow& a : report.aggregates) {
    nlohmann::ordered_json ja;
    ja["dataset"] = a.dataset_id;
    ja["generator"] = a.generator_id;
    ja["metric"] = a.metric;
    if (std::isnan(a.mean))
      ja["mean"] = nullptr;
    else
      ja["mean"] = a.mean;
    if (a.sem)
      ja["sem"] = *a.sem;
    else
      ja["sem"] = nullptr;
    j["aggregates"].push_back(std::move(ja));
  }
  return j;
}

void emit_report(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/report.json");
    if (!out) throw std::runtime_error("cannot write " + dir + "/report.json");
    out << report_to_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(dir + "/cells.csv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/cells.csv");
    out << "dataset,generator,repetition,metric,value\n";
    for (const CellResult& c : report.cells) {
      for (const auto& [name, value] : c.metrics) {
        out << csv_quote(c.dataset_id) << ',' << csv_quote(c.generator_id) << ','
            << c.repetition << ',' << csv_quote(name) << ','
            << (std::isnan(value) ? "" : fmt_double(value)) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir + "/aggregates.csv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/aggregates.csv");
    out << "dataset,generator,metric,mean,sem\n";
    for (const AggregateRow& a : report.aggregates) {
      out << csv_quote(a.dataset_id) << ',' << csv_quote(a.generator_id) << ','
          << csv_quote(a.metric) << ',' << (std::isnan(a.mean) ? "" : fmt_double(a.mean)) << ','
          << (a.sem ? fmt_double(*a.sem) : "") << '\n';
    }
  }
}

}  // namespace synthlab
