#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "synthlab/benchmark.hpp"
#include "synthlab/classifiers.hpp"
#include "synthlab/dataset.hpp"
#include "synthlab/generators.hpp"
#include "synthlab/metrics.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/tsne.hpp"

namespace {

using synthlab::Dataset;
using synthlab::Schema;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load(const std::string& csv_path, const std::string& schema_path) {
  return synthlab::load_csv_file(csv_path, Schema::parse(read_file(schema_path)));
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

int cmd_inspect(const std::string& data_path, const std::string& schema_path) {
  const Dataset ds = load(data_path, schema_path);
  ds.validate();
  nlohmann::ordered_json j;
  j["rows"] = ds.rows();
  j["columns"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    const auto& spec = ds.schema().column(c);
    nlohmann::ordered_json jc;
    jc["name"] = spec.name;
    std::size_t missing = 0;
    for (std::size_t r = 0; r < ds.rows(); ++r)
      if (ds.missing(r, c)) ++missing;
    jc["missing"] = missing;
    if (spec.kind == synthlab::ColumnKind::Continuous) {
      jc["kind"] = "continuous";
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
      std::size_t n = 0;
      for (double v : ds.column(c)) {
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++n;
      }
      if (n > 0) {
        jc["min"] = lo;
        jc["max"] = hi;
        jc["mean"] = sum / static_cast<double>(n);
      }
    } else {
      jc["kind"] = "categorical";
      nlohmann::ordered_json counts = nlohmann::ordered_json::object();
      std::vector<std::size_t> tally(spec.categories.size(), 0);
      for (double v : ds.column(c))
        if (!std::isnan(v)) ++tally[static_cast<std::size_t>(v)];
      for (std::size_t k = 0; k < spec.categories.size(); ++k)
        counts[spec.categories[k]] = tally[k];
      jc["counts"] = counts;
      if (spec.target) jc["target"] = true;
    }
    j["columns"].push_back(std::move(jc));
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_generate(const std::string& model, const std::string& input, const std::string& schema_path,
                 const std::string& out, std::uint64_t seed, int iterations, int batch_size,
                 double lr) {
  Dataset train = load(input, schema_path);
  if (train.has_missing()) train = synthlab::impute_missing(train);
  const int n = static_cast<int>(train.rows());
  Dataset syn;
  if (model == "ctgan") {
    synthlab::GeneratorConfig cfg;
    cfg.iterations = iterations;
    cfg.batch_size = batch_size;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.validate();
    const auto fitted = synthlab::ctgan_fit(train, cfg);
    syn = synthlab::ctgan_sample(fitted, n, synthlab::RngStream(seed).child("sample").next_u64());
  } else if (model == "bootstrap") {
    syn = synthlab::baseline_fit_sample(synthlab::BaselineKind::Bootstrap, train, n, seed);
  } else if (model == "independence") {
    syn = synthlab::baseline_fit_sample(synthlab::BaselineKind::Independence, train, n, seed);
  } else {
    throw std::runtime_error("unknown model: " + model);
  }
  synthlab::write_csv_file(syn, out);
  return 0;
}

int cmd_evaluate(const std::string& real_path, const std::string& syn_path,
                 const std::string& schema_path, const std::string& target, std::uint64_t seed,
                 const std::string& out_dir) {
  Dataset real = load(real_path, schema_path);
  if (real.has_missing()) real = synthlab::impute_missing(real);
  const Dataset syn = synthlab::load_external_synthetic_file(syn_path, real.schema());
  const int target_col = real.schema().index_of(target);
  if (target_col < 0) throw std::runtime_error("target column not found: " + target);

  const auto [train_ds, test_ds] =
      synthlab::split(real, 0.7, synthlab::RngStream(seed).child("split").next_u64(), target_col);
  const auto rr = synthlab::resemblance_report(train_ds, syn);
  const auto fr = synthlab::quality(train_ds, syn);
  const double det =
      synthlab::detection(train_ds, syn, synthlab::RngStream(seed).child("det").next_u64());
  const auto ood = synthlab::ood_aucroc(syn, test_ds, target_col,
                                        synthlab::RngStream(seed).child("ood").next_u64());

  nlohmann::ordered_json j;
  auto put = [](nlohmann::ordered_json& obj, const char* key, double v) {
    if (std::isnan(v))
      obj[key] = nullptr;
    else
      obj[key] = v;
  };
  nlohmann::ordered_json res;
  res["wd_raw"] = rr.wd_raw;
  res["wd_scaled"] = rr.wd_scaled;
  res["jsd"] = rr.jsd;
  res["chi2_p"] = rr.chi2_p;
  put(res, "wd_raw_mean", rr.wd_raw_mean);
  put(res, "wd_scaled_mean", rr.wd_scaled_mean);
  put(res, "jsd_mean", rr.jsd_mean);
  put(res, "chi2_p_mean", rr.chi2_p_mean);
  j["resemblance"] = res;
  j["fidelity"] = {{"alpha_precision", fr.alpha_precision},
                   {"beta_recall", fr.beta_recall},
                   {"authenticity", fr.authenticity},
                   {"quality", fr.quality}};
  j["detection"] = det;
  j["ood"] = {{"mean_aucroc", ood.mean_aucroc},
              {"per_classifier", ood.per_classifier},
              {"degenerate_classes", ood.degenerate_classes}};
  j["sdis"] = synthlab::sdis(fr.quality, ood.mean_aucroc, det);
  std::filesystem::create_directories(out_dir);
  write_json(j, out_dir + "/evaluation.json");
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_utility(const std::string& real_path, const std::string& syn_path,
                const std::string& schema_path, const std::string& target,
                const std::vector<std::string>& family_names, std::uint64_t seed,
                const std::string& out_dir) {
  Dataset real = load(real_path, schema_path);
  if (real.has_missing()) real = synthlab::impute_missing(real);
  const Dataset syn = synthlab::load_external_synthetic_file(syn_path, real.schema());
  const int target_col = real.schema().index_of(target);
  if (target_col < 0) throw std::runtime_error("target column not found: " + target);

  std::vector<synthlab::Family> families;
  for (const std::string& f : family_names) families.push_back(synthlab::family_from_name(f));

  const auto [train_ds, test_ds] =
      synthlab::split(real, 0.7, synthlab::RngStream(seed).child("split").next_u64(), target_col);
  const auto rows = synthlab::utility_experiment(train_ds, test_ds, syn, target_col, families,
                                                 synthlab::RngStream(seed).child("utility").next_u64());

  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["family"] = r.family;
    row["degenerate"] = r.degenerate;
    row["synthetic_trained"] = {
        {"accuracy", r.syn_accuracy}, {"f1_weighted", r.syn_f1}, {"aucroc", r.syn_aucroc}};
    row["real_trained"] = {
        {"accuracy", r.real_accuracy}, {"f1_weighted", r.real_f1}, {"aucroc", r.real_aucroc}};
    j.push_back(std::move(row));
  }
  std::filesystem::create_directories(out_dir);
  write_json(j, out_dir + "/utility.json");
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir) {
  const auto config = synthlab::BenchmarkConfig::from_file(config_path);
  const auto report = synthlab::run_benchmark(config);
  synthlab::emit_report(report, out_dir);
  if (report.any_failed()) {
    for (const auto& c : report.cells)
      if (!c.ok)
        std::cerr << "cell failed: " << c.dataset_id << "/" << c.generator_id << " rep "
                  << c.repetition << ": " << c.error << '\n';
    return 1;
  }
  return 0;
}

int cmd_project(const std::string& input, const std::string& schema_path, const std::string& joint,
                double perplexity, int iters, std::uint64_t seed, const std::string& out) {
  Dataset real = load(input, schema_path);
  if (real.has_missing()) real = synthlab::impute_missing(real);
  const synthlab::Encoder enc =
      synthlab::Encoder::fit(real, synthlab::Scaling::ZScore, 1.0 / std::sqrt(2.0));
  Eigen::MatrixXd X = enc.apply(real).values;
  Eigen::Index n_real = X.rows();
  if (!joint.empty()) {
    const Dataset syn = synthlab::load_external_synthetic_file(joint, real.schema());
    const Eigen::MatrixXd Xs = enc.apply(syn).values;
    Eigen::MatrixXd both(X.rows() + Xs.rows(), X.cols());
    both << X, Xs;
    X = std::move(both);
  }
  const auto result = synthlab::tsne_project(X, perplexity, iters, seed);

  std::ofstream fout(out);
  if (!fout) throw std::runtime_error("cannot write " + out);
  fout << "x,y,origin\n";
  char buf[96];
  for (Eigen::Index i = 0; i < result.coords.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%s", result.coords(i, 0), result.coords(i, 1),
                  i < n_real ? "real" : "synthetic");
    fout << buf << '\n';
  }
  std::ofstream klog(out + ".kl.csv");
  if (!klog) throw std::runtime_error("cannot write " + out + ".kl.csv");
  klog << "iteration,kl\n";
  for (std::size_t i = 0; i < result.kl_log.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g", i + 1, result.kl_log[i]);
    klog << buf << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic tabular data generation and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", synthlab::kToolVersion);

  std::string data_path, schema_path, out_path, model, real_path, syn_path, target, config_path,
      joint_path;
  std::vector<std::string> families = {"decision_tree", "random_forest", "gbt", "knn"};
  std::uint64_t seed = 0;
  int iterations = 2000, batch_size = 200, iters = 500;
  double lr = 0.001, perplexity = 30.0;

  auto* inspect = app.add_subcommand("inspect", "validate and profile a dataset");
  inspect->add_option("data", data_path)->required();
  inspect->add_option("--schema", schema_path)->required();

  auto* generate = app.add_subcommand("generate", "fit a generator and sample synthetic rows");
  generate->add_option("--model", model)->required()
      ->check(CLI::IsMember({"ctgan", "bootstrap", "independence"}));
  generate->add_option("--input", data_path)->required();
  generate->add_option("--schema", schema_path)->required();
  generate->add_option("--out", out_path)->required();
  generate->add_option("--seed", seed);
  generate->add_option("--iterations", iterations);
  generate->add_option("--batch-size", batch_size);
  generate->add_option("--lr", lr);

  auto* evaluate = app.add_subcommand("evaluate", "score synthetic data against real data");
  evaluate->add_option("--real", real_path)->required();
  evaluate->add_option("--synthetic", syn_path)->required();
  evaluate->add_option("--schema", schema_path)->required();
  evaluate->add_option("--target", target)->required();
  evaluate->add_option("--seed", seed);
  evaluate->add_option("--out", out_path)->required();

  auto* utility = app.add_subcommand("utility", "train-on-synthetic/test-on-real comparison");
  utility->add_option("--real", real_path)->required();
  utility->add_option("--synthetic", syn_path)->required();
  utility->add_option("--schema", schema_path)->required();
  utility->add_option("--target", target)->required();
  utility->add_option("--families", families)->delimiter(',');
  utility->add_option("--seed", seed);
  utility->add_option("--out", out_path)->required();

  auto* benchmark = app.add_subcommand("benchmark", "run the full evaluation grid");
  benchmark->add_option("--config", config_path)->required();
  benchmark->add_option("--out", out_path)->required();

  auto* project = app.add_subcommand("project", "2-D embedding for visual comparison");
  project->add_option("--input", data_path)->required();
  project->add_option("--schema", schema_path)->required();
  project->add_option("--joint", joint_path);
  project->add_option("--perplexity", perplexity);
  project->add_option("--iterations", iters);
  project->add_option("--seed", seed);
  project->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(data_path, schema_path);
    if (generate->parsed())
      return cmd_generate(model, data_path, schema_path, out_path, seed, iterations, batch_size,
                          lr);
    if (evaluate->parsed())
      return cmd_evaluate(real_path, syn_path, schema_path, target, seed, out_path);
    if (utility->parsed())
      return cmd_utility(real_path, syn_path, schema_path, target, families, seed, out_path);
    if (benchmark->parsed()) return cmd_benchmark(config_path, out_path);
    if (project->parsed())
      return cmd_project(data_path, schema_path, joint_path, perplexity, iters, seed, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
