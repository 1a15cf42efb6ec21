#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthlab/dataset.hpp"
#include "synthlab/gmm.hpp"
#include "synthlab/mlp.hpp"
#include "synthlab/rng.hpp"

namespace synthlab {

struct GeneratorConfig {
  int iterations = 2000;
  int batch_size = 200;
  double lr = 0.001;
  int noise_dim = 128;
  std::vector<int> hidden = {256, 256};
  int max_modes = 5;
  double gp_weight = 10.0;
  int pac = 10;  // samples judged jointly per critic input (counters mode collapse)
  std::uint64_t seed = 0;

  void validate() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Per-continuous-column mode model: a 1-D GMM whose component count was
/// selected by BIC over k = 1..max_modes.
struct ModeEntry {
  GmmModel gmm;  // 1-D
  int n_modes = 1;
};

ModeEntry fit_mode_normalizer(const std::vector<double>& values, int max_modes, RngStream rng);

/// Encodes a value as (alpha, mode): mode sampled proportionally to the GMM
/// responsibilities, alpha = clamp((v - mu)/(4 sigma), -1, 1).
std::pair<double, int> mode_normalize(const ModeEntry& entry, double value, RngStream& rng);
double mode_denormalize(const ModeEntry& entry, double alpha, int mode);

/// Log-frequency condition sampler over the categorical columns
/// (training-by-sampling). Weight of category c is log(1 + count(c)).
struct CondSampler {
  std::vector<int> columns;                       // categorical column indices
  std::vector<std::vector<double>> log_weights;   // per column, per category
  std::vector<int> block_begin;                   // offset of each column's block
  int width = 0;                                  // total one-hot width

  static CondSampler build(const Dataset& ds);
  /// Picks (column slot, category); the caller materializes the one-hot vector.
  std::pair<int, int> sample(RngStream& rng) const;
  /// Like sample(), but categories follow the raw training frequencies; used
  /// at generation time so the output marginals match the data.
  std::pair<int, int> sample_original(RngStream& rng) const;
  double probability(int slot, int category) const;
};

/// Layout of the CTGAN data representation: per continuous column an alpha
/// scalar plus a mode one-hot block, then one one-hot block per categorical
/// column.
struct RepLayout {
  struct ContBlock {
    int column;
    int alpha_pos;
    int mode_begin;
    int n_modes;
  };
  struct CatBlock {
    int column;
    int begin;
    int size;
  };
  std::vector<ContBlock> cont;
  std::vector<CatBlock> cat;
  int width = 0;
};

struct TrainLogEntry {
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double grad_penalty = 0.0;
};

struct CtganModel {
  Schema schema;
  GeneratorConfig config;
  RepLayout layout;
  std::vector<ModeEntry> modes;  // one per continuous column, layout order
  CondSampler cond;
  Mlp generator;
  Mlp critic;
  std::vector<TrainLogEntry> log;

  nlohmann::json to_json() const;
  static CtganModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static CtganModel load(const std::string& path);
};

/// WGAN-GP training with training-by-sampling conditioning. Deterministic
/// given (data, config, config.seed).
CtganModel ctgan_fit(const Dataset& train, const GeneratorConfig& config);

/// Draws n schema-valid rows; discrete blocks decoded by argmax, continuous
/// cells by inverse mode normalization. Deterministic per seed.
Dataset ctgan_sample(const CtganModel& model, int n, std::uint64_t seed);

enum class BaselineKind { Bootstrap, Independence };

/// Bootstrap resamples whole rows; independence samples each column i.i.d.
/// from its marginal, destroying cross-column dependence.
Dataset baseline_fit_sample(BaselineKind kind, const Dataset& train, int n, std::uint64_t seed);

/// Validates an externally generated synthetic CSV against a closed schema,
/// reporting the number of offending rows on failure.
Dataset load_external_synthetic(std::istream& in, const Schema& schema);
Dataset load_external_synthetic_file(const std::string& path, const Schema& schema);

}  // namespace synthlab
