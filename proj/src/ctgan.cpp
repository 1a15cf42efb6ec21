#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "synthlab/adam.hpp"
#include "synthlab/generators.hpp"

namespace synthlab {

namespace {

constexpr double kGumbelTau = 0.2;
constexpr const char* kModelFormatVersion = "1";

RepLayout build_layout(const Schema& schema, const std::vector<ModeEntry>& modes) {
  RepLayout layout;
  int pos = 0;
  std::size_t mode_slot = 0;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema.column(c).kind == ColumnKind::Continuous) {
      const int k = modes.at(mode_slot).n_modes;
      layout.cont.push_back({static_cast<int>(c), pos, pos + 1, k});
      pos += 1 + k;
      ++mode_slot;
    }
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema.column(c).kind == ColumnKind::Categorical) {
      const int k = static_cast<int>(schema.column(c).categories.size());
      layout.cat.push_back({static_cast<int>(c), pos, k});
      pos += k;
    }
  }
  layout.width = pos;
  return layout;
}

// Transform real rows into the CTGAN representation (mode assignment sampled
// once per cell, as in a one-off preprocessing pass).
Eigen::MatrixXd transform_real(const Dataset& ds, const RepLayout& layout,
                               const std::vector<ModeEntry>& modes, RngStream rng) {
  Eigen::MatrixXd rep = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.rows()), layout.width);
  for (std::size_t b = 0; b < layout.cont.size(); ++b) {
    const auto& blk = layout.cont[b];
    const auto& entry = modes[b];
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      const auto [alpha, mode] =
          mode_normalize(entry, ds.cell(r, static_cast<std::size_t>(blk.column)), rng);
      rep(static_cast<Eigen::Index>(r), blk.alpha_pos) = alpha;
      rep(static_cast<Eigen::Index>(r), blk.mode_begin + mode) = 1.0;
    }
  }
  for (const auto& blk : layout.cat) {
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      const int k = ds.category(r, static_cast<std::size_t>(blk.column));
      rep(static_cast<Eigen::Index>(r), blk.begin + k) = 1.0;
    }
  }
  return rep;
}

// Applies the generator output heads: tanh on alpha positions, softmax (with
// Gumbel noise during training) on every one-hot block.
Eigen::MatrixXd apply_heads(const Eigen::MatrixXd& raw, const RepLayout& layout, bool training,
                            RngStream* rng) {
  Eigen::MatrixXd rep(raw.rows(), raw.cols());
  for (const auto& blk : layout.cont)
    rep.col(blk.alpha_pos) = raw.col(blk.alpha_pos).array().tanh().matrix();

  auto do_block = [&](int begin, int size) {
    Eigen::MatrixXd logits = raw.middleCols(begin, size);
    if (training) {
      for (Eigen::Index r = 0; r < logits.rows(); ++r)
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
          double u = rng->uniform();
          while (u <= 0.0) u = rng->uniform();
          logits(r, c) = (logits(r, c) - std::log(-std::log(u))) / kGumbelTau;
        }
      rep.middleCols(begin, size) = softmax_rows(logits);
    } else {
      // argmax one-hot at sampling time
      rep.middleCols(begin, size).setZero();
      for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best;
        logits.row(r).maxCoeff(&best);
        rep(r, begin + best) = 1.0;
      }
    }
  };
  for (const auto& blk : layout.cont) do_block(blk.mode_begin, blk.n_modes);
  for (const auto& blk : layout.cat) do_block(blk.begin, blk.size);
  return rep;
}

// dL/d(raw generator output) from dL/d(rep); `rep` must be the training-time
// head output (softmaxed blocks).
Eigen::MatrixXd heads_backward(const Eigen::MatrixXd& grad_rep, const Eigen::MatrixXd& rep,
                               const RepLayout& layout) {
  Eigen::MatrixXd grad_raw = Eigen::MatrixXd::Zero(grad_rep.rows(), grad_rep.cols());
  for (const auto& blk : layout.cont) {
    grad_raw.col(blk.alpha_pos) =
        grad_rep.col(blk.alpha_pos).array() * (1.0 - rep.col(blk.alpha_pos).array().square());
  }
  auto do_block = [&](int begin, int size) {
    for (Eigen::Index r = 0; r < rep.rows(); ++r) {
      const Eigen::RowVectorXd y = rep.block(r, begin, 1, size);
      const Eigen::RowVectorXd gy = grad_rep.block(r, begin, 1, size);
      const double dot = gy.dot(y);
      grad_raw.block(r, begin, 1, size) = (gy.cwiseProduct(y) - dot * y) / kGumbelTau;
    }
  };
  for (const auto& blk : layout.cont) do_block(blk.mode_begin, blk.n_modes);
  for (const auto& blk : layout.cat) do_block(blk.begin, blk.size);
  return grad_raw;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) z(r, c) = rng.normal();
  return z;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat(m.data(), m.data() + m.size());
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != m.size())
    throw std::runtime_error("model: weight array size mismatch");
  std::copy(flat.begin(), flat.end(), m.data());
  return m;
}

nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"W", matrix_to_json(l.W)},
                      {"b", std::vector<double>(l.b.data(), l.b.data() + l.b.size())},
                      {"act", static_cast<int>(l.act)}});
  }
  return layers;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net;
  for (const auto& jl : j) {
    Mlp::Layer l;
    l.W = matrix_from_json(jl.at("W"));
    const auto b = jl.at("b").get<std::vector<double>>();
    l.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    l.act = static_cast<Activation>(jl.at("act").get<int>());
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

CtganModel ctgan_fit(const Dataset& train, const GeneratorConfig& config) {
  config.validate();
  if (train.rows() == 0) throw std::invalid_argument("ctgan_fit: empty training data");
  if (train.has_missing()) throw std::invalid_argument("ctgan_fit: impute missing cells first");
  train.validate();

  RngStream root(config.seed);
  CtganModel model;
  model.schema = train.schema();
  model.config = config;

  // mode-specific normalization per continuous column
  RngStream mode_rng = root.child("modes");
  for (std::size_t c = 0; c < train.cols(); ++c) {
    if (train.schema().column(c).kind != ColumnKind::Continuous) continue;
    model.modes.push_back(fit_mode_normalizer(train.column(c), config.max_modes,
                                              mode_rng.child("col", static_cast<std::uint64_t>(c))));
  }
  model.layout = build_layout(model.schema, model.modes);
  model.cond = CondSampler::build(train);

  const Eigen::MatrixXd real_rep =
      transform_real(train, model.layout, model.modes, root.child("transform"));

  // per (categorical slot, category) row index lists for training-by-sampling
  std::vector<std::vector<std::vector<std::size_t>>> rows_by(model.cond.columns.size());
  for (std::size_t s = 0; s < model.cond.columns.size(); ++s) {
    rows_by[s].resize(model.cond.log_weights[s].size());
    const auto& col = train.column(static_cast<std::size_t>(model.cond.columns[s]));
    for (std::size_t r = 0; r < col.size(); ++r)
      rows_by[s][static_cast<std::size_t>(col[r])].push_back(r);
  }

  const int rep_w = model.layout.width;
  const int cond_w = model.cond.width;
  const int B = config.batch_size;

  RngStream init_rng = root.child("init");
  std::vector<int> gen_dims = {config.noise_dim + cond_w};
  std::vector<Activation> gen_acts;
  for (int h : config.hidden) {
    gen_dims.push_back(h);
    gen_acts.push_back(Activation::Relu);
  }
  gen_dims.push_back(rep_w);
  gen_acts.push_back(Activation::Identity);
  model.generator = Mlp::create(gen_dims, gen_acts, init_rng);

  // the critic judges `pac` samples jointly, which penalizes mode collapse
  const int pac = config.pac;
  const int groups = B / pac;
  const int cw = rep_w + cond_w;
  std::vector<int> critic_dims = {pac * cw};
  std::vector<Activation> critic_acts;
  for (int h : config.hidden) {
    critic_dims.push_back(h);
    critic_acts.push_back(Activation::LeakyRelu);
  }
  critic_dims.push_back(1);
  critic_acts.push_back(Activation::Identity);
  model.critic = Mlp::create(critic_dims, critic_acts, init_rng);

  // WGAN momentum settings
  const AdamConfig gan_adam{config.lr, 0.5, 0.9, 1e-8};
  MlpAdam gen_opt(model.generator);
  MlpAdam critic_opt(model.critic);

  RngStream train_rng = root.child("train");

  // sampling uses an exponential moving average of the generator weights,
  // which damps the oscillation of adversarial updates
  const double ema_decay = 0.995;
  Mlp gen_ema = model.generator;

  auto draw_batch = [&](Eigen::MatrixXd& cond_mat, std::vector<std::pair<int, int>>& picks,
                        std::vector<std::size_t>* real_rows) {
    cond_mat = Eigen::MatrixXd::Zero(B, cond_w);
    picks.assign(static_cast<std::size_t>(B), {-1, -1});
    for (int i = 0; i < B; ++i) {
      if (cond_w > 0) {
        const auto pick = model.cond.sample(train_rng);
        picks[static_cast<std::size_t>(i)] = pick;
        cond_mat(i, model.cond.block_begin[static_cast<std::size_t>(pick.first)] + pick.second) =
            1.0;
        if (real_rows) {
          const auto& pool =
              rows_by[static_cast<std::size_t>(pick.first)][static_cast<std::size_t>(pick.second)];
          if (pool.empty())
            throw std::runtime_error("ctgan_fit: conditioned category has no rows");
          real_rows->push_back(pool[train_rng.uniform_int(pool.size())]);
        }
      } else if (real_rows) {
        real_rows->push_back(train_rng.uniform_int(train.rows()));
      }
    }
  };

  auto concat = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
  };
  // groups of `pac` consecutive batch rows become single critic rows
  auto pack = [&](const Eigen::MatrixXd& rows) {
    Eigen::MatrixXd out(groups, pac * cw);
    for (int g = 0; g < groups; ++g)
      for (int m = 0; m < pac; ++m) out.block(g, m * cw, 1, cw) = rows.row(g * pac + m);
    return out;
  };

  const double inv_b = 1.0 / static_cast<double>(B);
  const double inv_g = 1.0 / static_cast<double>(groups);
  for (int iter = 0; iter < config.iterations; ++iter) {
    TrainLogEntry entry;
    // ---- critic step
    {
      Eigen::MatrixXd cond_mat;
      std::vector<std::pair<int, int>> picks;
      std::vector<std::size_t> real_rows;
      draw_batch(cond_mat, picks, &real_rows);

      const Eigen::MatrixXd z = gaussian_matrix(B, config.noise_dim, train_rng);
      const Eigen::MatrixXd gen_raw =
          mlp_forward(model.generator, cond_w > 0 ? concat(z, cond_mat) : z);
      const Eigen::MatrixXd fake_rep = apply_heads(gen_raw, model.layout, true, &train_rng);

      Eigen::MatrixXd real_batch(B, rep_w);
      for (int i = 0; i < B; ++i)
        real_batch.row(i) = real_rep.row(static_cast<Eigen::Index>(real_rows[i]));

      const Eigen::MatrixXd fake_in =
          pack(cond_w > 0 ? concat(fake_rep, cond_mat) : fake_rep);
      const Eigen::MatrixXd real_in =
          pack(cond_w > 0 ? concat(real_batch, cond_mat) : real_batch);

      MlpGrads grads = MlpGrads::zeros_like(model.critic);
      MlpCache cache;
      const Eigen::MatrixXd d_fake = mlp_forward(model.critic, fake_in, &cache);
      grads.add_scaled(
          mlp_backward(model.critic, cache, Eigen::MatrixXd::Constant(groups, 1, inv_g)), 1.0);
      const Eigen::MatrixXd d_real = mlp_forward(model.critic, real_in, &cache);
      grads.add_scaled(
          mlp_backward(model.critic, cache, Eigen::MatrixXd::Constant(groups, 1, -inv_g)), 1.0);

      // gradient penalty on interpolates, one mixing coefficient per group
      Eigen::MatrixXd mix_in(groups, pac * cw);
      for (int i = 0; i < groups; ++i) {
        const double eps = train_rng.uniform();
        mix_in.row(i) = eps * real_in.row(i) + (1.0 - eps) * fake_in.row(i);
      }
      MlpCache mix_cache;
      mlp_forward(model.critic, mix_in, &mix_cache);
      InputGradCache ig;
      const Eigen::MatrixXd g = mlp_input_gradient(model.critic, mix_cache, &ig);
      const Eigen::VectorXd norms = g.rowwise().norm();
      double penalty = 0.0;
      Eigen::MatrixXd v(groups, g.cols());
      for (int i = 0; i < groups; ++i) {
        const double nr = norms(i);
        penalty += (nr - 1.0) * (nr - 1.0) * inv_g;
        v.row(i) = (config.gp_weight * inv_g * 2.0 * (nr - 1.0) / std::max(nr, 1e-12)) * g.row(i);
      }
      mlp_input_gradient_param_backward(model.critic, mix_cache, ig, v, &grads);

      entry.critic_loss = d_fake.mean() - d_real.mean() + config.gp_weight * penalty;
      entry.grad_penalty = penalty;
      if (!std::isfinite(entry.critic_loss))
        throw std::runtime_error("ctgan_fit: non-finite critic loss at iteration " +
                                 std::to_string(iter));
      critic_opt.step(model.critic, grads, gan_adam);
    }
    // ---- generator step
    {
      Eigen::MatrixXd cond_mat;
      std::vector<std::pair<int, int>> picks;
      draw_batch(cond_mat, picks, nullptr);

      const Eigen::MatrixXd z = gaussian_matrix(B, config.noise_dim, train_rng);
      MlpCache gen_cache;
      const Eigen::MatrixXd gen_raw =
          mlp_forward(model.generator, cond_w > 0 ? concat(z, cond_mat) : z, &gen_cache);
      const Eigen::MatrixXd fake_rep = apply_heads(gen_raw, model.layout, true, &train_rng);
      const Eigen::MatrixXd fake_in =
          pack(cond_w > 0 ? concat(fake_rep, cond_mat) : fake_rep);

      MlpCache critic_cache;
      const Eigen::MatrixXd d_fake = mlp_forward(model.critic, fake_in, &critic_cache);
      Eigen::MatrixXd grad_packed;
      mlp_backward(model.critic, critic_cache, Eigen::MatrixXd::Constant(groups, 1, -inv_g),
                   &grad_packed);
      Eigen::MatrixXd grad_rep(B, rep_w);
      for (int g = 0; g < groups; ++g)
        for (int m = 0; m < pac; ++m)
          grad_rep.row(g * pac + m) = grad_packed.block(g, m * cw, 1, rep_w);
      Eigen::MatrixXd grad_raw = heads_backward(grad_rep, fake_rep, model.layout);

      // cross-entropy penalty forcing the conditioned category
      double ce = 0.0;
      if (cond_w > 0) {
        for (int i = 0; i < B; ++i) {
          const auto [slot, cat] = picks[static_cast<std::size_t>(i)];
          const auto& blk = model.layout.cat[static_cast<std::size_t>(slot)];
          const Eigen::RowVectorXd logits = gen_raw.block(i, blk.begin, 1, blk.size);
          const double m = logits.maxCoeff();
          const Eigen::RowVectorXd e = (logits.array() - m).exp();
          const double Z = e.sum();
          ce -= (logits(cat) - m - std::log(Z)) * inv_b;
          Eigen::RowVectorXd p = e / Z;
          p(cat) -= 1.0;
          grad_raw.block(i, blk.begin, 1, blk.size) += p * inv_b;
        }
      }

      entry.generator_loss = -d_fake.mean() + ce;
      if (!std::isfinite(entry.generator_loss))
        throw std::runtime_error("ctgan_fit: non-finite generator loss at iteration " +
                                 std::to_string(iter));
      MlpGrads gen_grads = mlp_backward(model.generator, gen_cache, grad_raw);
      gen_opt.step(model.generator, gen_grads, gan_adam);
      for (std::size_t l = 0; l < gen_ema.layers.size(); ++l) {
        gen_ema.layers[l].W =
            ema_decay * gen_ema.layers[l].W + (1.0 - ema_decay) * model.generator.layers[l].W;
        gen_ema.layers[l].b =
            ema_decay * gen_ema.layers[l].b + (1.0 - ema_decay) * model.generator.layers[l].b;
      }
    }
    model.log.push_back(entry);
  }
  model.generator = std::move(gen_ema);
  return model;
}

Dataset ctgan_sample(const CtganModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("ctgan_sample: n must be >= 1");
  RngStream rng = RngStream(seed).child("ctgan_sample");
  const int cond_w = model.cond.width;
  Dataset out(model.schema);

  const int batch = 512;
  for (int done = 0; done < n; done += batch) {
    const int m = std::min(batch, n - done);
    Eigen::MatrixXd input(m, model.config.noise_dim + cond_w);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < model.config.noise_dim; ++j) input(i, j) = rng.normal();
      if (cond_w > 0) {
        input.block(i, model.config.noise_dim, 1, cond_w).setZero();
        const auto [slot, cat] = model.cond.sample_original(rng);
        input(i, model.config.noise_dim +
                     model.cond.block_begin[static_cast<std::size_t>(slot)] + cat) = 1.0;
      }
    }
    const Eigen::MatrixXd raw = mlp_forward(model.generator, input);
    const Eigen::MatrixXd rep = apply_heads(raw, model.layout, false, nullptr);

    std::vector<double> row(model.schema.size(), 0.0);
    for (int i = 0; i < m; ++i) {
      for (std::size_t b = 0; b < model.layout.cont.size(); ++b) {
        const auto& blk = model.layout.cont[b];
        Eigen::Index mode;
        rep.block(i, blk.mode_begin, 1, blk.n_modes).row(0).maxCoeff(&mode);
        row[static_cast<std::size_t>(blk.column)] =
            mode_denormalize(model.modes[b], rep(i, blk.alpha_pos), static_cast<int>(mode));
      }
      for (const auto& blk : model.layout.cat) {
        Eigen::Index cat;
        rep.block(i, blk.begin, 1, blk.size).row(0).maxCoeff(&cat);
        row[static_cast<std::size_t>(blk.column)] = static_cast<double>(cat);
      }
      out.append_row(row);
    }
  }
  out.validate();
  return out;
}

nlohmann::json CtganModel::to_json() const {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["schema"] = schema.to_json();
  j["config"] = config.to_json();
  nlohmann::json jmodes = nlohmann::json::array();
  for (const auto& m : modes) {
    jmodes.push_back({{"n_modes", m.n_modes},
                      {"weights", std::vector<double>(m.gmm.weights.data(),
                                                      m.gmm.weights.data() + m.gmm.weights.size())},
                      {"means", matrix_to_json(m.gmm.means)},
                      {"vars", matrix_to_json(m.gmm.vars)}});
  }
  j["modes"] = jmodes;
  j["cond"] = {{"columns", cond.columns},
               {"log_weights", cond.log_weights},
               {"block_begin", cond.block_begin},
               {"width", cond.width}};
  j["generator"] = mlp_to_json(generator);
  j["critic"] = mlp_to_json(critic);
  return j;
}

CtganModel CtganModel::from_json(const nlohmann::json& j) {
  if (j.value("format_version", "") != kModelFormatVersion)
    throw std::runtime_error("model: unsupported format version");
  CtganModel m;
  m.schema = Schema::from_json(j.at("schema"));
  m.config = GeneratorConfig::from_json(j.at("config"));
  for (const auto& jm : j.at("modes")) {
    ModeEntry e;
    e.n_modes = jm.at("n_modes").get<int>();
    const auto w = jm.at("weights").get<std::vector<double>>();
    e.gmm.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    e.gmm.means = matrix_from_json(jm.at("means"));
    e.gmm.vars = matrix_from_json(jm.at("vars"));
    m.modes.push_back(std::move(e));
  }
  const auto& jc = j.at("cond");
  m.cond.columns = jc.at("columns").get<std::vector<int>>();
  m.cond.log_weights = jc.at("log_weights").get<std::vector<std::vector<double>>>();
  m.cond.block_begin = jc.at("block_begin").get<std::vector<int>>();
  m.cond.width = jc.at("width").get<int>();
  m.generator = mlp_from_json(j.at("generator"));
  m.critic = mlp_from_json(j.at("critic"));
  m.layout = build_layout(m.schema, m.modes);
  return m;
}

void CtganModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("model: cannot open '" + path + "' for writing");
  out << to_json().dump(2) << '\n';
}

CtganModel CtganModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

}  // namespace synthlab
