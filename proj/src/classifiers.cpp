#include "synthlab/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "synthlab/adam.hpp"
#include "synthlab/knn.hpp"
#include "synthlab/metrics.hpp"
#include "synthlab/mlp.hpp"
#include "synthlab/rng.hpp"

namespace synthlab {

std::string family_name(Family f) {
  switch (f) {
    case Family::DecisionTree: return "decision_tree";
    case Family::RandomForest: return "random_forest";
    case Family::Gbt: return "gbt";
    case Family::Knn: return "knn";
    case Family::Linear: return "linear";
    case Family::Mlp: return "mlp";
    case Family::GmmDensity: return "gmm_density";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "dt") return Family::DecisionTree;
  if (name == "rf") return Family::RandomForest;
  for (Family f : {Family::DecisionTree, Family::RandomForest, Family::Gbt, Family::Knn,
                   Family::Linear, Family::Mlp, Family::GmmDensity})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown classifier family '" + name + "'");
}

ClassifierSpec default_spec(Family family) {
  ClassifierSpec spec;
  spec.family = family;
  if (family == Family::Gbt) {
    // shallow trees with a leaf-size floor: a handful of duplicated rows
    // cannot be isolated and memorized
    spec.max_depth = 3;
    spec.min_leaf = 20;
  }
  return spec;
}

void TrainedClassifier::check_width(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features_)
    throw std::invalid_argument("predict_proba: feature width " + std::to_string(X.cols()) +
                                " != training width " + std::to_string(n_features_));
}

std::vector<int> TrainedClassifier::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd p = predict_proba(X);
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::Index best;
    p.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = labels_[static_cast<std::size_t>(best)];
  }
  return out;
}

namespace {

std::vector<int> distinct_labels(const std::vector<int>& y) {
  std::set<int> s(y.begin(), y.end());
  return {s.begin(), s.end()};
}

std::vector<int> to_class_index(const std::vector<int>& y, const std::vector<int>& labels) {
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(labels.begin(), labels.end(), y[i]);
    out[i] = static_cast<int>(it - labels.begin());
  }
  return out;
}

// Canonical row order (lexicographic by features, then label) so that models
// whose fit depends on row order become permutation invariant.
std::vector<std::size_t> canonical_order(const Eigen::MatrixXd& X, const std::vector<int>& y) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(X.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      if (X(static_cast<Eigen::Index>(a), c) != X(static_cast<Eigen::Index>(b), c))
        return X(static_cast<Eigen::Index>(a), c) < X(static_cast<Eigen::Index>(b), c);
    }
    return y[a] < y[b];
  });
  return idx;
}

// ---------------------------------------------------------------------------
// CART classification tree (Gini splits)

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Eigen::VectorXd probs;  // leaf class probabilities (Laplace smoothed)
};

class CartTree {
 public:
  void fit(const Eigen::MatrixXd& X, const std::vector<int>& yi, int n_classes, int max_depth,
           int min_leaf, int features_per_split, RngStream rng) {
    n_classes_ = n_classes;
    std::vector<int> rows(yi.size());
    std::iota(rows.begin(), rows.end(), 0);
    nodes_.clear();
    build(X, yi, rows, 0, max_depth, min_leaf, features_per_split, rng);
  }

  Eigen::VectorXd leaf_probs(const Eigen::RowVectorXd& x) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& nd = nodes_[static_cast<std::size_t>(node)];
      node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].probs;
  }

 private:
  int build(const Eigen::MatrixXd& X, const std::vector<int>& yi, const std::vector<int>& rows,
            int depth, int max_depth, int min_leaf, int features_per_split, RngStream& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes_);
    for (int r : rows) counts(yi[static_cast<std::size_t>(r)]) += 1.0;
    const double n = static_cast<double>(rows.size());

    auto make_leaf = [&]() {
      nodes_[static_cast<std::size_t>(id)].probs =
          (counts.array() + 1.0) / (n + static_cast<double>(n_classes_));
    };
    const bool pure = (counts.array() == n).any();
    if (depth >= max_depth || static_cast<int>(rows.size()) < 2 * min_leaf || pure) {
      make_leaf();
      return id;
    }

    const double parent_gini = 1.0 - (counts / n).squaredNorm();
    // feature subset for forests; full scan order is deterministic
    std::vector<int> features(static_cast<std::size_t>(X.cols()));
    std::iota(features.begin(), features.end(), 0);
    if (features_per_split > 0 && features_per_split < static_cast<int>(features.size())) {
      rng.shuffle(features);
      features.resize(static_cast<std::size_t>(features_per_split));
      std::sort(features.begin(), features.end());
    }

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 1e-12;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        vals[i] = {X(rows[i], f), yi[static_cast<std::size_t>(rows[i])]};
      std::sort(vals.begin(), vals.end());
      Eigen::VectorXd left = Eigen::VectorXd::Zero(n_classes_);
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left(vals[i].second) += 1.0;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1), nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const Eigen::VectorXd right = counts - left;
        const double gini_l = 1.0 - (left / nl).squaredNorm();
        const double gini_r = 1.0 - (right / nr).squaredNorm();
        const double gain = parent_gini - (nl * gini_l + nr * gini_r) / n;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (best_feature < 0) {
      make_leaf();
      return id;
    }
    std::vector<int> lrows, rrows;
    for (int r : rows)
      (X(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
    nodes_[static_cast<std::size_t>(id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = build(X, yi, lrows, depth + 1, max_depth, min_leaf, features_per_split, rng);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = build(X, yi, rrows, depth + 1, max_depth, min_leaf, features_per_split, rng);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  int n_classes_ = 0;
  std::vector<TreeNode> nodes_;
};

class TreeClassifier : public TrainedClassifier {
 public:
  TreeClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X, const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto yi = to_class_index(y, labels_);
    tree_.fit(X, yi, static_cast<int>(labels_.size()), spec.max_depth, spec.min_leaf, 0,
              RngStream(spec.seed));
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    Eigen::MatrixXd p(X.rows(), static_cast<Eigen::Index>(labels_.size()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) p.row(r) = tree_.leaf_probs(X.row(r)).transpose();
    return p;
  }

 private:
  CartTree tree_;
};

class ForestClassifier : public TrainedClassifier {
 public:
  ForestClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                   const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto yi = to_class_index(y, labels_);
    const int mtry = std::max(1, static_cast<int>(std::round(std::sqrt(X.cols()))));
    RngStream rng = RngStream(spec.seed).child("forest");
    const int n = static_cast<int>(X.rows());
    for (int t = 0; t < spec.n_trees; ++t) {
      RngStream tree_rng = rng.child("tree", static_cast<std::uint64_t>(t));
      std::vector<int> boot(static_cast<std::size_t>(n));
      std::vector<int> yb(static_cast<std::size_t>(n));
      Eigen::MatrixXd Xb(n, X.cols());
      // resample until both bootstrap classes are present (binary+ guard)
      bool ok = false;
      while (!ok) {
        std::set<int> seen;
        for (int i = 0; i < n; ++i) {
          const int r = static_cast<int>(tree_rng.uniform_int(static_cast<std::size_t>(n)));
          Xb.row(i) = X.row(r);
          yb[static_cast<std::size_t>(i)] = yi[static_cast<std::size_t>(r)];
          seen.insert(yb[static_cast<std::size_t>(i)]);
        }
        ok = seen.size() >= 2 || labels_.size() < 2;
      }
      trees_.emplace_back();
      trees_.back().fit(Xb, yb, static_cast<int>(labels_.size()), spec.max_depth, spec.min_leaf,
                        mtry, tree_rng.child("splits"));
    }
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(X.rows(), static_cast<Eigen::Index>(labels_.size()));
    for (const auto& t : trees_)
      for (Eigen::Index r = 0; r < X.rows(); ++r) p.row(r) += t.leaf_probs(X.row(r)).transpose();
    return p / static_cast<double>(trees_.size());
  }

 private:
  std::vector<CartTree> trees_;
};

// ---------------------------------------------------------------------------
// Gradient boosting with depth-limited regression trees on logistic loss

struct RegNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;
};

class RegTree {
 public:
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
           int max_depth, int min_leaf, double l2) {
    std::vector<int> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    nodes_.clear();
    build(X, grad, hess, rows, 0, max_depth, min_leaf, l2);
  }
  double value_at(const Eigen::RowVectorXd& x) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& nd = nodes_[static_cast<std::size_t>(node)];
      node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].value;
  }

 private:
  int build(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
            const std::vector<int>& rows, int depth, int max_depth, int min_leaf, double l2) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double G = 0.0, H = 0.0;
    for (int r : rows) {
      G += grad(r);
      H += hess(r);
    }
    auto make_leaf = [&]() { nodes_[static_cast<std::size_t>(id)].value = -G / (H + l2 + 1e-12); };
    if (depth >= max_depth || static_cast<int>(rows.size()) < 2 * min_leaf) {
      make_leaf();
      return id;
    }
    const double parent_score = G * G / (H + l2 + 1e-12);
    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 1e-12;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (int f = 0; f < X.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {X(rows[i], f), rows[i]};
      std::sort(vals.begin(), vals.end());
      double Gl = 0.0, Hl = 0.0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        Gl += grad(vals[i].second);
        Hl += hess(vals[i].second);
        if (vals[i].first == vals[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(rows.size()) - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double Gr = G - Gl, Hr = H - Hl;
        const double gain = Gl * Gl / (Hl + l2 + 1e-12) + Gr * Gr / (Hr + l2 + 1e-12) -
                            parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (best_feature < 0) {
      make_leaf();
      return id;
    }
    std::vector<int> lrows, rrows;
    for (int r : rows) (X(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
    nodes_[static_cast<std::size_t>(id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = build(X, grad, hess, lrows, depth + 1, max_depth, min_leaf, l2);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = build(X, grad, hess, rrows, depth + 1, max_depth, min_leaf, l2);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }
  std::vector<RegNode> nodes_;
};

// one-vs-rest binary booster
struct BinaryBooster {
  double base = 0.0;
  double lr = 0.1;
  std::vector<RegTree> trees;
  std::vector<double> loss_trace;

  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01, const ClassifierSpec& spec) {
    lr = spec.learning_rate;
    const double n = static_cast<double>(X.rows());
    const double p0 = std::clamp(y01.mean(), 1e-6, 1.0 - 1e-6);
    base = std::log(p0 / (1.0 - p0));
    Eigen::VectorXd F = Eigen::VectorXd::Constant(X.rows(), base);
    for (int round = 0; round < spec.n_rounds; ++round) {
      const Eigen::ArrayXd p = 1.0 / (1.0 + (-F.array()).exp());
      double loss = 0.0;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double pi = std::clamp(p(i), 1e-12, 1.0 - 1e-12);
        loss -= y01(i) * std::log(pi) + (1.0 - y01(i)) * std::log(1.0 - pi);
      }
      loss_trace.push_back(loss / n);
      const Eigen::VectorXd grad = (p - y01.array()).matrix();
      const Eigen::VectorXd hess = (p * (1.0 - p)).cwiseMax(1e-12).matrix();
      trees.emplace_back();
      trees.back().fit(X, grad, hess, spec.max_depth, spec.min_leaf, spec.l2);
      for (Eigen::Index i = 0; i < X.rows(); ++i) F(i) += lr * trees.back().value_at(X.row(i));
    }
    // final loss after the last round
    const Eigen::ArrayXd p = 1.0 / (1.0 + (-F.array()).exp());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double pi = std::clamp(p(i), 1e-12, 1.0 - 1e-12);
      loss -= y01(i) * std::log(pi) + (1.0 - y01(i)) * std::log(1.0 - pi);
    }
    loss_trace.push_back(loss / n);
  }

  double margin(const Eigen::RowVectorXd& x) const {
    double f = base;
    for (const auto& t : trees) f += lr * t.value_at(x);
    return f;
  }
};

class GbtClassifier : public TrainedClassifier {
 public:
  GbtClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X, const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto yi = to_class_index(y, labels_);
    const int n_models = labels_.size() == 2 ? 1 : static_cast<int>(labels_.size());
    for (int c = 0; c < n_models; ++c) {
      Eigen::VectorXd y01(X.rows());
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int cls = yi[static_cast<std::size_t>(i)];
        y01(i) = (labels_.size() == 2 ? cls == 1 : cls == c) ? 1.0 : 0.0;
      }
      boosters_.emplace_back();
      boosters_.back().fit(X, y01, spec);
    }
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    const Eigen::Index C = static_cast<Eigen::Index>(labels_.size());
    Eigen::MatrixXd p(X.rows(), C);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      if (boosters_.size() == 1) {
        const double q = 1.0 / (1.0 + std::exp(-boosters_[0].margin(X.row(r))));
        p(r, 0) = 1.0 - q;
        p(r, 1) = q;
      } else {
        double total = 0.0;
        for (Eigen::Index c = 0; c < C; ++c) {
          p(r, c) = 1.0 / (1.0 + std::exp(-boosters_[static_cast<std::size_t>(c)].margin(X.row(r))));
          total += p(r, c);
        }
        p.row(r) /= std::max(total, 1e-12);
      }
    }
    return p;
  }
  std::vector<double> training_loss() const override { return boosters_.front().loss_trace; }

 private:
  std::vector<BinaryBooster> boosters_;
};

// ---------------------------------------------------------------------------

class KnnClassifier : public TrainedClassifier {
 public:
  KnnClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X, const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto order = canonical_order(X, y);
    X_ = Eigen::MatrixXd(X.rows(), X.cols());
    yi_.resize(y.size());
    const auto yi = to_class_index(y, labels_);
    for (std::size_t i = 0; i < order.size(); ++i) {
      X_.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[i]));
      yi_[i] = yi[order[i]];
    }
    k_ = std::min<int>(spec.k, static_cast<int>(X.rows()));
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    const NnResult nn = nn_search(X_, X, k_);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(X.rows(), static_cast<Eigen::Index>(labels_.size()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      for (int i : nn.index[static_cast<std::size_t>(r)])
        p(r, yi_[static_cast<std::size_t>(i)]) += 1.0;
      p.row(r) /= static_cast<double>(k_);
    }
    return p;
  }

 private:
  Eigen::MatrixXd X_;
  std::vector<int> yi_;
  int k_ = 1;
};

// multinomial logistic regression, full-batch Adam
class LinearClassifier : public TrainedClassifier {
 public:
  LinearClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                   const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto yi = to_class_index(y, labels_);
    const Eigen::Index C = static_cast<Eigen::Index>(labels_.size());
    W_ = Eigen::MatrixXd::Zero(C, X.cols());
    b_ = Eigen::VectorXd::Zero(C);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(X.rows(), C);
    for (Eigen::Index i = 0; i < X.rows(); ++i) Y(i, yi[static_cast<std::size_t>(i)]) = 1.0;

    const double n = static_cast<double>(X.rows());
    Eigen::ArrayXXd mW = Eigen::ArrayXXd::Zero(C, X.cols()), vW = mW;
    Eigen::ArrayXd mb = Eigen::ArrayXd::Zero(C), vb = mb;
    const AdamConfig hp{0.1, 0.9, 0.999, 1e-8};
    const int steps = 300;
    for (int t = 1; t <= steps; ++t) {
      const Eigen::MatrixXd logits = (X * W_.transpose()).rowwise() + b_.transpose();
      const Eigen::MatrixXd P = softmax_rows(logits);
      const Eigen::MatrixXd gW = (P - Y).transpose() * X / n + spec.l2 * W_;
      const Eigen::VectorXd gb = (P - Y).colwise().sum().transpose() / n;
      const double bc1 = 1.0 - std::pow(hp.beta1, t), bc2 = 1.0 - std::pow(hp.beta2, t);
      mW = hp.beta1 * mW + (1.0 - hp.beta1) * gW.array();
      vW = hp.beta2 * vW + (1.0 - hp.beta2) * gW.array().square();
      W_.array() -= hp.lr * (mW / bc1) / ((vW / bc2).sqrt() + hp.eps);
      mb = hp.beta1 * mb + (1.0 - hp.beta1) * gb.array();
      vb = hp.beta2 * vb + (1.0 - hp.beta2) * gb.array().square();
      b_.array() -= hp.lr * (mb / bc1) / ((vb / bc2).sqrt() + hp.eps);
    }
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    return softmax_rows((X * W_.transpose()).rowwise() + b_.transpose());
  }

 private:
  Eigen::MatrixXd W_;
  Eigen::VectorXd b_;
};

class MlpClassifier : public TrainedClassifier {
 public:
  MlpClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X, const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto yi = to_class_index(y, labels_);
    const Eigen::Index C = static_cast<Eigen::Index>(labels_.size());
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(X.rows(), C);
    for (Eigen::Index i = 0; i < X.rows(); ++i) Y(i, yi[static_cast<std::size_t>(i)]) = 1.0;

    std::vector<int> dims = {static_cast<int>(X.cols())};
    std::vector<Activation> acts;
    for (int h : spec.hidden) {
      dims.push_back(h);
      acts.push_back(Activation::Relu);
    }
    dims.push_back(static_cast<int>(C));
    acts.push_back(Activation::Identity);
    RngStream rng = RngStream(spec.seed).child("mlp_clf");
    net_ = Mlp::create(dims, acts, rng);
    MlpAdam opt(net_);
    const AdamConfig hp{0.01, 0.9, 0.999, 1e-8};
    for (int e = 0; e < spec.epochs; ++e) {
      MlpGrads grads;
      mlp_loss_and_grad(net_, X, Y, MlpLoss::CrossEntropy, &grads);
      opt.step(net_, grads, hp);
    }
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    return softmax_rows(mlp_forward(net_, X));
  }

 private:
  Mlp net_;
};

class GmmDensityClassifier : public TrainedClassifier {
 public:
  GmmDensityClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                       const std::vector<int>& y) {
    labels_ = distinct_labels(y);
    n_features_ = static_cast<int>(X.cols());
    const auto yi = to_class_index(y, labels_);
    const auto order = canonical_order(X, y);
    for (std::size_t c = 0; c < labels_.size(); ++c) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i : order)
        if (yi[i] == static_cast<int>(c)) rows.push_back(static_cast<Eigen::Index>(i));
      Eigen::MatrixXd Xc(static_cast<Eigen::Index>(rows.size()), X.cols());
      for (std::size_t i = 0; i < rows.size(); ++i)
        Xc.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
      const int k = std::max(1, std::min<int>(spec.gmm_components, static_cast<int>(rows.size())));
      models_.push_back(gmm_fit(Xc, k, RngStream(spec.seed).child("class", c)));
      log_priors_.push_back(std::log(static_cast<double>(rows.size()) /
                                     static_cast<double>(X.rows())));
    }
  }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(X);
    const Eigen::Index C = static_cast<Eigen::Index>(labels_.size());
    Eigen::MatrixXd p(X.rows(), C);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      Eigen::VectorXd lp(C);
      for (Eigen::Index c = 0; c < C; ++c)
        lp(c) = log_priors_[static_cast<std::size_t>(c)] +
                gmm_loglik(models_[static_cast<std::size_t>(c)], X.row(r));
      const double m = lp.maxCoeff();
      Eigen::ArrayXd e = (lp.array() - m).exp();
      p.row(r) = (e / e.sum()).matrix().transpose();
    }
    return p;
  }

 private:
  std::vector<GmmModel> models_;
  std::vector<double> log_priors_;
};

}  // namespace

std::unique_ptr<TrainedClassifier> train(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                                         const std::vector<int>& y) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows())
    throw std::invalid_argument("train: |y| != rows(X)");
  if (!X.allFinite()) throw std::invalid_argument("train: non-finite features");
  if (distinct_labels(y).size() < 2) throw std::invalid_argument("train: single-class labels");
  switch (spec.family) {
    case Family::DecisionTree: return std::make_unique<TreeClassifier>(spec, X, y);
    case Family::RandomForest: return std::make_unique<ForestClassifier>(spec, X, y);
    case Family::Gbt: return std::make_unique<GbtClassifier>(spec, X, y);
    case Family::Knn: return std::make_unique<KnnClassifier>(spec, X, y);
    case Family::Linear: return std::make_unique<LinearClassifier>(spec, X, y);
    case Family::Mlp: return std::make_unique<MlpClassifier>(spec, X, y);
    case Family::GmmDensity: return std::make_unique<GmmDensityClassifier>(spec, X, y);
  }
  throw std::invalid_argument("train: unknown family");
}

std::vector<ClassifierSpec> ParamGrid::enumerate(Family family, std::uint64_t seed) const {
  // spec defaults per family when the corresponding list is empty
  auto pick = [](const auto& given, auto fallback) {
    return given.empty() ? fallback : given;
  };
  std::vector<ClassifierSpec> out;
  ClassifierSpec base;
  base.family = family;
  base.seed = seed;
  switch (family) {
    case Family::DecisionTree:
      for (int d : pick(max_depth, std::vector<int>{3, 5, 8})) {
        base.max_depth = d;
        out.push_back(base);
      }
      break;
    case Family::RandomForest:
      for (int t : pick(n_trees, std::vector<int>{50}))
        for (int d : pick(max_depth, std::vector<int>{5, 8})) {
          base.n_trees = t;
          base.max_depth = d;
          out.push_back(base);
        }
      break;
    case Family::Gbt:
      for (int r : pick(n_rounds, std::vector<int>{50, 100}))
        for (double lr : pick(learning_rate, std::vector<double>{0.1, 0.3}))
          for (int d : pick(max_depth, std::vector<int>{3})) {
            base.n_rounds = r;
            base.learning_rate = lr;
            base.max_depth = d;
            out.push_back(base);
          }
      break;
    case Family::Knn:
      for (int kk : pick(k, std::vector<int>{3, 5, 11})) {
        base.k = kk;
        out.push_back(base);
      }
      break;
    case Family::Linear:
      for (double reg : pick(l2, std::vector<double>{0.0, 1e-2})) {
        base.l2 = reg;
        out.push_back(base);
      }
      break;
    case Family::Mlp:
      for (const auto& h : pick(hidden, std::vector<std::vector<int>>{{32}, {64, 32}}))
        for (int e : pick(epochs, std::vector<int>{100})) {
          base.hidden = h;
          base.epochs = e;
          out.push_back(base);
        }
      break;
    case Family::GmmDensity:
      for (int g : pick(gmm_components, std::vector<int>{1, 3})) {
        base.gmm_components = g;
        out.push_back(base);
      }
      break;
  }
  if (out.empty()) throw std::invalid_argument("grid: empty candidate set");
  return out;
}

ClassifierSpec grid_search(Family family, const ParamGrid& grid, const Eigen::MatrixXd& X,
                           const std::vector<int>& y, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("grid_search: folds must be >= 2");
  const auto candidates = grid.enumerate(family, seed);
  const auto labels = distinct_labels(y);

  // stratified fold assignment
  std::vector<int> fold_of(y.size());
  RngStream rng = RngStream(seed).child("cv_folds");
  for (int lab : labels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == lab) idx.push_back(i);
    if (static_cast<int>(idx.size()) < folds)
      throw std::invalid_argument("grid_search: class " + std::to_string(lab) +
                                  " has fewer members than folds");
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = static_cast<int>(i % folds);
  }

  double best_score = -1.0;
  std::size_t best = 0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    double mean_score = 0.0;
    bool valid = true;
    for (int f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, va;
      for (std::size_t i = 0; i < y.size(); ++i)
        (fold_of[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
      Eigen::MatrixXd Xt(static_cast<Eigen::Index>(tr.size()), X.cols());
      Eigen::MatrixXd Xv(static_cast<Eigen::Index>(va.size()), X.cols());
      std::vector<int> yt(tr.size()), yv(va.size());
      for (std::size_t i = 0; i < tr.size(); ++i) {
        Xt.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
        yt[i] = y[static_cast<std::size_t>(tr[i])];
      }
      for (std::size_t i = 0; i < va.size(); ++i) {
        Xv.row(static_cast<Eigen::Index>(i)) = X.row(va[i]);
        yv[i] = y[static_cast<std::size_t>(va[i])];
      }
      try {
        const auto model = train(candidates[ci], Xt, yt);
        mean_score += aucroc_macro(yv, model->predict_proba(Xv), model->labels());
      } catch (const std::exception&) {
        valid = false;
        break;
      }
    }
    if (!valid) continue;
    mean_score /= static_cast<double>(folds);
    if (mean_score > best_score) {
      best_score = mean_score;
      best = ci;
    }
  }
  if (best_score < 0.0) throw std::runtime_error("grid_search: no candidate could be evaluated");
  return candidates[best];
}

}  // namespace synthlab
