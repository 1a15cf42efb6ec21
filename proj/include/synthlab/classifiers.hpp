#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthlab/gmm.hpp"

namespace synthlab {

enum class Family { DecisionTree, RandomForest, Gbt, Knn, Linear, Mlp, GmmDensity };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct ClassifierSpec {
  Family family = Family::DecisionTree;
  int max_depth = 5;
  int min_leaf = 1;
  int n_trees = 50;
  int n_rounds = 100;
  double learning_rate = 0.1;
  double l2 = 0.0;
  int k = 5;
  std::vector<int> hidden = {32};
  int epochs = 100;
  int gmm_components = 3;
  std::uint64_t seed = 0;
};

/// Fitted model with class-probability output. Class order is the sorted list
/// of distinct training labels.
class TrainedClassifier {
 public:
  virtual ~TrainedClassifier() = default;
  virtual Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const = 0;
  const std::vector<int>& labels() const { return labels_; }
  std::vector<int> predict(const Eigen::MatrixXd& X) const;
  /// Training-loss trace where the family records one (gbt rounds).
  virtual std::vector<double> training_loss() const { return {}; }

 protected:
  std::vector<int> labels_;
  int n_features_ = 0;
  void check_width(const Eigen::MatrixXd& X) const;
};

/// Family-appropriate default hyperparameters (boosting defaults are kept
/// shallow and leaf-limited so single duplicated rows cannot be memorized).
ClassifierSpec default_spec(Family family);

std::unique_ptr<TrainedClassifier> train(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                                         const std::vector<int>& y);

/// Per-hyperparameter candidate lists; empty lists fall back to the family's
/// defaults. Enumeration order is fixed so score ties resolve deterministically.
struct ParamGrid {
  std::vector<int> max_depth;
  std::vector<int> n_trees;
  std::vector<int> n_rounds;
  std::vector<double> learning_rate;
  std::vector<double> l2;
  std::vector<int> k;
  std::vector<std::vector<int>> hidden;
  std::vector<int> epochs;
  std::vector<int> gmm_components;

  std::vector<ClassifierSpec> enumerate(Family family, std::uint64_t seed) const;
};

/// Stratified k-fold cross-validation maximizing mean macro AUCROC; ties go
/// to the first candidate in enumeration order.
ClassifierSpec grid_search(Family family, const ParamGrid& grid, const Eigen::MatrixXd& X,
                           const std::vector<int>& y, int folds, std::uint64_t seed);

}  // namespace synthlab
