#pragma once

#include <vector>

#include <Eigen/Dense>

#include "synthlab/rng.hpp"

namespace synthlab {

enum class Activation { Identity, Relu, LeakyRelu, Tanh };

/// Fully connected network. Batches are row-major (n x d); layer i maps
/// width(i-1) -> width(i) via z = a W^T + b, a = act(z).
struct Mlp {
  struct Layer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;  // out
    Activation act = Activation::Identity;
  };
  std::vector<Layer> layers;

  /// He-style initialization scaled for the given activations.
  static Mlp create(const std::vector<int>& dims, const std::vector<Activation>& acts,
                    RngStream& rng);

  int input_size() const { return static_cast<int>(layers.front().W.cols()); }
  int output_size() const { return static_cast<int>(layers.back().W.rows()); }
  std::size_t parameter_count() const;
  bool finite() const;
};

struct MlpCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;   // z per layer
  std::vector<Eigen::MatrixXd> post;  // act(z) per layer
};

/// Forward pass; fills `cache` (when given) for a subsequent backward pass.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& batch,
                            MlpCache* cache = nullptr);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;

  static MlpGrads zeros_like(const Mlp& net);
  void add_scaled(const MlpGrads& other, double s);
  bool finite() const;
};

/// Backpropagates dL/d(output); returns parameter gradients and, when
/// requested, dL/d(input).
MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& grad_out,
                      Eigen::MatrixXd* grad_input = nullptr);

enum class MlpLoss { CrossEntropy, Mse, CriticMean };

/// Loss value plus exact analytic gradients for every parameter.
/// CrossEntropy treats the output as logits against one-hot targets;
/// Mse is (1/2n)sum||out - t||^2; CriticMean is the mean of a scalar head
/// (targets ignored).
double mlp_loss_and_grad(const Mlp& net, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& targets, MlpLoss loss, MlpGrads* grads,
                         Eigen::MatrixXd* grad_input = nullptr);

/// Gradient of a scalar-output net w.r.t. each input row. `ig` captures the
/// backward vectors needed by mlp_input_gradient_param_backward.
struct InputGradCache {
  std::vector<Eigen::MatrixXd> u;  // dY/dz per layer, n x width
};
Eigen::MatrixXd mlp_input_gradient(const Mlp& net, const MlpCache& cache,
                                   InputGradCache* ig = nullptr);

/// Accumulates d/dparams of sum_rows v_row . input_gradient_row, holding the
/// activation derivative masks fixed (exact a.e. for piecewise-linear
/// activations). Bias gradients are zero under this convention.
void mlp_input_gradient_param_backward(const Mlp& net, const MlpCache& cache,
                                       const InputGradCache& ig, const Eigen::MatrixXd& v,
                                       MlpGrads* grads);

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace synthlab
