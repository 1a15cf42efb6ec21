#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "synthlab/mlp.hpp"

namespace synthlab {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update with bias correction on a flat parameter array.
/// `m`, `v` and `t` are the optimizer state and are advanced in place.
inline void adam_step(Eigen::ArrayXd& params, const Eigen::ArrayXd& grads, Eigen::ArrayXd& m,
                      Eigen::ArrayXd& v, long& t, const AdamConfig& hp) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam: shape mismatch");
  if (!grads.allFinite()) throw std::invalid_argument("adam: non-finite gradient");
  ++t;
  m = hp.beta1 * m + (1.0 - hp.beta1) * grads;
  v = hp.beta2 * v + (1.0 - hp.beta2) * grads.square();
  const double bc1 = 1.0 - std::pow(hp.beta1, t);
  const double bc2 = 1.0 - std::pow(hp.beta2, t);
  params -= hp.lr * (m / bc1) / ((v / bc2).sqrt() + hp.eps);
}

/// Adam state shaped like an Mlp's parameters.
class MlpAdam {
 public:
  explicit MlpAdam(const Mlp& net)
      : m_(MlpGrads::zeros_like(net)), v_(MlpGrads::zeros_like(net)) {}

  void step(Mlp& net, const MlpGrads& grads, const AdamConfig& hp) {
    if (!grads.finite()) throw std::runtime_error("adam: non-finite gradient");
    ++t_;
    const double bc1 = 1.0 - std::pow(hp.beta1, t_);
    const double bc2 = 1.0 - std::pow(hp.beta2, t_);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      auto upd = [&](Eigen::ArrayXXd& m, Eigen::ArrayXXd& v, const Eigen::ArrayXXd& g,
                     Eigen::ArrayXXd p) {
        m = hp.beta1 * m + (1.0 - hp.beta1) * g;
        v = hp.beta2 * v + (1.0 - hp.beta2) * g.square();
        return (p - hp.lr * (m / bc1) / ((v / bc2).sqrt() + hp.eps)).eval();
      };
      {
        Eigen::ArrayXXd m = m_.dW[i].array(), v = v_.dW[i].array();
        net.layers[i].W = upd(m, v, grads.dW[i].array(), net.layers[i].W.array()).matrix();
        m_.dW[i] = m.matrix();
        v_.dW[i] = v.matrix();
      }
      {
        Eigen::ArrayXXd m = m_.db[i].array(), v = v_.db[i].array();
        net.layers[i].b = upd(m, v, grads.db[i].array(), net.layers[i].b.array()).matrix().col(0);
        m_.db[i] = m.matrix().col(0);
        v_.db[i] = v.matrix().col(0);
      }
    }
  }

 private:
  MlpGrads m_, v_;
  long t_ = 0;
};

}  // namespace synthlab
