#include "synthlab/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace synthlab {

namespace {

constexpr double kLeakySlope = 0.2;

Eigen::MatrixXd act_apply(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::Identity:
      return z;
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::LeakyRelu:
      return z.cwiseMax(0.0) + kLeakySlope * z.cwiseMin(0.0);
    case Activation::Tanh:
      return z.array().tanh().matrix();
  }
  return z;
}

Eigen::MatrixXd act_deriv(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::Identity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::Relu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::LeakyRelu:
      return ((z.array() > 0.0).cast<double>() + kLeakySlope * (z.array() <= 0.0).cast<double>())
          .matrix();
    case Activation::Tanh: {
      Eigen::ArrayXXd t = z.array().tanh();
      return (1.0 - t * t).matrix();
    }
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

}  // namespace

Mlp Mlp::create(const std::vector<int>& dims, const std::vector<Activation>& acts,
                RngStream& rng) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw std::invalid_argument("mlp: dims/activations length mismatch");
  Mlp net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Layer layer;
    const int in = dims[i], out = dims[i + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    layer.W = Eigen::MatrixXd(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.W(r, c) = scale * rng.normal();
    layer.b = Eigen::VectorXd::Zero(out);
    layer.act = acts[i];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size() + l.b.size());
  return n;
}

bool Mlp::finite() const {
  for (const auto& l : layers)
    if (!l.W.allFinite() || !l.b.allFinite()) return false;
  return true;
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& batch, MlpCache* cache) {
  if (batch.cols() != net.input_size())
    throw std::invalid_argument("mlp_forward: batch width " + std::to_string(batch.cols()) +
                                " != input size " + std::to_string(net.input_size()));
  if (cache) {
    cache->input = batch;
    cache->pre.clear();
    cache->post.clear();
  }
  Eigen::MatrixXd a = batch;
  for (const auto& l : net.layers) {
    Eigen::MatrixXd z = (a * l.W.transpose()).rowwise() + l.b.transpose();
    a = act_apply(z, l.act);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
  }
  return a;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const auto& l : net.layers) {
    g.dW.push_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
    g.db.push_back(Eigen::VectorXd::Zero(l.b.size()));
  }
  return g;
}

void MlpGrads::add_scaled(const MlpGrads& other, double s) {
  for (std::size_t i = 0; i < dW.size(); ++i) {
    dW[i] += s * other.dW[i];
    db[i] += s * other.db[i];
  }
}

bool MlpGrads::finite() const {
  for (std::size_t i = 0; i < dW.size(); ++i)
    if (!dW[i].allFinite() || !db[i].allFinite()) return false;
  return true;
}

MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& grad_out,
                      Eigen::MatrixXd* grad_input) {
  MlpGrads grads;
  grads.dW.resize(net.layers.size());
  grads.db.resize(net.layers.size());
  Eigen::MatrixXd delta = grad_out;  // dL/da at current layer
  for (int i = static_cast<int>(net.layers.size()) - 1; i >= 0; --i) {
    const auto& l = net.layers[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd dz =
        delta.cwiseProduct(act_deriv(cache.pre[static_cast<std::size_t>(i)], l.act));
    const Eigen::MatrixXd& a_prev =
        i == 0 ? cache.input : cache.post[static_cast<std::size_t>(i - 1)];
    grads.dW[static_cast<std::size_t>(i)] = dz.transpose() * a_prev;
    grads.db[static_cast<std::size_t>(i)] = dz.colwise().sum().transpose();
    if (i > 0 || grad_input) delta = dz * l.W;
  }
  if (grad_input) *grad_input = delta;
  return grads;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
    out.row(r) = (e / e.sum()).matrix().transpose();
  }
  return out;
}

double mlp_loss_and_grad(const Mlp& net, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& targets, MlpLoss loss, MlpGrads* grads,
                         Eigen::MatrixXd* grad_input) {
  MlpCache cache;
  const Eigen::MatrixXd out = mlp_forward(net, batch, &cache);
  const double n = static_cast<double>(batch.rows());
  double value = 0.0;
  Eigen::MatrixXd grad_out;
  switch (loss) {
    case MlpLoss::CrossEntropy: {
      if (targets.rows() != out.rows() || targets.cols() != out.cols())
        throw std::invalid_argument("mlp loss: target shape mismatch");
      const Eigen::MatrixXd p = softmax_rows(out);
      for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c)
          if (targets(r, c) > 0.0)
            value -= targets(r, c) * std::log(std::max(p(r, c), 1e-300));
      value /= n;
      grad_out = (p - targets) / n;
      break;
    }
    case MlpLoss::Mse: {
      if (targets.rows() != out.rows() || targets.cols() != out.cols())
        throw std::invalid_argument("mlp loss: target shape mismatch");
      const Eigen::MatrixXd diff = out - targets;
      value = 0.5 * diff.squaredNorm() / n;
      grad_out = diff / n;
      break;
    }
    case MlpLoss::CriticMean: {
      if (out.cols() != 1) throw std::invalid_argument("mlp loss: critic head must be scalar");
      value = out.mean();
      grad_out = Eigen::MatrixXd::Constant(out.rows(), 1, 1.0 / n);
      break;
    }
  }
  if (grads || grad_input) {
    MlpGrads g = mlp_backward(net, cache, grad_out, grad_input);
    if (grads) *grads = std::move(g);
  }
  return value;
}

Eigen::MatrixXd mlp_input_gradient(const Mlp& net, const MlpCache& cache, InputGradCache* ig) {
  if (net.output_size() != 1)
    throw std::invalid_argument("mlp_input_gradient: scalar output required");
  const std::size_t L = net.layers.size();
  std::vector<Eigen::MatrixXd> u(L);
  u[L - 1] = act_deriv(cache.pre[L - 1], net.layers[L - 1].act);
  for (std::size_t i = L - 1; i > 0; --i)
    u[i - 1] = (u[i] * net.layers[i].W).cwiseProduct(act_deriv(cache.pre[i - 1],
                                                               net.layers[i - 1].act));
  Eigen::MatrixXd g = u[0] * net.layers[0].W;
  if (ig) ig->u = std::move(u);
  return g;
}

void mlp_input_gradient_param_backward(const Mlp& net, const MlpCache& cache,
                                       const InputGradCache& ig, const Eigen::MatrixXd& v,
                                       MlpGrads* grads) {
  // s_0 = v, s_i = (s_{i-1} W_i^T) .* phi'(z_i); dW_k += u_k^T s_{k-1}
  const std::size_t L = net.layers.size();
  Eigen::MatrixXd s = v;
  for (std::size_t i = 0; i < L; ++i) {
    grads->dW[i] += ig.u[i].transpose() * s;
    if (i + 1 < L)
      s = (s * net.layers[i].W.transpose())
              .cwiseProduct(act_deriv(cache.pre[i], net.layers[i].act));
  }
}

}  // namespace synthlab
