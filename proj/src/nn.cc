#include "scenegen/nn.h"

#include <cmath>
#include <stdexcept>

namespace scenegen {

namespace {

void Activate(Activation act, Eigen::MatrixXd* z) {
  if (act == Activation::kRelu) {
    *z = z->cwiseMax(0.0);
  } else {
    *z = z->array().tanh().matrix();
  }
}

// Multiplies grad by the activation derivative, expressed through the
// post-activation values.
void ActivationGrad(Activation act, const Eigen::MatrixXd& post,
                    Eigen::MatrixXd* grad) {
  if (act == Activation::kRelu) {
    *grad = (post.array() > 0.0).select(grad->array(), 0.0).matrix();
  } else {
    *grad = (grad->array() * (1.0 - post.array().square())).matrix();
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, Activation hidden_activation)
    : sizes_(std::move(sizes)), activation_(hidden_activation) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp needs >= 2 sizes");
  for (size_t i = 0; i + 1 < sizes_.size(); ++i) {
    if (sizes_[i] <= 0 || sizes_[i + 1] <= 0) {
      throw std::invalid_argument("mlp layer sizes must be positive");
    }
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[i + 1], sizes_[i]),
                       Eigen::VectorXd::Zero(sizes_[i + 1])});
  }
}

void Mlp::Init(std::mt19937_64& rng) {
  for (DenseLayer& layer : layers_) {
    const double fan_in = static_cast<double>(layer.w.cols());
    const double fan_out = static_cast<double>(layer.w.rows());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r) layer.w(r, c) = u(rng);
    }
    layer.b.setZero();
  }
}

int Mlp::ParameterCount() const {
  int n = 0;
  for (const DenseLayer& layer : layers_) {
    n += static_cast<int>(layer.w.size() + layer.b.size());
  }
  return n;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd a = x;
  for (size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].w * a + layers_[l].b;
    if (l + 1 < layers_.size()) {
      if (activation_ == Activation::kRelu) {
        z = z.cwiseMax(0.0);
      } else {
        z = z.array().tanh().matrix();
      }
    }
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->hidden.clear();
  }
  Eigen::MatrixXd a = x;
  for (size_t l = 0; l < layers_.size(); ++l) {
    if (cache != nullptr) cache->inputs.push_back(a);
    Eigen::MatrixXd z = layers_[l].w * a;
    z.colwise() += layers_[l].b;
    if (l + 1 < layers_.size()) Activate(activation_, &z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::Backward(const Cache& cache,
                              const Eigen::MatrixXd& grad_out) const {
  Eigen::VectorXd flat(ParameterCount());
  std::vector<int> offsets(layers_.size());
  int offset = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = offset;
    offset += static_cast<int>(layers_[l].w.size() + layers_[l].b.size());
  }
  Eigen::MatrixXd grad = grad_out;
  for (size_t i = layers_.size(); i-- > 0;) {
    const DenseLayer& layer = layers_[i];
    const Eigen::MatrixXd dw = grad * cache.inputs[i].transpose();
    const Eigen::VectorXd db = grad.rowwise().sum();
    flat.segment(offsets[i], dw.size()) =
        Eigen::Map<const Eigen::VectorXd>(dw.data(), dw.size());
    flat.segment(offsets[i] + dw.size(), db.size()) = db;
    if (i == 0) break;
    grad = layer.w.transpose() * grad;
    // inputs[i] is the activated output of layer i - 1.
    ActivationGrad(activation_, cache.inputs[i], &grad);
  }
  return flat;
}

Eigen::VectorXd Mlp::Parameters() const {
  Eigen::VectorXd flat(ParameterCount());
  int offset = 0;
  for (const DenseLayer& layer : layers_) {
    flat.segment(offset, layer.w.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.w.data(), layer.w.size());
    offset += static_cast<int>(layer.w.size());
    flat.segment(offset, layer.b.size()) = layer.b;
    offset += static_cast<int>(layer.b.size());
  }
  return flat;
}

void Mlp::SetParameters(const Eigen::VectorXd& flat) {
  if (flat.size() != ParameterCount()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  int offset = 0;
  for (DenseLayer& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.w.data(), layer.w.size()) =
        flat.segment(offset, layer.w.size());
    offset += static_cast<int>(layer.w.size());
    layer.b = flat.segment(offset, layer.b.size());
    offset += static_cast<int>(layer.b.size());
  }
}

Adam::Adam(int n, double lr, double beta1, double beta2, double eps)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(n)),
      v_(Eigen::VectorXd::Zero(n)) {}

void Adam::Step(Eigen::VectorXd* params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params->array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void Adam::SetState(int64_t t, Eigen::VectorXd m, Eigen::VectorXd v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw std::invalid_argument("optimizer state size mismatch");
  }
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

double ClipGradNorm(Eigen::VectorXd* g, double max_norm) {
  const double norm = g->norm();
  if (norm > max_norm && norm > 0.0) *g *= max_norm / norm;
  return norm;
}

}  // namespace scenegen
