#ifndef SCENEGEN_NN_H_
#define SCENEGEN_NN_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace scenegen {

enum class Activation { kRelu, kTanh };

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

// Fully connected network with a linear output layer. Batched inputs are
// column-major: one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
    std::vector<Eigen::MatrixXd> hidden;  // post-activation of hidden layers
  };

  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation hidden_activation);

  // Uniform fan-in/fan-out initialization; biases start at zero.
  void Init(std::mt19937_64& rng);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int ParameterCount() const;

  Eigen::VectorXd Forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& x, Cache* cache) const;

  // Gradient of the loss wrt all parameters, in Parameters() order, given
  // dL/d(output) for the batch stored in cache.
  Eigen::VectorXd Backward(const Cache& cache,
                           const Eigen::MatrixXd& grad_out) const;

  // Layer by layer: weights column-major, then bias.
  Eigen::VectorXd Parameters() const;
  void SetParameters(const Eigen::VectorXd& flat);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<int> sizes_;
  Activation activation_ = Activation::kRelu;
  std::vector<DenseLayer> layers_;
};

class Adam {
 public:
  Adam() = default;
  Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void Step(Eigen::VectorXd* params, const Eigen::VectorXd& grad);

  double lr() const { return lr_; }
  int64_t steps() const { return t_; }
  const Eigen::VectorXd& m() const { return m_; }
  const Eigen::VectorXd& v() const { return v_; }
  void SetState(int64_t t, Eigen::VectorXd m, Eigen::VectorXd v);

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  int64_t t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

// Rescales g in place so its L2 norm is at most max_norm. Returns the norm
// before clipping.
double ClipGradNorm(Eigen::VectorXd* g, double max_norm);

}  // namespace scenegen

#endif  // SCENEGEN_NN_H_
