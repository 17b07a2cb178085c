#include "scenegen/nn.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace scenegen {
namespace {

double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Loss = sum(weights .* output); central differences on every parameter.
void CheckGradient(Activation act, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mlp net({4, 7, 5, 3}, act);
  net.Init(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(4, 6);
  Eigen::MatrixXd w(3, 6);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (int i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  // Offset biases so no ReLU unit sits at its kink.
  Eigen::VectorXd theta = net.Parameters();
  for (int i = 0; i < theta.size(); ++i) theta(i) += 0.05 * normal(rng);
  net.SetParameters(theta);

  Mlp::Cache cache;
  net.Forward(x, &cache);
  const Eigen::VectorXd grad = net.Backward(cache, w);
  ASSERT_EQ(grad.size(), net.ParameterCount());

  const double h = 1e-6;
  int worst = -1;
  double worst_err = 0.0;
  for (int i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd p = theta;
    p(i) += h;
    net.SetParameters(p);
    const double up = (net.Forward(x, nullptr).cwiseProduct(w)).sum();
    p(i) -= 2 * h;
    net.SetParameters(p);
    const double down = (net.Forward(x, nullptr).cwiseProduct(w)).sum();
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(grad(i)) < 1e-7) continue;
    const double err = RelativeError(fd, grad(i));
    if (err > worst_err) {
      worst_err = err;
      worst = i;
    }
  }
  EXPECT_LT(worst_err, 1e-4) << "parameter " << worst;
}

TEST(MlpTest, TanhGradientMatchesFiniteDifferences) {
  CheckGradient(Activation::kTanh, 1);
  CheckGradient(Activation::kTanh, 2);
}

TEST(MlpTest, ReluGradientMatchesFiniteDifferences) {
  CheckGradient(Activation::kRelu, 3);
  CheckGradient(Activation::kRelu, 4);
}

TEST(MlpTest, ParameterRoundTrip) {
  std::mt19937_64 rng(9);
  Mlp net({3, 4, 2}, Activation::kTanh);
  net.Init(rng);
  EXPECT_EQ(net.ParameterCount(), 3 * 4 + 4 + 4 * 2 + 2);
  const Eigen::VectorXd p = net.Parameters();
  Mlp other({3, 4, 2}, Activation::kTanh);
  other.SetParameters(p);
  EXPECT_EQ(other.Parameters(), p);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.3);
  EXPECT_EQ(net.Forward(x), other.Forward(x));
}

TEST(MlpTest, BatchedForwardMatchesSingle) {
  std::mt19937_64 rng(10);
  Mlp net({3, 8, 2}, Activation::kRelu);
  net.Init(rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  const Eigen::MatrixXd y = net.Forward(x, nullptr);
  for (int j = 0; j < 5; ++j) {
    const Eigen::VectorXd yj = net.Forward(Eigen::VectorXd(x.col(j)));
    EXPECT_NEAR((y.col(j) - yj).norm(), 0.0, 1e-14);
  }
}

TEST(MlpTest, InitIsSeeded) {
  std::mt19937_64 a(5);
  std::mt19937_64 b(5);
  Mlp n1({6, 16, 1}, Activation::kRelu);
  Mlp n2({6, 16, 1}, Activation::kRelu);
  n1.Init(a);
  n2.Init(b);
  EXPECT_EQ(n1.Parameters(), n2.Parameters());
  EXPECT_TRUE(n1.layers()[0].b.isZero());
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Adam adam(3, 0.01);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 0.0;
  adam.Step(&p, g);
  EXPECT_NEAR(p(0), -0.01, 1e-9);
  EXPECT_NEAR(p(1), 0.01, 1e-9);
  EXPECT_DOUBLE_EQ(p(2), 0.0);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(AdamTest, MinimizesQuadratic) {
  Adam adam(2, 0.05);
  Eigen::VectorXd p(2);
  p << 3.0, -2.0;
  for (int i = 0; i < 2000; ++i) adam.Step(&p, 2.0 * p);
  EXPECT_LT(p.norm(), 1e-2);
}

TEST(ClipGradNormTest, RescalesOnlyAboveLimit) {
  Eigen::VectorXd g(2);
  g << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(ClipGradNorm(&g, 0.5), 5.0);
  EXPECT_NEAR(g.norm(), 0.5, 1e-15);
  EXPECT_NEAR(g(0) / g(1), 0.75, 1e-15);
  Eigen::VectorXd small(2);
  small << 0.1, 0.1;
  const Eigen::VectorXd copy = small;
  ClipGradNorm(&small, 0.5);
  EXPECT_EQ(small, copy);
}

}  // namespace
}  // namespace scenegen
