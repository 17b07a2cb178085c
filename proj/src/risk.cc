#include "scenegen/risk.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scenegen/feasibility.h"

namespace scenegen {

namespace {

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

std::string ToString(RiskWeightMode mode) {
  return mode == RiskWeightMode::kHighRiskTarget ? "high_risk_target"
                                                 : "collision_flag";
}

RiskWeightMode ParseRiskWeightMode(const std::string& name) {
  if (name == "high_risk_target") return RiskWeightMode::kHighRiskTarget;
  if (name == "collision_flag") return RiskWeightMode::kCollisionFlag;
  throw std::invalid_argument("unknown risk weight mode '" + name + "'");
}

void RiskParams::Validate() const {
  if (hidden <= 0) throw std::invalid_argument("risk.hidden must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("risk.lr must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("risk.gamma must lie in [0, 1)");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("risk.tau must lie in (0, 1]");
  }
  if (!(distance_floor > 0.0)) {
    throw std::invalid_argument("risk.distance_floor must be positive");
  }
  if (w_plus < 1.0) throw std::invalid_argument("risk.w_plus must be >= 1");
  if (batch_size <= 0 || replay_capacity < batch_size) {
    throw std::invalid_argument(
        "risk.batch_size must be positive and <= risk.replay_capacity");
  }
  if (updates_per_episode < 0 || warmup_episodes < 0) {
    throw std::invalid_argument("risk update counts must be >= 0");
  }
}

double CenterDistance(const KinematicState& ego, const KinematicState& adv) {
  return (adv.Position() - ego.Position()).Norm();
}

RiskFeatures ExtractRiskFeatures(const KinematicState& ego,
                                 const KinematicState& adv,
                                 const RiskParams& params) {
  const RelativeFrame rel = MakeRelativeFrame(ego, adv);
  const double d = std::max(CenterDistance(ego, adv), params.distance_floor);
  return {std::min(rel.clearance_x, params.far_cap),
          std::min(rel.clearance_y, params.far_cap),
          rel.dv_x,
          rel.dv_y,
          1.0 / d,
          std::cos(rel.delta_psi)};
}

double Potential(double distance, const RiskParams& params) {
  return params.kappa / std::max(distance, params.distance_floor);
}

double ShapedReward(bool collision, double f, double f_next, double gamma) {
  return (collision ? 1.0 : 0.0) + gamma * f_next - f;
}

double TdTarget(double r_shaped, bool done, double phi_tgt_next, double gamma) {
  const double y = r_shaped + (done ? 0.0 : gamma * phi_tgt_next);
  return std::clamp(y, 0.0, 1.0);
}

double RecoverPhi(double phi_hat, double f) {
  return std::clamp(phi_hat + f, 0.0, 1.0);
}

double SampleWeight(double target, bool collision, const RiskParams& params) {
  const bool high = params.weight_mode == RiskWeightMode::kHighRiskTarget
                        ? target > params.high_risk_threshold
                        : collision;
  return high ? params.w_plus : 1.0;
}

double WeightedBce(const Eigen::VectorXd& logits, const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& weights,
                   Eigen::VectorXd* grad_logits) {
  const Eigen::Index n = logits.size();
  double loss = 0.0;
  if (grad_logits != nullptr) grad_logits->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = logits(i);
    const double y = targets(i);
    // -[y log s(z) + (1 - y) log(1 - s(z))] = softplus(z) - y z
    loss += weights(i) * (Softplus(z) - y * z);
    if (grad_logits != nullptr) {
      (*grad_logits)(i) = weights(i) * (Sigmoid(z) - y) / static_cast<double>(n);
    }
  }
  return loss / static_cast<double>(n);
}

RiskCritic::RiskCritic(const RiskParams& params, uint64_t seed)
    : params_(params),
      online_({6, params.hidden, params.hidden, 1}, Activation::kRelu) {
  params_.Validate();
  std::mt19937_64 rng(seed);
  online_.Init(rng);
  target_ = online_;
  adam_ = Adam(online_.ParameterCount(), params_.lr);
}

Eigen::VectorXd RiskCritic::Scale(const RiskFeatures& x) {
  Eigen::VectorXd s(6);
  // Clearances can reach the far cap, so they are squashed to (-1, 1).
  s(0) = x[0] / (10.0 + std::abs(x[0]));
  s(1) = x[1] / (10.0 + std::abs(x[1]));
  s(2) = x[2] / 10.0;
  s(3) = x[3] / 10.0;
  s(4) = x[4];
  s(5) = x[5];
  return s;
}

double RiskCritic::Predict(const RiskFeatures& x) const {
  return Sigmoid(online_.Forward(Scale(x))(0));
}

double RiskCritic::PredictTarget(const RiskFeatures& x) const {
  return Sigmoid(target_.Forward(Scale(x))(0));
}

double RiskCritic::Phi(const RiskFeatures& x, double distance) const {
  return RecoverPhi(Predict(x), Potential(distance, params_));
}

RiskTrainResult RiskCritic::TrainStep(const std::vector<RiskSample>& batch) {
  RiskTrainResult result;
  if (batch.empty()) {
    result.ok = false;
    result.diagnostic = "empty batch";
    return result;
  }
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd x(6, n);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RiskSample& s = batch[static_cast<size_t>(i)];
    x.col(i) = Scale(s.x);
    y(i) = s.target;
    w(i) = SampleWeight(s.target, s.collision, params_);
  }
  Mlp::Cache cache;
  const Eigen::VectorXd logits = online_.Forward(x, &cache).row(0).transpose();
  Eigen::VectorXd grad_logits;
  result.loss = WeightedBce(logits, y, w, &grad_logits);
  const Eigen::VectorXd grad =
      online_.Backward(cache, grad_logits.transpose());
  result.grad_norm = grad.norm();
  if (!std::isfinite(result.loss) || !grad.allFinite()) {
    result.ok = false;
    result.diagnostic = "non-finite risk critic gradient; step skipped";
    return result;
  }
  Eigen::VectorXd theta = online_.Parameters();
  adam_.Step(&theta, grad);
  online_.SetParameters(theta);
  PolyakUpdate();
  return result;
}

void RiskCritic::PolyakUpdate() {
  const Eigen::VectorXd theta = online_.Parameters();
  Eigen::VectorXd tgt = target_.Parameters();
  tgt = (1.0 - params_.tau) * tgt + params_.tau * theta;
  target_.SetParameters(tgt);
}

}  // namespace scenegen
