#ifndef SCENEGEN_RISK_H_
#define SCENEGEN_RISK_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scenegen/geometry.h"
#include "scenegen/nn.h"

namespace scenegen {

// How high-risk samples are identified for the BCE weight.
enum class RiskWeightMode { kHighRiskTarget, kCollisionFlag };

std::string ToString(RiskWeightMode mode);
RiskWeightMode ParseRiskWeightMode(const std::string& name);

struct RiskParams {
  int hidden = 128;
  double lr = 1e-3;
  double gamma = 0.95;
  double w_plus = 50.0;
  double high_risk_threshold = 0.85;
  double kappa = 1.0;
  double tau = 0.01;
  double distance_floor = 0.5;
  double far_cap = 10000.0;
  RiskWeightMode weight_mode = RiskWeightMode::kHighRiskTarget;
  int batch_size = 256;
  int replay_capacity = 20000;
  int updates_per_episode = 8;
  // Episodes collected before the first critic update.
  int warmup_episodes = 0;

  void Validate() const;
};

// [lon clearance, lat clearance, lon closing, lat closing, 1/d, cos dpsi].
using RiskFeatures = std::array<double, 6>;

double CenterDistance(const KinematicState& ego, const KinematicState& adv);

RiskFeatures ExtractRiskFeatures(const KinematicState& ego,
                                 const KinematicState& adv,
                                 const RiskParams& params);

// F(s) = kappa / max(d, floor).
double Potential(double distance, const RiskParams& params);

// 1{C} + gamma * F(s') - F(s).
double ShapedReward(bool collision, double f, double f_next, double gamma);

// clip(r + (1 - done) * gamma * phi_tgt_next, 0, 1).
double TdTarget(double r_shaped, bool done, double phi_tgt_next, double gamma);

// clip(phi_hat + f, 0, 1).
double RecoverPhi(double phi_hat, double f);

double SampleWeight(double target, bool collision, const RiskParams& params);

struct RiskSample {
  RiskFeatures x{};
  double target = 0.0;
  bool collision = false;
};

struct RiskTrainResult {
  bool ok = true;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::string diagnostic;
};

// Weighted BCE with soft targets, averaged over the batch, and its gradient
// with respect to the pre-sigmoid logits.
double WeightedBce(const Eigen::VectorXd& logits, const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& weights, Eigen::VectorXd* grad_logits);

class RiskCritic {
 public:
  RiskCritic() = default;
  RiskCritic(const RiskParams& params, uint64_t seed);

  // Online and target predictions of the shifted risk, in (0, 1).
  double Predict(const RiskFeatures& x) const;
  double PredictTarget(const RiskFeatures& x) const;
  // Recovered risk for a state at center distance d.
  double Phi(const RiskFeatures& x, double distance) const;

  // One Adam step on weighted BCE, then a Polyak update of the target.
  RiskTrainResult TrainStep(const std::vector<RiskSample>& batch);
  void PolyakUpdate();

  const RiskParams& params() const { return params_; }
  Mlp& online() { return online_; }
  const Mlp& online() const { return online_; }
  Mlp& target() { return target_; }
  const Mlp& target() const { return target_; }
  Adam& optimizer() { return adam_; }
  const Adam& optimizer() const { return adam_; }

  static Eigen::VectorXd Scale(const RiskFeatures& x);

 private:
  RiskParams params_;
  Mlp online_;
  Mlp target_;
  Adam adam_;
};

}  // namespace scenegen

#endif  // SCENEGEN_RISK_H_
