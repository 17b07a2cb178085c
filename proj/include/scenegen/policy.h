#ifndef SCENEGEN_POLICY_H_
#define SCENEGEN_POLICY_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scenegen/feasibility.h"
#include "scenegen/microsim.h"
#include "scenegen/nn.h"
#include "scenegen/route.h"

namespace scenegen {

constexpr int kPolicyStateDim = 12;
constexpr int kActionDim = 2;

// Normalized features: relative position (2), relative velocity (2), ego
// speed, ego heading error to the route, adversary speed, relative heading,
// clearances (2), capped TTC, active epsilon.
using PolicyState = std::array<double, kPolicyStateDim>;

PolicyState MakePolicyState(const KinematicState& ego, const KinematicState& adv,
                            const Route& route, const FeasibilityReport& report,
                            double epsilon);

struct PolicyParams {
  int hidden = 160;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.25;
  int batch_size = 2048;
  int epochs = 1;
  int minibatch = 256;
  double entropy_coef = 0.03;
  double lr = 1e-4;
  double grad_clip = 0.5;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  double init_std = 0.6;
  // The critic regresses returns multiplied by value_scale.
  double value_scale = 0.01;
  bool normalize_advantages = true;

  void Validate() const;
};

// Discounted vector returns and TD residuals for one episode. values holds
// V(s_0..s_T); its last entry is the bootstrap, zero at termination.
void VectorReturnsAndDeltas(const std::vector<Eigen::Vector2d>& rewards,
                            const std::vector<Eigen::Vector2d>& values,
                            double gamma, std::vector<Eigen::Vector2d>* returns,
                            std::vector<Eigen::Vector2d>* deltas);

// Componentwise GAE over one episode.
std::vector<Eigen::Vector2d> DualGae(const std::vector<Eigen::Vector2d>& deltas,
                                     double gamma, double lambda);

double Violation(double epsilon, double sigma);
int ShieldMask(double sigma_t, double sigma_next, double epsilon);
double ShieldedAdvantage(double a_phi, double a_sigma, int mask);

// Rescales to zero mean and unit standard deviation in place.
void NormalizeAdvantages(std::vector<double>* adv);

struct PpoSample {
  PolicyState state{};
  Eigen::Vector2d u = Eigen::Vector2d::Zero();  // pre-squash action
  // Standard-normal draw behind u; the entropy term reparameterizes with it.
  Eigen::Vector2d z = Eigen::Vector2d::Zero();
  double old_log_prob = 0.0;
  Eigen::Vector2d ret = Eigen::Vector2d::Zero();  // (G_phi, G_sigma)
  double advantage = 0.0;
};

struct PpoStats {
  bool ok = true;
  std::string diagnostic;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
};

double GaussianLogProb(const Eigen::Vector2d& u, const Eigen::Vector2d& mean,
                       const Eigen::Vector2d& log_std);

// Maps a pre-squash sample into the control bounds.
ControlAction SquashAction(const Eigen::Vector2d& u, const ControlBounds& b);

class ScenarioPolicy {
 public:
  struct Distribution {
    Eigen::Vector2d mean;
    Eigen::Vector2d log_std;
  };
  struct Sampled {
    Eigen::Vector2d u;
    Eigen::Vector2d z;
    ControlAction action;
    double log_prob = 0.0;
  };

  ScenarioPolicy() = default;
  ScenarioPolicy(const PolicyParams& params, const ControlBounds& bounds,
                 uint64_t seed);

  Distribution Dist(const PolicyState& s) const;
  Sampled Sample(const PolicyState& s, std::mt19937_64& rng) const;
  Eigen::Vector2d Value(const PolicyState& s) const;
  // Values of the columns of a kPolicyStateDim x n matrix.
  Eigen::MatrixXd Values(const Eigen::MatrixXd& states) const;

  // Mean clipped surrogate minus the entropy bonus over `batch`, and its
  // gradient wrt actor parameters when grad is non-null. The entropy is a
  // one-sample estimate for the squashed action distribution, evaluated at
  // mean + std * z.
  double ActorLoss(const std::vector<const PpoSample*>& batch,
                   Eigen::VectorXd* grad, double* entropy = nullptr,
                   double* clip_fraction = nullptr) const;
  // Mean squared vector error of the two-headed critic, in scaled units.
  double CriticLoss(const std::vector<const PpoSample*>& batch,
                    Eigen::VectorXd* grad) const;

  // One pass over the batch in shuffled minibatches.
  PpoStats Update(const std::vector<PpoSample>& batch, std::mt19937_64& rng);

  const PolicyParams& params() const { return params_; }
  const ControlBounds& bounds() const { return bounds_; }
  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  Adam& actor_opt() { return actor_opt_; }
  const Adam& actor_opt() const { return actor_opt_; }
  Adam& critic_opt() { return critic_opt_; }
  const Adam& critic_opt() const { return critic_opt_; }
  int ParameterCount() const {
    return actor_.ParameterCount() + critic_.ParameterCount();
  }

 private:
  Eigen::Vector2d LogStd(const Eigen::Vector2d& raw) const;

  PolicyParams params_;
  ControlBounds bounds_;
  Mlp actor_;
  Mlp critic_;
  Adam actor_opt_;
  Adam critic_opt_;
};

}  // namespace scenegen

#endif  // SCENEGEN_POLICY_H_
