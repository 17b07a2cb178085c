#include "scenegen/policy.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scenegen {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2 pi)

double Squash(double c, double scale) { return c / (scale + std::abs(c)); }

// log(1 - tanh(u)^2), stable for large |u|.
double LogSech2(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

Eigen::MatrixXd StateMatrix(const std::vector<const PpoSample*>& batch) {
  Eigen::MatrixXd x(kPolicyStateDim, static_cast<Eigen::Index>(batch.size()));
  for (size_t i = 0; i < batch.size(); ++i) {
    for (int k = 0; k < kPolicyStateDim; ++k) {
      x(k, static_cast<Eigen::Index>(i)) = batch[i]->state[k];
    }
  }
  return x;
}

Eigen::VectorXd ToVector(const PolicyState& s) {
  return Eigen::Map<const Eigen::VectorXd>(s.data(), kPolicyStateDim);
}

}  // namespace

PolicyState MakePolicyState(const KinematicState& ego, const KinematicState& adv,
                            const Route& route, const FeasibilityReport& report,
                            double epsilon) {
  const Vec2 d = ToEgoFrame(ego, adv);
  const Vec2 rel_v = Rotate(adv.WorldVelocity() - ego.WorldVelocity(), -ego.yaw);
  const RouteProjection proj = route.Project(ego.Position());
  const double heading_error = NormalizeAngle(ego.yaw - proj.heading);
  const double dpsi = NormalizeAngle(adv.yaw - ego.yaw);
  return {d.x / 30.0,
          d.y / 30.0,
          rel_v.x / 10.0,
          rel_v.y / 10.0,
          ego.Speed() / 10.0,
          heading_error,
          adv.Speed() / 10.0,
          dpsi / std::numbers::pi,
          Squash(report.clearance_x, 10.0),
          Squash(report.clearance_y, 10.0),
          std::min(report.t, 10.0) / 10.0,
          epsilon / 0.35};
}

void PolicyParams::Validate() const {
  if (hidden <= 0) throw std::invalid_argument("policy.hidden must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("policy.gamma must lie in (0, 1]");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("policy.lambda must lie in [0, 1]");
  }
  if (!(clip > 0.0 && clip < 1.0)) {
    throw std::invalid_argument("policy.clip must lie in (0, 1)");
  }
  if (batch_size <= 0 || epochs <= 0 || minibatch <= 0) {
    throw std::invalid_argument(
        "policy.batch_size, epochs and minibatch must be positive");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("policy.lr must be positive");
  if (!(grad_clip > 0.0)) {
    throw std::invalid_argument("policy.grad_clip must be positive");
  }
  if (!(value_scale > 0.0)) {
    throw std::invalid_argument("policy.value_scale must be positive");
  }
  if (entropy_coef < 0.0) {
    throw std::invalid_argument("policy.entropy_coef must be >= 0");
  }
  if (!(log_std_min < log_std_max)) {
    throw std::invalid_argument("policy.log_std_min must be < log_std_max");
  }
  const double init = std::log(init_std);
  if (!(init > log_std_min && init < log_std_max)) {
    throw std::invalid_argument("policy.init_std outside the log-std bounds");
  }
}

void VectorReturnsAndDeltas(const std::vector<Eigen::Vector2d>& rewards,
                            const std::vector<Eigen::Vector2d>& values,
                            double gamma, std::vector<Eigen::Vector2d>* returns,
                            std::vector<Eigen::Vector2d>* deltas) {
  const size_t n = rewards.size();
  if (values.size() != n + 1) {
    throw std::invalid_argument("values must hold one entry per state");
  }
  returns->assign(n, Eigen::Vector2d::Zero());
  deltas->assign(n, Eigen::Vector2d::Zero());
  Eigen::Vector2d g = values[n];
  for (size_t i = n; i-- > 0;) {
    g = rewards[i] + gamma * g;
    (*returns)[i] = g;
    (*deltas)[i] = rewards[i] + gamma * values[i + 1] - values[i];
  }
}

std::vector<Eigen::Vector2d> DualGae(const std::vector<Eigen::Vector2d>& deltas,
                                     double gamma, double lambda) {
  std::vector<Eigen::Vector2d> adv(deltas.size(), Eigen::Vector2d::Zero());
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (size_t i = deltas.size(); i-- > 0;) {
    acc = deltas[i] + gamma * lambda * acc;
    adv[i] = acc;
  }
  return adv;
}

double Violation(double epsilon, double sigma) {
  return std::max(0.0, epsilon - sigma);
}

int ShieldMask(double sigma_t, double sigma_next, double epsilon) {
  return Violation(epsilon, sigma_t) > 0.0 || Violation(epsilon, sigma_next) > 0.0
             ? 1
             : 0;
}

double ShieldedAdvantage(double a_phi, double a_sigma, int mask) {
  return mask * a_sigma + (1 - mask) * a_phi;
}

void NormalizeAdvantages(std::vector<double>* adv) {
  if (adv->empty()) return;
  double mean = 0.0;
  for (double a : *adv) mean += a;
  mean /= static_cast<double>(adv->size());
  double var = 0.0;
  for (double a : *adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv->size());
  const double std = std::sqrt(var) + 1e-8;
  for (double& a : *adv) a = (a - mean) / std;
}

double GaussianLogProb(const Eigen::Vector2d& u, const Eigen::Vector2d& mean,
                       const Eigen::Vector2d& log_std) {
  double lp = 0.0;
  for (int i = 0; i < kActionDim; ++i) {
    const double z = (u(i) - mean(i)) * std::exp(-log_std(i));
    lp += -0.5 * z * z - log_std(i) - 0.5 * kLogTwoPi;
  }
  return lp;
}

ControlAction SquashAction(const Eigen::Vector2d& u, const ControlBounds& b) {
  const double lon_mid = 0.5 * (b.lon_max + b.lon_min);
  const double lon_half = 0.5 * (b.lon_max - b.lon_min);
  return {lon_mid + lon_half * std::tanh(u(0)), b.lat_max * std::tanh(u(1))};
}

ScenarioPolicy::ScenarioPolicy(const PolicyParams& params,
                               const ControlBounds& bounds, uint64_t seed)
    : params_(params),
      bounds_(bounds),
      actor_({kPolicyStateDim, params.hidden, params.hidden, 2 * kActionDim},
             Activation::kTanh),
      critic_({kPolicyStateDim, params.hidden, params.hidden, 2},
              Activation::kTanh) {
  params_.Validate();
  std::mt19937_64 rng(seed);
  actor_.Init(rng);
  critic_.Init(rng);
  // Near-zero initial mean and a log-std head that starts at init_std.
  DenseLayer& out = actor_.layers().back();
  out.w *= 0.01;
  const double frac = (std::log(params_.init_std) - params_.log_std_min) /
                      (params_.log_std_max - params_.log_std_min);
  const double raw = std::atanh(2.0 * frac - 1.0);
  for (int i = 0; i < kActionDim; ++i) out.b(kActionDim + i) = raw;
  actor_opt_ = Adam(actor_.ParameterCount(), params_.lr);
  critic_opt_ = Adam(critic_.ParameterCount(), params_.lr);
}

Eigen::Vector2d ScenarioPolicy::LogStd(const Eigen::Vector2d& raw) const {
  const double half = 0.5 * (params_.log_std_max - params_.log_std_min);
  return (params_.log_std_min + half * (raw.array().tanh() + 1.0)).matrix();
}

ScenarioPolicy::Distribution ScenarioPolicy::Dist(const PolicyState& s) const {
  const Eigen::VectorXd out = actor_.Forward(ToVector(s));
  return {out.head<2>(), LogStd(out.tail<2>())};
}

ScenarioPolicy::Sampled ScenarioPolicy::Sample(const PolicyState& s,
                                               std::mt19937_64& rng) const {
  const Distribution d = Dist(s);
  std::normal_distribution<double> normal(0.0, 1.0);
  Sampled out;
  for (int i = 0; i < kActionDim; ++i) {
    out.z(i) = normal(rng);
    out.u(i) = d.mean(i) + std::exp(d.log_std(i)) * out.z(i);
  }
  out.log_prob = GaussianLogProb(out.u, d.mean, d.log_std);
  out.action = SquashAction(out.u, bounds_);
  return out;
}

Eigen::Vector2d ScenarioPolicy::Value(const PolicyState& s) const {
  return critic_.Forward(ToVector(s)) / params_.value_scale;
}

Eigen::MatrixXd ScenarioPolicy::Values(const Eigen::MatrixXd& states) const {
  return critic_.Forward(states, nullptr) / params_.value_scale;
}

double ScenarioPolicy::ActorLoss(const std::vector<const PpoSample*>& batch,
                                 Eigen::VectorXd* grad, double* entropy,
                                 double* clip_fraction) const {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  Mlp::Cache cache;
  const Eigen::MatrixXd out = actor_.Forward(StateMatrix(batch), &cache);
  Eigen::MatrixXd g_out(2 * kActionDim, n);
  const double lo = params_.log_std_min;
  const double half = 0.5 * (params_.log_std_max - lo);
  const Eigen::Vector2d scale(0.5 * (bounds_.lon_max - bounds_.lon_min),
                              bounds_.lat_max);
  double loss = 0.0;
  double ent = 0.0;
  int clipped = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const PpoSample& s = *batch[static_cast<size_t>(j)];
    const Eigen::Vector2d mean = out.col(j).head<2>();
    const Eigen::Vector2d raw = out.col(j).tail<2>();
    const Eigen::Vector2d th = raw.array().tanh().matrix();
    const Eigen::Vector2d log_std = (lo + half * (th.array() + 1.0)).matrix();
    const double lp = GaussianLogProb(s.u, mean, log_std);
    const double ratio = std::exp(lp - s.old_log_prob);
    const double a = s.advantage;
    const double clipped_ratio =
        std::clamp(ratio, 1.0 - params_.clip, 1.0 + params_.clip);
    const double surrogate = std::min(ratio * a, clipped_ratio * a);
    const bool flat = (a > 0.0 && ratio > 1.0 + params_.clip) ||
                      (a < 0.0 && ratio < 1.0 - params_.clip);
    if (ratio != clipped_ratio) ++clipped;
    // Single-sample entropy of the squashed action, with the sample
    // reparameterized as u = mean + std * z for fixed z.
    double h = 0.0;
    for (int i = 0; i < kActionDim; ++i) {
      const double u_re = mean(i) + std::exp(log_std(i)) * s.z(i);
      h += log_std(i) + 0.5 * (kLogTwoPi + 1.0) + LogSech2(u_re) +
           std::log(scale(i));
    }
    loss += -surrogate - params_.entropy_coef * h;
    ent += h;
    // d(-surrogate)/d(log prob)
    const double g_lp = flat ? 0.0 : -ratio * a;
    for (int i = 0; i < kActionDim; ++i) {
      const double inv_var = std::exp(-2.0 * log_std(i));
      const double diff = s.u(i) - mean(i);
      const double d_mean = diff * inv_var;
      const double d_logstd = diff * diff * inv_var - 1.0;
      const double std_z = std::exp(log_std(i)) * s.z(i);
      const double t = std::tanh(mean(i) + std_z);
      const double h_mean = -2.0 * t;
      const double h_logstd = 1.0 - 2.0 * t * std_z;
      g_out(i, j) = inv_n * (g_lp * d_mean - params_.entropy_coef * h_mean);
      const double g_ls =
          inv_n * (g_lp * d_logstd - params_.entropy_coef * h_logstd);
      g_out(kActionDim + i, j) = g_ls * half * (1.0 - th(i) * th(i));
    }
  }
  if (grad != nullptr) *grad = actor_.Backward(cache, g_out);
  if (entropy != nullptr) *entropy = ent * inv_n;
  if (clip_fraction != nullptr) *clip_fraction = clipped * inv_n;
  return loss * inv_n;
}

double ScenarioPolicy::CriticLoss(const std::vector<const PpoSample*>& batch,
                                  Eigen::VectorXd* grad) const {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Mlp::Cache cache;
  const Eigen::MatrixXd v = critic_.Forward(StateMatrix(batch), &cache);
  Eigen::MatrixXd g(2, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g.col(j) = v.col(j) - params_.value_scale * batch[static_cast<size_t>(j)]->ret;
  }
  const double loss = g.squaredNorm() / static_cast<double>(n);
  if (grad != nullptr) {
    *grad = critic_.Backward(cache, g * (2.0 / static_cast<double>(n)));
  }
  return loss;
}

PpoStats ScenarioPolicy::Update(const std::vector<PpoSample>& batch,
                                std::mt19937_64& rng) {
  PpoStats stats;
  if (batch.empty()) {
    stats.ok = false;
    stats.diagnostic = "empty batch";
    return stats;
  }
  std::vector<size_t> order(batch.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t mb = static_cast<size_t>(params_.minibatch);
  double w_total = 0.0;
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += mb) {
      const size_t end = std::min(order.size(), start + mb);
      std::vector<const PpoSample*> minibatch;
      for (size_t k = start; k < end; ++k) minibatch.push_back(&batch[order[k]]);
      Eigen::VectorXd g_actor;
      Eigen::VectorXd g_critic;
      double entropy = 0.0;
      double clip_frac = 0.0;
      const double pl = ActorLoss(minibatch, &g_actor, &entropy, &clip_frac);
      const double vl = CriticLoss(minibatch, &g_critic);
      if (!std::isfinite(pl) || !std::isfinite(vl) || !g_actor.allFinite() ||
          !g_critic.allFinite()) {
        stats.ok = false;
        stats.diagnostic = "non-finite PPO loss; minibatch skipped";
        continue;
      }
      ClipGradNorm(&g_actor, params_.grad_clip);
      ClipGradNorm(&g_critic, params_.grad_clip);
      Eigen::VectorXd theta = actor_.Parameters();
      actor_opt_.Step(&theta, g_actor);
      actor_.SetParameters(theta);
      Eigen::VectorXd omega = critic_.Parameters();
      critic_opt_.Step(&omega, g_critic);
      critic_.SetParameters(omega);

      const double w = static_cast<double>(end - start);
      stats.policy_loss += w * pl;
      stats.value_loss += w * vl;
      stats.entropy += w * entropy;
      stats.clip_fraction += w * clip_frac;
      w_total += w;
      ++stats.minibatches;
    }
  }
  if (w_total > 0.0) {
    stats.policy_loss /= w_total;
    stats.value_loss /= w_total;
    stats.entropy /= w_total;
    stats.clip_fraction /= w_total;
  }
  return stats;
}

}  // namespace scenegen
