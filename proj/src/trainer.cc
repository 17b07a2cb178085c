#include "scenegen/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "scenegen/checkpoint.h"
#include "scenegen/episode_io.h"

namespace scenegen {

namespace fs = std::filesystem;

namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string RngState(const std::mt19937_64& rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

void SetRngState(const std::string& text, std::mt19937_64* rng) {
  std::istringstream ss(text);
  ss >> *rng;
  if (!ss) throw std::runtime_error("corrupt rng state in trainer state");
}

constexpr int kRiskWidth = 6;
constexpr int kTransitionWidth = 2 * kRiskWidth + 4;

const char* kMetricsHeader =
    "iteration,episode,level,epsilon,samples,policy_loss,value_loss,entropy,"
    "clip_fraction,risk_loss,window_cr\n";

}  // namespace

uint64_t MixSeed(uint64_t seed, uint64_t a, uint64_t b) {
  return SplitMix64(SplitMix64(SplitMix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

Trainer::Trainer(const Config& config, std::string run_dir)
    : config_(config),
      run_dir_(std::move(run_dir)),
      schedule_(config.schedule),
      critic_(config.risk, MixSeed(config.run.seed, 0, 11)),
      policy_(config.policy, config.world.adv_bounds,
              MixSeed(config.run.seed, 0, 12)),
      level_policies_(static_cast<size_t>(config.schedule.levels)),
      update_rng_(MixSeed(config.run.seed, 0, 13)),
      replay_rng_(MixSeed(config.run.seed, 0, 14)) {
  config_.Validate();
  const ActiveLevel a = schedule_.Active(0);
  active_level_ = a.level;
  active_epsilon_ = a.epsilon;
  if (!run_dir_.empty()) {
    fs::create_directories(fs::path(run_dir_) / "checkpoints");
  }
}

std::string Trainer::LevelCheckpointPath(int level) const {
  return (fs::path(run_dir_) / "checkpoints" /
          ("level_" + std::to_string(level) + ".ckpt"))
      .string();
}

std::string Trainer::FinalCheckpointPath() const {
  return (fs::path(run_dir_) / "checkpoints" / "final.ckpt").string();
}

std::string Trainer::StatePath() const {
  return (fs::path(run_dir_) / "trainer_state.ckpt").string();
}

std::string Trainer::EpisodesPath() const {
  return (fs::path(run_dir_) / "episodes.jsonl").string();
}

Trainer::Rollout Trainer::Collect(int64_t episode,
                                  const ActiveLevel& active) const {
  Rollout r;
  const Variant variant = config_.run.variant;
  std::mt19937_64 action_rng(MixSeed(config_.run.seed, episode, 2));
  EpisodeSetup setup;
  setup.seed = MixSeed(config_.run.seed, episode, 1);
  setup.epsilon = variant == Variant::kRandom ? 0.0 : active.epsilon;
  setup.level = active.level;
  setup.episode = episode;
  const ControlBounds& b = config_.world.adv_bounds;

  AdversaryFn fn = [&](const FrameContext& ctx) -> ControlAction {
    const PolicyState s = MakePolicyState(*ctx.ego, *ctx.adv, *ctx.route,
                                          *ctx.feasibility, ctx.epsilon);
    r.states.push_back(s);
    r.ttc.push_back(ctx.feasibility->t);
    if (variant == Variant::kRandom) {
      std::uniform_real_distribution<double> lon(b.lon_min, b.lon_max);
      std::uniform_real_distribution<double> lat(-b.lat_max, b.lat_max);
      const double a_lon = lon(action_rng);
      return {a_lon, lat(action_rng)};
    }
    const ScenarioPolicy::Sampled smp = policy_.Sample(s, action_rng);
    r.u.push_back(smp.u);
    r.z.push_back(smp.z);
    r.log_prob.push_back(smp.log_prob);
    return smp.action;
  };
  const ScenarioTemplate tmpl = MakeTemplate(config_.world.scenario);
  r.log = RunEpisode(config_.world, config_.feasibility, &critic_, setup, fn);

  // Features of the final frame, which takes no action.
  const Frame& last = r.log.frames.back();
  const FeasibilityReport rep =
      Sigma(last.ego, last.adv, config_.feasibility, config_.feasibility_mode);
  r.states.push_back(
      MakePolicyState(last.ego, last.adv, tmpl.ego_route, rep, setup.epsilon));
  r.ttc.push_back(rep.t);

  if (variant != Variant::kRandom) {
    Eigen::MatrixXd x(kPolicyStateDim, static_cast<Eigen::Index>(r.states.size()));
    for (size_t i = 0; i < r.states.size(); ++i) {
      for (int k = 0; k < kPolicyStateDim; ++k) {
        x(k, static_cast<Eigen::Index>(i)) = r.states[i][k];
      }
    }
    const Eigen::MatrixXd v = policy_.Values(x);
    for (Eigen::Index i = 0; i < v.cols(); ++i) r.values.push_back(v.col(i));
    if (r.log.Terminal()) r.values.back().setZero();
  }
  return r;
}

void Trainer::Process(Rollout& r) {
  const EpisodeLog& log = r.log;
  const size_t n = log.frames.size() - 1;  // transitions
  const RiskParams& rp = config_.risk;

  for (size_t t = 0; t < n; ++t) {
    const Frame& a = log.frames[t];
    const Frame& b = log.frames[t + 1];
    RiskTransition tr;
    tr.x = ExtractRiskFeatures(a.ego, a.adv, rp);
    tr.x_next = ExtractRiskFeatures(b.ego, b.adv, rp);
    tr.f = Potential(CenterDistance(a.ego, a.adv), rp);
    tr.f_next = Potential(CenterDistance(b.ego, b.adv), rp);
    tr.collision = b.collision;
    tr.done = t + 1 == n && log.Terminal();
    if (replay_.size() < static_cast<size_t>(rp.replay_capacity)) {
      replay_.push_back(tr);
    } else {
      replay_[replay_head_] = tr;
      replay_head_ = (replay_head_ + 1) % replay_.size();
    }
  }

  ++window_episodes_;
  if (log.summary.collided) ++window_collisions_;
  if (config_.run.variant == Variant::kRandom || n == 0) return;

  std::vector<Eigen::Vector2d> rewards(n);
  for (size_t t = 0; t < n; ++t) {
    const Frame& next = log.frames[t + 1];
    const double risk_reward =
        config_.run.variant == Variant::kSigmaOnly
            ? std::exp(-r.ttc[t + 1] / config_.run.ttc_proxy_scale)
            : next.phi;
    rewards[t] = Eigen::Vector2d(risk_reward, next.sigma);
  }
  std::vector<Eigen::Vector2d> returns;
  std::vector<Eigen::Vector2d> deltas;
  VectorReturnsAndDeltas(rewards, r.values, config_.policy.gamma, &returns,
                         &deltas);
  const std::vector<Eigen::Vector2d> adv =
      DualGae(deltas, config_.policy.gamma, config_.policy.lambda);
  const bool shield = config_.run.variant != Variant::kPhiOnly;
  for (size_t t = 0; t < n; ++t) {
    PpoSample s;
    s.state = r.states[t];
    s.u = r.u[t];
    s.z = r.z[t];
    s.old_log_prob = r.log_prob[t];
    s.ret = returns[t];
    const int m = shield ? ShieldMask(log.frames[t].sigma,
                                      log.frames[t + 1].sigma,
                                      log.frames[t].epsilon)
                         : 0;
    s.advantage = ShieldedAdvantage(adv[t](0), adv[t](1), m);
    buffer_.push_back(s);
  }
}

void Trainer::TrainCritic(int steps) {
  const RiskParams& rp = config_.risk;
  if (replay_.size() < static_cast<size_t>(rp.batch_size)) return;
  std::uniform_int_distribution<size_t> pick(0, replay_.size() - 1);
  for (int k = 0; k < steps; ++k) {
    std::vector<RiskSample> batch(static_cast<size_t>(rp.batch_size));
    for (RiskSample& s : batch) {
      const RiskTransition& tr = replay_[pick(replay_rng_)];
      // The terminal state carries no potential.
      const double f_next = tr.done ? 0.0 : tr.f_next;
      const double shaped = ShapedReward(tr.collision, tr.f, f_next, rp.gamma);
      const double next = tr.done ? 0.0 : critic_.PredictTarget(tr.x_next);
      s.x = tr.x;
      s.target = TdTarget(shaped, tr.done, next, rp.gamma);
      s.collision = tr.collision;
    }
    const RiskTrainResult res = critic_.TrainStep(batch);
    if (res.ok) last_risk_loss_ = res.loss;
  }
}

void Trainer::UpdatePolicy() {
  if (buffer_.empty()) return;
  if (config_.policy.normalize_advantages) {
    std::vector<double> adv(buffer_.size());
    for (size_t i = 0; i < buffer_.size(); ++i) adv[i] = buffer_[i].advantage;
    NormalizeAdvantages(&adv);
    for (size_t i = 0; i < buffer_.size(); ++i) buffer_[i].advantage = adv[i];
  }
  IterationRecord rec;
  rec.iteration = ++iteration_;
  rec.episode = next_episode_;
  rec.level = active_level_;
  rec.epsilon = active_epsilon_;
  rec.samples = static_cast<int>(buffer_.size());
  rec.ppo = policy_.Update(buffer_, update_rng_);
  rec.risk_loss = last_risk_loss_;
  rec.window_cr = window_episodes_ == 0
                      ? 0.0
                      : static_cast<double>(window_collisions_) / window_episodes_;
  window_episodes_ = 0;
  window_collisions_ = 0;
  buffer_.clear();
  iterations_.push_back(rec);
  AppendMetrics(rec);
}

void Trainer::SaveLevel(int level) {
  level_policies_[static_cast<size_t>(level - 1)] = policy_;
  if (run_dir_.empty()) return;
  Checkpoint ckpt;
  ckpt.config_hash = ConfigHash(config_);
  PutPolicy(policy_, "policy", &ckpt);
  nlohmann::json meta = {{"level", level},
                         {"epsilon", schedule_.levels()[static_cast<size_t>(level - 1)]},
                         {"next_episode", next_episode_}};
  ckpt.metadata = meta.dump();
  SaveCheckpoint(ckpt, LevelCheckpointPath(level));
}

void Trainer::SwitchLevel(int64_t episode) {
  const ActiveLevel next = schedule_.Active(episode);
  active_level_ = next.level;
  active_epsilon_ = next.epsilon;
  const auto& saved = level_policies_[static_cast<size_t>(next.level - 1)];
  // A level seen before resumes from its own snapshot; a new level starts
  // from the current weights.
  if (saved.has_value()) policy_ = *saved;
}

void Trainer::SaveState() {
  if (run_dir_.empty()) return;
  Checkpoint ckpt;
  ckpt.config_hash = ConfigHash(config_);
  PutPolicy(policy_, "current", &ckpt);
  PutRiskCritic(critic_, "risk", &ckpt);
  std::vector<int> levels;
  for (size_t i = 0; i < level_policies_.size(); ++i) {
    if (level_policies_[i].has_value()) {
      PutPolicy(*level_policies_[i], "level" + std::to_string(i + 1), &ckpt);
      levels.push_back(static_cast<int>(i + 1));
    }
  }
  Eigen::VectorXd rb(static_cast<Eigen::Index>(replay_.size() * kTransitionWidth));
  for (size_t i = 0; i < replay_.size(); ++i) {
    const RiskTransition& tr = replay_[i];
    const Eigen::Index o = static_cast<Eigen::Index>(i * kTransitionWidth);
    for (int k = 0; k < kRiskWidth; ++k) {
      rb(o + k) = tr.x[static_cast<size_t>(k)];
      rb(o + kRiskWidth + k) = tr.x_next[static_cast<size_t>(k)];
    }
    rb(o + 12) = tr.f;
    rb(o + 13) = tr.f_next;
    rb(o + 14) = tr.collision ? 1.0 : 0.0;
    rb(o + 15) = tr.done ? 1.0 : 0.0;
  }
  ckpt.Put("replay", rb);
  uint64_t episodes_bytes = 0;
  uint64_t metrics_bytes = 0;
  const fs::path metrics = fs::path(run_dir_) / "metrics.csv";
  if (fs::exists(EpisodesPath())) episodes_bytes = fs::file_size(EpisodesPath());
  if (fs::exists(metrics)) metrics_bytes = fs::file_size(metrics);
  nlohmann::json meta = {{"next_episode", next_episode_},
                         {"iteration", iteration_},
                         {"active_level", active_level_},
                         {"levels_saved", levels},
                         {"replay_head", replay_head_},
                         {"update_rng", RngState(update_rng_)},
                         {"replay_rng", RngState(replay_rng_)},
                         {"last_risk_loss", last_risk_loss_},
                         {"window_episodes", window_episodes_},
                         {"window_collisions", window_collisions_},
                         {"episodes_bytes", episodes_bytes},
                         {"metrics_bytes", metrics_bytes}};
  ckpt.metadata = meta.dump();
  SaveCheckpoint(ckpt, StatePath());
}

bool Trainer::Resume() {
  if (run_dir_.empty() || !fs::exists(StatePath())) return false;
  const Checkpoint ckpt = LoadCheckpoint(StatePath());
  if (ckpt.config_hash != ConfigHash(config_)) {
    throw std::runtime_error("trainer state was written with another config");
  }
  const nlohmann::json meta = nlohmann::json::parse(ckpt.metadata);
  GetPolicy(ckpt, "current", &policy_);
  GetRiskCritic(ckpt, "risk", &critic_);
  for (auto& lp : level_policies_) lp.reset();
  for (int level : meta.at("levels_saved").get<std::vector<int>>()) {
    ScenarioPolicy p = policy_;
    GetPolicy(ckpt, "level" + std::to_string(level), &p);
    level_policies_[static_cast<size_t>(level - 1)] = std::move(p);
  }
  const Eigen::VectorXd& rb = ckpt.Get("replay", -1);
  replay_.assign(static_cast<size_t>(rb.size() / kTransitionWidth), {});
  for (size_t i = 0; i < replay_.size(); ++i) {
    RiskTransition& tr = replay_[i];
    const Eigen::Index o = static_cast<Eigen::Index>(i * kTransitionWidth);
    for (int k = 0; k < kRiskWidth; ++k) {
      tr.x[static_cast<size_t>(k)] = rb(o + k);
      tr.x_next[static_cast<size_t>(k)] = rb(o + kRiskWidth + k);
    }
    tr.f = rb(o + 12);
    tr.f_next = rb(o + 13);
    tr.collision = rb(o + 14) != 0.0;
    tr.done = rb(o + 15) != 0.0;
  }
  replay_head_ = meta.at("replay_head").get<size_t>();
  SetRngState(meta.at("update_rng").get<std::string>(), &update_rng_);
  SetRngState(meta.at("replay_rng").get<std::string>(), &replay_rng_);
  next_episode_ = meta.at("next_episode").get<int64_t>();
  iteration_ = meta.at("iteration").get<int64_t>();
  last_risk_loss_ = meta.at("last_risk_loss").get<double>();
  window_episodes_ = meta.at("window_episodes").get<int64_t>();
  window_collisions_ = meta.at("window_collisions").get<int64_t>();
  active_level_ = meta.at("active_level").get<int>();
  active_epsilon_ = schedule_.levels()[static_cast<size_t>(active_level_ - 1)];
  buffer_.clear();

  // Drop anything written after the snapshot and reload the kept episodes.
  const uint64_t ep_bytes = meta.at("episodes_bytes").get<uint64_t>();
  const uint64_t m_bytes = meta.at("metrics_bytes").get<uint64_t>();
  if (fs::exists(EpisodesPath())) fs::resize_file(EpisodesPath(), ep_bytes);
  const fs::path metrics = fs::path(run_dir_) / "metrics.csv";
  if (fs::exists(metrics)) fs::resize_file(metrics, m_bytes);
  logs_.clear();
  if (ep_bytes > 0) logs_ = ReadEpisodes(EpisodesPath());
  iterations_.clear();
  return true;
}

void Trainer::AppendEpisode(const EpisodeLog& log) {
  if (run_dir_.empty() || !config_.run.write_logs) return;
  const bool fresh = !fs::exists(EpisodesPath()) || fs::file_size(EpisodesPath()) == 0;
  std::ofstream out(EpisodesPath(), std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to episode log");
  if (fresh) out << EpisodeHeaderLine() << '\n';
  out << EncodeEpisode(log);
}

void Trainer::AppendMetrics(const IterationRecord& rec) {
  if (run_dir_.empty()) return;
  const fs::path path = fs::path(run_dir_) / "metrics.csv";
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (fresh) out << kMetricsHeader;
  nlohmann::json row = nlohmann::json::array(
      {rec.iteration, rec.episode, rec.level, rec.epsilon, rec.samples,
       rec.ppo.policy_loss, rec.ppo.value_loss, rec.ppo.entropy,
       rec.ppo.clip_fraction, rec.risk_loss, rec.window_cr});
  std::string line;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i > 0) line += ',';
    line += row[i].dump();
  }
  out << line << '\n';
}

void Trainer::WriteFinal() {
  SaveLevel(active_level_);
  if (run_dir_.empty()) return;
  Checkpoint ckpt;
  ckpt.config_hash = ConfigHash(config_);
  PutPolicy(policy_, "policy", &ckpt);
  PutRiskCritic(critic_, "risk", &ckpt);
  nlohmann::json meta = {{"episodes", next_episode_},
                         {"active_level", active_level_},
                         {"iterations", iteration_}};
  ckpt.metadata = meta.dump();
  SaveCheckpoint(ckpt, FinalCheckpointPath());
}

void Trainer::Run(const std::function<void(const EpisodeLog&)>& on_episode) {
  const int64_t total = config_.run.episodes;
  const int workers = config_.run.workers;
  const bool learn = config_.run.variant != Variant::kRandom;
  while (next_episode_ < total) {
    if (schedule_.SwitchesAt(next_episode_) &&
        schedule_.Active(next_episode_).level != active_level_) {
      if (learn) UpdatePolicy();
      SaveLevel(active_level_);
      SaveState();
      SwitchLevel(next_episode_);
    }
    // A round never straddles a level switch.
    const int64_t block_end =
        (next_episode_ / config_.schedule.switch_every + 1) *
        config_.schedule.switch_every;
    const int64_t round =
        std::min<int64_t>({static_cast<int64_t>(workers),
                           block_end - next_episode_, total - next_episode_});
    const ActiveLevel active{active_epsilon_, active_level_};
    std::vector<Rollout> rollouts(static_cast<size_t>(round));
    if (round == 1) {
      rollouts[0] = Collect(next_episode_, active);
    } else {
      std::vector<std::thread> threads;
      for (int64_t k = 0; k < round; ++k) {
        threads.emplace_back([this, k, &rollouts, &active] {
          rollouts[static_cast<size_t>(k)] = Collect(next_episode_ + k, active);
        });
      }
      for (std::thread& t : threads) t.join();
    }
    for (Rollout& r : rollouts) {
      Process(r);
      AppendEpisode(r.log);
      if (on_episode) on_episode(r.log);
      logs_.push_back(std::move(r.log));
      ++next_episode_;
    }
    if (next_episode_ > config_.risk.warmup_episodes) {
      TrainCritic(config_.risk.updates_per_episode * static_cast<int>(round));
    }
    if (learn && buffer_.size() >= static_cast<size_t>(config_.policy.batch_size)) {
      UpdatePolicy();
    }
  }
  WriteFinal();
}

double PolicyCollisionRate(const Config& config, const ScenarioPolicy& policy,
                           int level, int episodes, uint64_t eval_seed) {
  if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
  const EpsSchedule schedule(config.schedule);
  if (level < 1 || level > static_cast<int>(schedule.levels().size())) {
    throw std::invalid_argument("level out of range");
  }
  int64_t collisions = 0;
  for (int e = 0; e < episodes; ++e) {
    std::mt19937_64 rng(MixSeed(eval_seed, static_cast<uint64_t>(e), 2));
    EpisodeSetup setup;
    setup.seed = MixSeed(eval_seed, static_cast<uint64_t>(e), 1);
    setup.epsilon = schedule.levels()[static_cast<size_t>(level - 1)];
    setup.level = level;
    setup.episode = e;
    const EpisodeLog log = RunEpisode(
        config.world, config.feasibility, nullptr, setup,
        [&](const FrameContext& ctx) {
          const PolicyState s = MakePolicyState(*ctx.ego, *ctx.adv, *ctx.route,
                                                *ctx.feasibility, ctx.epsilon);
          return policy.Sample(s, rng).action;
        });
    if (log.summary.collided) ++collisions;
  }
  return static_cast<double>(collisions) / episodes;
}

}  // namespace scenegen
