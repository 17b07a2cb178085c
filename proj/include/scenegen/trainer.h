#ifndef SCENEGEN_TRAINER_H_
#define SCENEGEN_TRAINER_H_

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scenegen/config.h"
#include "scenegen/microsim.h"
#include "scenegen/policy.h"
#include "scenegen/risk.h"
#include "scenegen/schedule.h"

namespace scenegen {

struct IterationRecord {
  int64_t iteration = 0;
  int64_t episode = 0;  // episodes completed when the update ran
  int level = 1;
  double epsilon = 0.0;
  int samples = 0;
  PpoStats ppo;
  double risk_loss = 0.0;
  double window_cr = 0.0;
};

// One replayed transition for the risk critic.
struct RiskTransition {
  RiskFeatures x{};
  RiskFeatures x_next{};
  double f = 0.0;
  double f_next = 0.0;
  bool collision = false;
  bool done = false;
};

// Derives independent per-episode seeds from the run seed.
uint64_t MixSeed(uint64_t seed, uint64_t a, uint64_t b);

// Drives rollouts, online risk-critic updates, shielded PPO updates and the
// epsilon sweep. With an empty run_dir nothing is written to disk.
class Trainer {
 public:
  Trainer(const Config& config, std::string run_dir);

  // Restores the state saved at the most recent level switch. Returns false
  // if the run directory holds no saved state.
  bool Resume();

  // Trains until config.run.episodes episodes exist. on_episode is called
  // for each finished episode in order.
  void Run(const std::function<void(const EpisodeLog&)>& on_episode = {});

  const std::vector<EpisodeLog>& logs() const { return logs_; }
  const std::vector<IterationRecord>& iterations() const { return iterations_; }
  const RiskCritic& critic() const { return critic_; }
  const ScenarioPolicy& policy() const { return policy_; }
  int64_t next_episode() const { return next_episode_; }
  int active_level() const { return active_level_; }
  // Level snapshot if the level was ever left.
  const std::optional<ScenarioPolicy>& level_policy(int level) const {
    return level_policies_[static_cast<size_t>(level - 1)];
  }

  std::string LevelCheckpointPath(int level) const;
  std::string FinalCheckpointPath() const;
  std::string StatePath() const;
  std::string EpisodesPath() const;

 private:
  struct Rollout {
    EpisodeLog log;
    std::vector<PolicyState> states;
    std::vector<Eigen::Vector2d> u;
    std::vector<Eigen::Vector2d> z;
    std::vector<double> log_prob;
    std::vector<Eigen::Vector2d> values;
    std::vector<double> ttc;
  };

  Rollout Collect(int64_t episode, const ActiveLevel& active) const;
  void Process(Rollout& r);
  void TrainCritic(int steps);
  void UpdatePolicy();
  void SwitchLevel(int64_t episode);
  void SaveLevel(int level);
  void SaveState();
  void WriteFinal();
  void AppendEpisode(const EpisodeLog& log);
  void AppendMetrics(const IterationRecord& rec);

  Config config_;
  std::string run_dir_;
  EpsSchedule schedule_;
  RiskCritic critic_;
  ScenarioPolicy policy_;
  std::vector<std::optional<ScenarioPolicy>> level_policies_;
  int active_level_ = 1;
  double active_epsilon_ = 0.0;
  int64_t next_episode_ = 0;
  int64_t iteration_ = 0;

  std::vector<PpoSample> buffer_;
  std::vector<RiskTransition> replay_;
  size_t replay_head_ = 0;
  std::mt19937_64 update_rng_;
  std::mt19937_64 replay_rng_;
  double last_risk_loss_ = 0.0;
  int64_t window_episodes_ = 0;
  int64_t window_collisions_ = 0;

  std::vector<EpisodeLog> logs_;
  std::vector<IterationRecord> iterations_;
};

// Collision rate of `policy` at the epsilon of `level` over fresh episodes
// whose seeds derive from eval_seed. Runs without a risk critic.
double PolicyCollisionRate(const Config& config, const ScenarioPolicy& policy,
                           int level, int episodes, uint64_t eval_seed);

}  // namespace scenegen

#endif  // SCENEGEN_TRAINER_H_
