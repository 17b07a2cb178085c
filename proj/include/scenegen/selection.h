#ifndef SCENEGEN_SELECTION_H_
#define SCENEGEN_SELECTION_H_

#include <string>
#include <vector>

#include "scenegen/feasibility.h"
#include "scenegen/microsim.h"
#include "scenegen/risk.h"

namespace scenegen {

struct CriticalityKey {
  bool collided = false;
  double tail_phi = 0.0;        // mean phi over the final tail_s seconds
  double min_positive_sigma = 0.0;  // +inf if no frame has sigma > 0
  int64_t episode = 0;
};

CriticalityKey MakeCriticalityKey(const EpisodeLog& log, double dt,
                                  double tail_s = 2.0);

// Strict ordering: collided first, then higher tail phi, then lower minimum
// positive sigma, then lower episode index.
bool MoreCritical(const CriticalityKey& a, const CriticalityKey& b);

struct TopK {
  std::vector<EpisodeLog> logs;
  std::string warning;  // set when fewer than k episodes were available
};

TopK SelectTopK(const std::vector<EpisodeLog>& logs, int k, double dt);

struct EvalReport {
  std::string controller;
  int64_t episodes = 0;
  double collision_rate = 0.0;
  double phys_invalid_rate = 0.0;
  double gcs = 0.0;
};

// Open-loop replay of every log against `ego`, rescored with the critic.
// Throws std::invalid_argument on an empty log set.
EvalReport EvaluateReplay(const WorldConfig& world,
                          const FeasibilityParams& feasibility,
                          const RiskCritic* critic,
                          const std::vector<EpisodeLog>& logs, EgoKind ego,
                          double exclude_tail_s = 0.8);

// Metrics of logs as stored, with no replay.
EvalReport EvaluateLogs(const std::vector<EpisodeLog>& logs, double dt,
                        const std::string& label,
                        double exclude_tail_s = 0.8);

}  // namespace scenegen

#endif  // SCENEGEN_SELECTION_H_
