#include "scenegen/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "scenegen/metrics.h"

namespace scenegen {

CriticalityKey MakeCriticalityKey(const EpisodeLog& log, double dt,
                                  double tail_s) {
  CriticalityKey key;
  key.collided = log.summary.collided;
  key.episode = log.summary.episode;
  key.min_positive_sigma = std::numeric_limits<double>::infinity();
  const size_t n = log.frames.size();
  const size_t tail = std::min(
      n, static_cast<size_t>(std::ceil(tail_s / dt - 1e-9)));
  double sum = 0.0;
  for (size_t i = n - tail; i < n; ++i) sum += log.frames[i].phi;
  key.tail_phi = tail == 0 ? 0.0 : sum / static_cast<double>(tail);
  for (const Frame& f : log.frames) {
    if (f.sigma > 0.0) {
      key.min_positive_sigma = std::min(key.min_positive_sigma, f.sigma);
    }
  }
  return key;
}

bool MoreCritical(const CriticalityKey& a, const CriticalityKey& b) {
  if (a.collided != b.collided) return a.collided;
  if (a.tail_phi != b.tail_phi) return a.tail_phi > b.tail_phi;
  if (a.min_positive_sigma != b.min_positive_sigma) {
    return a.min_positive_sigma < b.min_positive_sigma;
  }
  return a.episode < b.episode;
}

TopK SelectTopK(const std::vector<EpisodeLog>& logs, int k, double dt) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  TopK out;
  if (k == 0) return out;
  if (static_cast<size_t>(k) > logs.size()) {
    out.warning = "only " + std::to_string(logs.size()) +
                  " episodes available, returning all of them";
  }
  std::vector<CriticalityKey> keys;
  keys.reserve(logs.size());
  for (const EpisodeLog& log : logs) keys.push_back(MakeCriticalityKey(log, dt));
  std::vector<size_t> order(logs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return MoreCritical(keys[a], keys[b]);
  });
  const size_t take = std::min(order.size(), static_cast<size_t>(k));
  for (size_t i = 0; i < take; ++i) out.logs.push_back(logs[order[i]]);
  return out;
}

EvalReport EvaluateLogs(const std::vector<EpisodeLog>& logs, double dt,
                        const std::string& label, double exclude_tail_s) {
  if (logs.empty()) throw std::invalid_argument("no episodes to evaluate");
  EvalReport r;
  r.controller = label;
  r.episodes = static_cast<int64_t>(logs.size());
  r.collision_rate = CollisionRate(logs);
  r.phys_invalid_rate = PhysInvalidRate(logs, exclude_tail_s, dt);
  r.gcs = GapCoverageScore(logs);
  return r;
}

EvalReport EvaluateReplay(const WorldConfig& world,
                          const FeasibilityParams& feasibility,
                          const RiskCritic* critic,
                          const std::vector<EpisodeLog>& logs, EgoKind ego,
                          double exclude_tail_s) {
  if (logs.empty()) throw std::invalid_argument("no episodes to evaluate");
  std::vector<EpisodeLog> replayed;
  replayed.reserve(logs.size());
  for (const EpisodeLog& log : logs) {
    replayed.push_back(ReplayEpisode(world, feasibility, critic, log, ego));
  }
  return EvaluateLogs(replayed, world.dt, ToString(ego), exclude_tail_s);
}

}  // namespace scenegen
