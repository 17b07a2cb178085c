#include "scenegen/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace scenegen {

double CollisionRate(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) throw std::invalid_argument("collision rate of no logs");
  int64_t collided = 0;
  for (const EpisodeLog& log : logs) collided += log.summary.collided ? 1 : 0;
  return static_cast<double>(collided) / static_cast<double>(logs.size());
}

int ExclusionFrames(double exclude_tail_s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (exclude_tail_s <= 0.0) return 0;
  return static_cast<int>(std::ceil(exclude_tail_s / dt - 1e-9));
}

InvalidCount PhysInvalidCount(const std::vector<EpisodeLog>& logs,
                              double exclude_tail_s, double dt) {
  const int drop = ExclusionFrames(exclude_tail_s, dt);
  InvalidCount c;
  for (const EpisodeLog& log : logs) {
    int64_t usable = static_cast<int64_t>(log.frames.size());
    if (log.summary.collided) usable -= 1 + drop;
    for (int64_t t = 0; t < usable; ++t) {
      ++c.frames;
      if (log.frames[static_cast<size_t>(t)].sigma < 0.0) ++c.invalid;
    }
  }
  return c;
}

double PhysInvalidRate(const std::vector<EpisodeLog>& logs,
                       double exclude_tail_s, double dt) {
  return PhysInvalidCount(logs, exclude_tail_s, dt).Rate();
}

int GridCell(double v, int k) {
  const double c = std::clamp(v, 0.0, 1.0);
  return std::max(0, static_cast<int>(std::ceil(c * k)) - 1);
}

double GapCoverageScore(const std::vector<EpisodeLog>& logs, int k) {
  if (k <= 0) throw std::invalid_argument("grid size must be positive");
  std::set<std::pair<int, int>> cells;
  for (const EpisodeLog& log : logs) {
    if (!log.summary.collided) continue;
    for (const Frame& f : log.frames) {
      if (!(f.sigma > 0.0)) continue;
      cells.insert({GridCell(f.phi, k), GridCell(f.sigma, k)});
    }
  }
  return static_cast<double>(cells.size()) / (static_cast<double>(k) * k);
}

std::vector<std::vector<double>> CoverageGrid(
    const std::vector<EpisodeLog>& logs,
    const std::vector<double>& phi_thresholds,
    const std::vector<double>& sigma_thresholds) {
  std::vector<std::vector<double>> grid(
      phi_thresholds.size(), std::vector<double>(sigma_thresholds.size(), 0.0));
  int64_t total = 0;
  for (const EpisodeLog& log : logs) {
    for (const Frame& f : log.frames) {
      ++total;
      for (size_t i = 0; i < phi_thresholds.size(); ++i) {
        if (f.phi < phi_thresholds[i]) continue;
        for (size_t j = 0; j < sigma_thresholds.size(); ++j) {
          if (f.sigma >= sigma_thresholds[j]) grid[i][j] += 1.0;
        }
      }
    }
  }
  if (total > 0) {
    for (auto& row : grid) {
      for (double& v : row) v /= static_cast<double>(total);
    }
  }
  return grid;
}

}  // namespace scenegen
