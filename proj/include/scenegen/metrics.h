#ifndef SCENEGEN_METRICS_H_
#define SCENEGEN_METRICS_H_

#include <vector>

#include "scenegen/microsim.h"

namespace scenegen {

// Throws std::invalid_argument on an empty set.
double CollisionRate(const std::vector<EpisodeLog>& logs);

// Number of frames dropped before each collision frame.
int ExclusionFrames(double exclude_tail_s, double dt);

struct InvalidCount {
  int64_t invalid = 0;
  int64_t frames = 0;
  double Rate() const {
    return frames == 0 ? 0.0 : static_cast<double>(invalid) / frames;
  }
};

// Frames with sigma < 0 among pre-collision frames. In a collided episode
// the collision frame and the `ExclusionFrames` frames before it are dropped.
InvalidCount PhysInvalidCount(const std::vector<EpisodeLog>& logs,
                              double exclude_tail_s = 0.8, double dt = 0.1);
double PhysInvalidRate(const std::vector<EpisodeLog>& logs,
                       double exclude_tail_s = 0.8, double dt = 0.1);

// Cell of v in [0, 1] on a K-cell axis. Values on an interior boundary go to
// the lower cell; 0 and 1 land in the first and last cell.
int GridCell(double v, int k);

// Fraction of occupied (phi, sigma) cells among frames with sigma > 0 from
// collided episodes.
double GapCoverageScore(const std::vector<EpisodeLog>& logs, int k = 40);

// entry(i, j) = fraction of frames with phi >= phi_thresholds[i] and
// sigma >= sigma_thresholds[j].
std::vector<std::vector<double>> CoverageGrid(
    const std::vector<EpisodeLog>& logs,
    const std::vector<double>& phi_thresholds,
    const std::vector<double>& sigma_thresholds);

}  // namespace scenegen

#endif  // SCENEGEN_METRICS_H_
