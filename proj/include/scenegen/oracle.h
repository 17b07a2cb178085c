#ifndef SCENEGEN_ORACLE_H_
#define SCENEGEN_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "scenegen/geometry.h"
#include "scenegen/microsim.h"

namespace scenegen {

enum class Verdict { kAvoidable, kUnavoidable, kUnknown };

std::string ToString(Verdict v);

// One-dimensional encounter along the ego's direction of travel. The ego
// moves forward at v_ego >= 0. The adversary's velocity v_adv is signed along
// the same axis. gap is the edge-to-edge distance; adversary_ahead says on
// which side the adversary is.
struct Braking1d {
  double gap = 0.0;
  double v_ego = 0.0;
  double v_adv = 0.0;
  bool adversary_ahead = true;
  double ego_brake = 3.0;
  double adv_brake = 4.0;
  double dt = 0.1;
  int levels = 5;
  int64_t max_steps = 100000;
};

struct OracleResult {
  Verdict verdict = Verdict::kUnknown;
  int64_t nodes = 0;
  std::string diagnostic;
};

// The adversary brakes at its bound; every per-step ego brake level in
// {0, 1/(levels-1), ..., 1} * ego_brake is searched. Avoidable iff some
// sequence keeps the gap non-negative until the encounter is resolved.
OracleResult BrakingOracle1d(const Braking1d& c);

// Minimum over t in [0, dt] of the separation between two points moving
// with constant accelerations that stop (velocity clamps at zero) instead of
// reversing. Exposed for testing.
double MinGapOverStep(double gap, double v_ego, double a_ego, double v_adv,
                      double a_adv, double dt);

struct EscapeOptions {
  double dt = 0.1;
  double horizon = 5.0;
  int reselect_steps = 5;
  int substeps = 4;
  int grid = 5;
  int64_t node_budget = 400000;
  // Maximum lateral excursion from the ego's initial heading line; negative
  // disables the corridor.
  double lateral_room = -1.0;
};

// Depth-first search over piecewise-constant ego accelerations on a grid;
// the adversary keeps its current velocity. Unknown when the node budget is
// exhausted.
OracleResult EscapeOracle2d(const KinematicState& ego,
                            const KinematicState& adv,
                            const ControlBounds& ego_bounds,
                            const EscapeOptions& options);

}  // namespace scenegen

#endif  // SCENEGEN_ORACLE_H_
