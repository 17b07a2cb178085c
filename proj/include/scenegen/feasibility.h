#ifndef SCENEGEN_FEASIBILITY_H_
#define SCENEGEN_FEASIBILITY_H_

#include <numbers>
#include <string>

#include "scenegen/geometry.h"

namespace scenegen {

enum class Axis { kLon, kLat, kNone };
enum class Direction { kSame, kOpposite };
enum class FeasibilityMode { kPhysicsLimit, kConservativeRss };

std::string ToString(Axis axis);
std::string ToString(FeasibilityMode mode);
FeasibilityMode ParseFeasibilityMode(const std::string& name);

// Constants for the feasibility score. Brake magnitudes are positive.
struct FeasibilityParams {
  double dt = 0.1;
  double ego_lon_brake = 3.0;
  double npc_lon_brake = 4.0;
  double ego_lat_brake = 2.0;
  double npc_lat_brake = 1.5;
  int p_norm = 2;
  double ttc_floor = 1e-4;
  double far_cap = 10000.0;
  double min_lat_safe = 0.30;
  double same_dir_yaw_threshold = 30.0 * std::numbers::pi / 180.0;

  // Only read in conservative mode.
  double reaction_time = 0.5;
  double lon_accel_max = 2.0;
  double lat_accel_max = 0.5;
  double lon_min_brake = 2.0;
  double lat_min_brake = 0.8;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
};

// Rear/front pair along one axis. Speeds are magnitudes toward the direction
// of travel; brakes are the maximal feasible decelerations. A front brake of
// zero means the front vehicle keeps its speed.
struct AxisPair {
  double v_rear = 0.0;
  double v_front = 0.0;
  double a_rear = 0.0;
  double a_front = 0.0;
};

// Physics-limit distances: zero reaction time, maximal braking.
double LimitLonOpposite(const AxisPair& pair);
double LimitLonSame(const AxisPair& pair);
double LimitLat(const AxisPair& pair, Direction direction);

// RSS safe distances with reaction time and conservative brake bounds from
// params. pair.a_front is used as the front vehicle's maximal brake in the
// same-direction longitudinal formula. For the lateral axis v_front is signed,
// positive when moving away from the rear vehicle.
double ConservativeRss(const AxisPair& pair, Axis axis, Direction direction,
                       const FeasibilityParams& params);

struct TtcResult {
  double t_x = 0.0;
  double t_y = 0.0;
  double t = 0.0;
  Axis colliding_axis = Axis::kNone;
};

// Per-axis time to close the edge clearance at the current closing speed.
// Non-closing axes get far_cap. Ties resolve to the longitudinal axis.
TtcResult AxialTtc(const RelativeFrame& rel, const FeasibilityParams& params);

struct Compensation {
  double l_x = 0.0;
  double l_y = 0.0;
};

// Reachable displacement along the axis orthogonal to the colliding one.
Compensation OrthogonalCompensation(double t, Axis colliding_axis,
                                    double dv_orthogonal,
                                    double a_rel_orthogonal,
                                    const FeasibilityParams& params);

struct FeasibilityReport {
  double sigma = 1.0;
  double d_limit_x = 0.0;
  double d_limit_y = 0.0;
  double clearance_x = 0.0;
  double clearance_y = 0.0;
  double residual_x = 0.0;  // normalized, >= 0
  double residual_y = 0.0;
  double t_x = 0.0;
  double t_y = 0.0;
  double t = 0.0;
  Axis colliding_axis = Axis::kNone;
  double l_x = 0.0;
  double l_y = 0.0;
  Direction direction_x = Direction::kSame;
  Direction direction_y = Direction::kSame;
  bool parallel_headings = false;
  FeasibilityMode mode = FeasibilityMode::kPhysicsLimit;
};

// Unified physical-safety score of the ego against one adversary.
// sigma >= 0: some braking/steering response can still avoid the collision
// under the decoupled-axis model; sigma < 0: it cannot.
FeasibilityReport Sigma(const KinematicState& ego, const KinematicState& adv,
                        const FeasibilityParams& params,
                        FeasibilityMode mode = FeasibilityMode::kPhysicsLimit);

}  // namespace scenegen

#endif  // SCENEGEN_FEASIBILITY_H_
