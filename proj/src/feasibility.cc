#include "scenegen/feasibility.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scenegen {

namespace {

constexpr double kLimitFloor = 1e-6;

double StopDistance(double v, double a) { return v * v / (2.0 * a); }

void RequirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("feasibility.") + name +
                                " must be positive");
  }
}

// Motion of both vehicles along one ego axis, as speeds toward each other.
struct AxisMotion {
  double u_ego = 0.0;
  double u_adv = 0.0;
  double a_ego = 0.0;
  double a_adv = 0.0;
};

struct AxisLimit {
  double d_limit = 0.0;
  Direction direction = Direction::kSame;
};

AxisLimit PhysicsAxisLimit(const AxisMotion& m, Axis axis) {
  const bool lon = axis == Axis::kLon;
  if (m.u_ego > 0.0 && m.u_adv > 0.0) {
    const AxisPair pair{m.u_ego, m.u_adv, m.a_ego, m.a_adv};
    return {lon ? LimitLonOpposite(pair) : LimitLat(pair, Direction::kOpposite),
            Direction::kOpposite};
  }
  if (m.u_ego > 0.0) {
    // Ego closes on a receding or stopped adversary.
    const AxisPair pair{m.u_ego, std::max(0.0, -m.u_adv), m.a_ego, m.a_adv};
    return {lon ? LimitLonSame(pair) : LimitLat(pair, Direction::kSame),
            Direction::kSame};
  }
  if (m.u_adv > 0.0) {
    // Adversary closes from behind; braking cannot help the ego as the front
    // vehicle, so it keeps its speed.
    const AxisPair pair{m.u_adv, std::max(0.0, -m.u_ego), m.a_adv, 0.0};
    return {LimitLonSame(pair), Direction::kSame};
  }
  return {0.0, Direction::kSame};
}

double ConservativeAxisLimit(const AxisMotion& m, Axis axis,
                             const FeasibilityParams& p) {
  if (m.u_ego > 0.0 && m.u_adv > 0.0) {
    AxisPair pair{m.u_ego, m.u_adv, m.a_ego, m.a_adv};
    if (axis == Axis::kLat) pair.v_front = -m.u_adv;
    return ConservativeRss(pair, axis, Direction::kOpposite, p);
  }
  if (m.u_ego > 0.0 || m.u_adv <= 0.0) {
    AxisPair pair{std::max(0.0, m.u_ego), -m.u_adv, m.a_ego, m.a_adv};
    if (axis == Axis::kLon) pair.v_front = std::max(0.0, pair.v_front);
    return ConservativeRss(pair, axis, Direction::kSame, p);
  }
  AxisPair pair{m.u_adv, -m.u_ego, m.a_adv, 0.0};
  if (axis == Axis::kLon) pair.v_front = std::max(0.0, pair.v_front);
  return ConservativeRss(pair, axis, Direction::kSame, p);
}

// Saturates at 1: an axis whose projections already overlap is fully
// violated, however deep the overlap.
double NormalizedResidual(double d_limit, double clearance, double l) {
  if (d_limit <= 0.0) return 0.0;
  const double r =
      std::max(0.0, d_limit - clearance - l) / std::max(d_limit, kLimitFloor);
  return std::min(r, 1.0);
}

}  // namespace

std::string ToString(Axis axis) {
  switch (axis) {
    case Axis::kLon:
      return "lon";
    case Axis::kLat:
      return "lat";
    case Axis::kNone:
      return "none";
  }
  return "none";
}

std::string ToString(FeasibilityMode mode) {
  return mode == FeasibilityMode::kPhysicsLimit ? "physics_limit"
                                                : "conservative_rss";
}

FeasibilityMode ParseFeasibilityMode(const std::string& name) {
  if (name == "physics_limit") return FeasibilityMode::kPhysicsLimit;
  if (name == "conservative_rss") return FeasibilityMode::kConservativeRss;
  throw std::invalid_argument("unknown feasibility mode '" + name + "'");
}

void FeasibilityParams::Validate() const {
  RequirePositive(dt, "dt");
  RequirePositive(ego_lon_brake, "ego_lon_brake");
  RequirePositive(npc_lon_brake, "npc_lon_brake");
  RequirePositive(ego_lat_brake, "ego_lat_brake");
  RequirePositive(npc_lat_brake, "npc_lat_brake");
  RequirePositive(ttc_floor, "ttc_floor");
  RequirePositive(far_cap, "far_cap");
  RequirePositive(lon_accel_max, "lon_accel_max");
  RequirePositive(lat_accel_max, "lat_accel_max");
  RequirePositive(lon_min_brake, "lon_min_brake");
  RequirePositive(lat_min_brake, "lat_min_brake");
  if (p_norm < 1) throw std::invalid_argument("feasibility.p_norm must be >= 1");
  if (min_lat_safe < 0.0) {
    throw std::invalid_argument("feasibility.min_lat_safe must be >= 0");
  }
  if (reaction_time < 0.0) {
    throw std::invalid_argument("feasibility.reaction_time must be >= 0");
  }
  if (!(same_dir_yaw_threshold > 0.0 &&
        same_dir_yaw_threshold < std::numbers::pi / 2.0)) {
    throw std::invalid_argument(
        "feasibility.same_dir_yaw_threshold must lie in (0, pi/2)");
  }
}

double LimitLonOpposite(const AxisPair& pair) {
  return StopDistance(pair.v_rear, pair.a_rear) +
         StopDistance(pair.v_front, pair.a_front);
}

double LimitLonSame(const AxisPair& pair) {
  const double v_r = pair.v_rear;
  const double v_f = pair.v_front;
  const double a_r = pair.a_rear;
  const double a_f = pair.a_front;
  constexpr double kNone = -std::numeric_limits<double>::infinity();

  // A front vehicle that keeps its speed never stops, so only the
  // equal-speed bound remains.
  const double stop =
      a_f > 0.0 ? StopDistance(v_r, a_r) - StopDistance(v_f, a_f) : kNone;

  // The gap quadratic has its minimum where speeds equalize; that bound only
  // holds while the front vehicle is still moving at that instant.
  double equal = kNone;
  if (v_r > v_f && a_r > a_f) {
    const double t_star = (v_r - v_f) / (a_r - a_f);
    const bool front_moving = a_f <= 0.0 || t_star <= v_f / a_f;
    if (front_moving) equal = (v_r - v_f) * (v_r - v_f) / (2.0 * (a_r - a_f));
  }
  return std::max({stop, equal, 0.0});
}

double LimitLat(const AxisPair& pair, Direction direction) {
  const double rear = StopDistance(pair.v_rear, pair.a_rear);
  const double front = StopDistance(pair.v_front, pair.a_front);
  if (direction == Direction::kOpposite) return rear + front;
  return std::max(0.0, rear - front);
}

double ConservativeRss(const AxisPair& pair, Axis axis, Direction direction,
                       const FeasibilityParams& p) {
  const double rho = p.reaction_time;
  if (axis == Axis::kLon) {
    const double v_r = pair.v_rear;
    const double v_f = pair.v_front;
    const double v_r_rho = v_r + rho * p.lon_accel_max;
    if (direction == Direction::kOpposite) {
      const double v_f_rho = v_f + rho * p.lon_accel_max;
      return 0.5 * (v_r + v_r_rho) * rho +
             StopDistance(v_r_rho, p.lon_min_brake) +
             0.5 * (std::abs(v_f) + std::abs(v_f_rho)) * rho +
             StopDistance(v_f_rho, p.lon_min_brake);
    }
    const double front_stop =
        pair.a_front > 0.0 ? StopDistance(v_f, pair.a_front) : 0.0;
    return std::max(0.0, v_r * rho + 0.5 * p.lon_accel_max * rho * rho +
                             StopDistance(v_r_rho, p.lon_min_brake) -
                             front_stop);
  }
  const double v_r = pair.v_rear;
  const double v_f = pair.v_front;
  const double v_r_rho = v_r + rho * p.lat_accel_max;
  const double v_f_rho = v_f + rho * p.lat_accel_max;
  const double rear_term =
      0.5 * (v_r + v_r_rho) * rho + StopDistance(v_r_rho, p.lat_min_brake);
  const double front_term = 0.5 * (std::abs(v_f) + std::abs(v_f_rho)) * rho -
                            StopDistance(v_f_rho, p.lat_min_brake);
  return p.min_lat_safe + std::max(0.0, rear_term - front_term);
}

TtcResult AxialTtc(const RelativeFrame& rel, const FeasibilityParams& params) {
  auto axis_ttc = [&](double clearance, double closing) {
    if (!(closing > 0.0)) return params.far_cap;
    return std::min(params.far_cap, std::max(0.0, clearance) /
                                        std::max(closing, params.ttc_floor));
  };
  TtcResult r;
  r.t_x = axis_ttc(rel.clearance_x, rel.dv_x);
  r.t_y = axis_ttc(rel.clearance_y, rel.dv_y);
  r.t = std::min(r.t_x, r.t_y);
  // An axis whose time to contact reaches the cap is not on a collision
  // course within the horizon that matters.
  const bool x_closing = rel.dv_x > 0.0 && r.t_x < params.far_cap;
  const bool y_closing = rel.dv_y > 0.0 && r.t_y < params.far_cap;
  if (x_closing && (!y_closing || r.t_x <= r.t_y)) {
    r.colliding_axis = Axis::kLon;
  } else if (y_closing) {
    r.colliding_axis = Axis::kLat;
  } else {
    r.colliding_axis = Axis::kNone;
  }
  return r;
}

Compensation OrthogonalCompensation(double t, Axis colliding_axis,
                                    double dv_orthogonal,
                                    double a_rel_orthogonal,
                                    const FeasibilityParams& params) {
  Compensation c;
  if (colliding_axis == Axis::kNone || !(dv_orthogonal > 0.0)) return c;
  const double tc = std::min(std::max(t, 0.0), params.far_cap);
  const double l = 0.5 * a_rel_orthogonal * tc * tc;
  if (colliding_axis == Axis::kLon) {
    c.l_y = l;
  } else {
    c.l_x = l;
  }
  return c;
}

FeasibilityReport Sigma(const KinematicState& ego, const KinematicState& adv,
                        const FeasibilityParams& params, FeasibilityMode mode) {
  const RelativeFrame rel = MakeRelativeFrame(ego, adv);
  FeasibilityReport r;
  r.mode = mode;
  r.clearance_x = rel.clearance_x;
  r.clearance_y = rel.clearance_y;

  const double ac = std::abs(std::cos(rel.delta_psi));
  const double as = std::abs(std::sin(rel.delta_psi));
  const double thr = params.same_dir_yaw_threshold;
  r.parallel_headings = std::abs(rel.delta_psi) <= thr ||
                        std::abs(rel.delta_psi) >= std::numbers::pi - thr;

  // The adversary's brake capability projected on the ego axes.
  const double a_adv_x = ac * params.npc_lon_brake + as * params.npc_lat_brake;
  const double a_adv_y = as * params.npc_lon_brake + ac * params.npc_lat_brake;

  const Vec2 adv_vel = Rotate(adv.WorldVelocity(), -ego.yaw);
  const double n_x = rel.d_x >= 0.0 ? 1.0 : -1.0;
  const double n_y = rel.d_y >= 0.0 ? 1.0 : -1.0;
  const AxisMotion mx{n_x * ego.v_lon, -n_x * adv_vel.x, params.ego_lon_brake,
                      a_adv_x};
  const AxisMotion my{n_y * ego.v_lat, -n_y * adv_vel.y, params.ego_lat_brake,
                      a_adv_y};

  const AxisLimit lx = PhysicsAxisLimit(mx, Axis::kLon);
  const AxisLimit ly = PhysicsAxisLimit(my, Axis::kLat);
  r.direction_x = lx.direction;
  r.direction_y = ly.direction;
  r.d_limit_x = lx.d_limit;
  r.d_limit_y = ly.d_limit;
  if (mode == FeasibilityMode::kConservativeRss) {
    r.d_limit_x =
        std::max(r.d_limit_x, ConservativeAxisLimit(mx, Axis::kLon, params));
    r.d_limit_y =
        std::max(r.d_limit_y, ConservativeAxisLimit(my, Axis::kLat, params));
  }

  const TtcResult ttc = AxialTtc(rel, params);
  r.t_x = ttc.t_x;
  r.t_y = ttc.t_y;
  r.t = ttc.t;
  r.colliding_axis = ttc.colliding_axis;

  const bool lon_first = ttc.colliding_axis == Axis::kLon;
  const double dv_n = lon_first ? rel.dv_y : rel.dv_x;
  const double a_rel_n = lon_first ? params.ego_lat_brake + a_adv_y
                                   : params.ego_lon_brake + a_adv_x;
  const Compensation comp =
      OrthogonalCompensation(ttc.t, ttc.colliding_axis, dv_n, a_rel_n, params);
  r.l_x = comp.l_x;
  r.l_y = comp.l_y;

  r.residual_x = NormalizedResidual(r.d_limit_x, r.clearance_x, r.l_x);
  r.residual_y = NormalizedResidual(r.d_limit_y, r.clearance_y, r.l_y);
  const double p = static_cast<double>(params.p_norm);
  const double norm =
      std::pow(std::pow(r.residual_x, p) + std::pow(r.residual_y, p), 1.0 / p);
  r.sigma = 1.0 - norm;
  return r;
}

}  // namespace scenegen
