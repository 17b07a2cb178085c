#include "scenegen/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scenegen {

namespace {

constexpr double kTouchTolerance = 1e-9;

// Point moving with signed velocity v that decelerates toward zero at rate
// a >= 0 and then stays put.
struct Mover {
  double v = 0.0;
  double a = 0.0;

  double StopTime() const {
    if (v == 0.0) return 0.0;
    if (a <= 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(v) / a;
  }
  double Position(double t) const {
    const double ts = std::min(t, StopTime());
    const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return v * ts - 0.5 * sgn * a * ts * ts;
  }
  double Velocity(double t) const {
    if (t >= StopTime()) return 0.0;
    const double sgn = v > 0.0 ? 1.0 : -1.0;
    return v - sgn * a * t;
  }
};

double MoverStep(const Mover& m, double dt, double* v_next) {
  *v_next = m.Velocity(dt);
  return m.Position(dt);
}

}  // namespace

std::string ToString(Verdict v) {
  switch (v) {
    case Verdict::kAvoidable:
      return "avoidable";
    case Verdict::kUnavoidable:
      return "unavoidable";
    case Verdict::kUnknown:
      return "unknown";
  }
  return "unknown";
}

double MinGapOverStep(double gap, double v_ego, double a_ego, double v_adv,
                      double a_adv, double dt) {
  const Mover e{v_ego, a_ego};
  const Mover a{v_adv, a_adv};
  auto sep = [&](double t) { return gap + a.Position(t) - e.Position(t); };
  std::vector<double> knots = {0.0, dt};
  for (double ts : {e.StopTime(), a.StopTime()}) {
    if (ts > 0.0 && ts < dt) knots.push_back(ts);
  }
  std::sort(knots.begin(), knots.end());
  double best = std::min(sep(0.0), sep(dt));
  for (size_t k = 0; k + 1 < knots.size(); ++k) {
    const double p = knots[k];
    const double q = knots[k + 1];
    best = std::min(best, sep(q));
    // Within a piece both velocities are affine in t; find where the
    // relative velocity vanishes.
    const double mid = 0.5 * (p + q);
    const double ve = e.Velocity(mid);
    const double va = a.Velocity(mid);
    const double se = ve == 0.0 ? 0.0 : (ve > 0.0 ? -a_ego : a_ego);
    const double sa = va == 0.0 ? 0.0 : (va > 0.0 ? -a_adv : a_adv);
    const double slope = sa - se;
    if (slope == 0.0) continue;
    // rel(t) = (va - ve) + slope * (t - mid)
    const double t = mid - (va - ve) / slope;
    if (t > p && t < q) best = std::min(best, sep(t));
  }
  return best;
}

OracleResult BrakingOracle1d(const Braking1d& c) {
  if (!(c.dt > 0.0) || c.levels < 2 || c.ego_brake <= 0.0 ||
      c.adv_brake <= 0.0 || c.v_ego < 0.0 || c.gap < -kTouchTolerance) {
    throw std::invalid_argument("invalid 1d oracle case");
  }
  OracleResult result;
  // Mirror the behind case so that separation = gap + x_adv - x_ego always.
  const double dir = c.adversary_ahead ? 1.0 : -1.0;
  struct Node {
    double x;
    double v;  // ego speed, >= 0
  };
  std::vector<Node> frontier = {{0.0, c.v_ego}};
  double x_adv = c.gap;
  double v_adv = dir * c.v_adv;

  auto resolved = [&](const Node& n) {
    const double ve = dir * n.v;
    // Separation rate is v_adv - ve; it never turns negative once the
    // adversary has stopped and the ego is stopped or moving away, or once
    // the adversary is no faster than an ego that keeps its speed.
    if (c.adversary_ahead) return n.v == 0.0 && v_adv >= 0.0;
    return v_adv >= ve;
  };

  for (int64_t step = 0; step <= c.max_steps; ++step) {
    for (const Node& n : frontier) {
      if (resolved(n)) {
        result.verdict = Verdict::kAvoidable;
        return result;
      }
    }
    if (step == c.max_steps) break;
    const Mover adv{v_adv, c.adv_brake};
    double v_adv_next = 0.0;
    const double dx_adv = MoverStep(adv, c.dt, &v_adv_next);

    std::vector<Node> next;
    for (const Node& n : frontier) {
      for (int k = 0; k < c.levels; ++k) {
        const double brake = c.ego_brake * k / (c.levels - 1);
        ++result.nodes;
        const double ve = dir * n.v;
        const double gap_now = x_adv - n.x;
        if (MinGapOverStep(gap_now, ve, brake, v_adv, c.adv_brake, c.dt) <
            -kTouchTolerance) {
          continue;
        }
        const Mover ego{ve, brake};
        double v_next = 0.0;
        const double dx = MoverStep(ego, c.dt, &v_next);
        next.push_back({n.x + dx, std::abs(v_next)});
      }
    }
    if (next.empty()) {
      result.verdict = Verdict::kUnavoidable;
      return result;
    }
    // Keep the Pareto front: in mirrored coordinates the ego prefers lower
    // position and, ahead, lower speed; behind, higher speed.
    std::sort(next.begin(), next.end(), [&](const Node& a, const Node& b) {
      if (a.x != b.x) return a.x < b.x;
      return c.adversary_ahead ? a.v < b.v : a.v > b.v;
    });
    std::vector<Node> front;
    for (const Node& n : next) {
      if (front.empty()) {
        front.push_back(n);
        continue;
      }
      const double best_v = front.back().v;
      if (c.adversary_ahead ? n.v < best_v : n.v > best_v) front.push_back(n);
    }
    frontier = std::move(front);
    x_adv += dx_adv;
    v_adv = v_adv_next;
  }
  result.verdict = Verdict::kUnavoidable;
  result.diagnostic = "horizon overflow after " + std::to_string(c.max_steps) +
                      " steps";
  return result;
}

namespace {

struct EscapeSearch {
  const ControlBounds& bounds;
  const EscapeOptions& opt;
  std::vector<double> lon_levels;
  std::vector<double> lat_levels;
  int total_steps = 0;
  Vec2 origin;
  Vec2 normal;  // left normal of the initial ego heading
  double reach_radius = 0.0;
  double max_accel = 0.0;
  int64_t nodes = 0;
  bool exhausted = false;

  bool InCorridor(const KinematicState& s) const {
    if (opt.lateral_room < 0.0) return true;
    return std::abs((s.Position() - origin).Dot(normal)) <= opt.lateral_room;
  }

  // Rolls one constant-control segment forward. Returns false on contact or
  // corridor exit.
  bool Rollout(KinematicState* ego, KinematicState* adv, ControlAction a,
               int steps) const {
    const Vec2 adv_vel = adv->WorldVelocity();
    for (int k = 0; k < steps; ++k) {
      const KinematicState e0 = *ego;
      const KinematicState a0 = *adv;
      const KinematicState e1 = StepVehicle(e0, a, opt.dt, bounds);
      for (int j = 1; j <= opt.substeps; ++j) {
        const double f = static_cast<double>(j) / opt.substeps;
        KinematicState e = e1;
        e.x = e0.x + f * (e1.x - e0.x);
        e.y = e0.y + f * (e1.y - e0.y);
        e.yaw = e0.yaw + f * NormalizeAngle(e1.yaw - e0.yaw);
        KinematicState av = a0;
        av.x = a0.x + f * adv_vel.x * opt.dt;
        av.y = a0.y + f * adv_vel.y * opt.dt;
        if (ObbOverlap(e, av)) return false;
      }
      *ego = e1;
      adv->x = a0.x + adv_vel.x * opt.dt;
      adv->y = a0.y + adv_vel.y * opt.dt;
      if (!InCorridor(*ego)) return false;
    }
    return true;
  }

  bool Separated(const KinematicState& ego, const KinematicState& adv,
                 int step) const {
    const double remaining = (total_steps - step) * opt.dt;
    const double dist = (ego.Position() - adv.Position()).Norm() - reach_radius;
    const double closing = (ego.Speed() + adv.Speed()) * remaining +
                           0.5 * max_accel * remaining * remaining;
    return dist > closing;
  }

  bool Search(const KinematicState& ego, const KinematicState& adv, int step) {
    if (step >= total_steps) return true;
    if (Separated(ego, adv, step)) return true;
    const int seg = std::min(opt.reselect_steps, total_steps - step);
    struct Child {
      KinematicState ego;
      KinematicState adv;
      double score;
    };
    std::vector<Child> children;
    for (double lon : lon_levels) {
      for (double lat : lat_levels) {
        if (++nodes > opt.node_budget) {
          exhausted = true;
          return false;
        }
        KinematicState e = ego;
        KinematicState a = adv;
        if (!Rollout(&e, &a, {lon, lat}, seg)) continue;
        children.push_back({e, a, (e.Position() - a.Position()).Norm()});
      }
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& a, const Child& b) {
                       return a.score > b.score;
                     });
    for (const Child& c : children) {
      if (Search(c.ego, c.adv, step + seg)) return true;
      if (exhausted) return false;
    }
    return false;
  }
};

std::vector<double> Levels(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

}  // namespace

OracleResult EscapeOracle2d(const KinematicState& ego,
                            const KinematicState& adv,
                            const ControlBounds& ego_bounds,
                            const EscapeOptions& options) {
  if (!(options.dt > 0.0) || options.grid < 2 || options.reselect_steps < 1 ||
      options.substeps < 1 || !(options.horizon > 0.0)) {
    throw std::invalid_argument("invalid escape oracle options");
  }
  EscapeSearch s{ego_bounds, options, {}, {}, 0, {}, {}};
  // Brake and acceleration halves are spaced separately so that zero is
  // always on the grid.
  const int half = options.grid / 2;
  if (options.grid % 2 == 1 && half > 0) {
    for (double v : Levels(ego_bounds.lon_min, 0.0, half + 1)) {
      s.lon_levels.push_back(v);
    }
    for (double v : Levels(0.0, ego_bounds.lon_max, half + 1)) {
      if (v > 0.0) s.lon_levels.push_back(v);
    }
  } else {
    s.lon_levels = Levels(ego_bounds.lon_min, ego_bounds.lon_max, options.grid);
  }
  s.lat_levels = Levels(-ego_bounds.lat_max, ego_bounds.lat_max, options.grid);
  s.total_steps =
      static_cast<int>(std::ceil(options.horizon / options.dt - 1e-9));
  s.origin = ego.Position();
  s.normal = Rotate({0.0, 1.0}, ego.yaw);
  s.reach_radius = std::hypot(ego.half_length, ego.half_width) +
                   std::hypot(adv.half_length, adv.half_width);
  s.max_accel = std::hypot(std::max(-ego_bounds.lon_min, ego_bounds.lon_max),
                           ego_bounds.lat_max);

  OracleResult result;
  if (ObbOverlap(ego, adv)) {
    result.verdict = Verdict::kUnavoidable;
    result.diagnostic = "boxes already overlap";
    return result;
  }
  const bool found = s.Search(ego, adv, 0);
  result.nodes = s.nodes;
  if (s.exhausted) {
    result.verdict = Verdict::kUnknown;
    result.diagnostic = "node budget exhausted";
  } else {
    result.verdict = found ? Verdict::kAvoidable : Verdict::kUnavoidable;
  }
  return result;
}

}  // namespace scenegen
