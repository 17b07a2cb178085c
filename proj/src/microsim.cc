#include "scenegen/microsim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace scenegen {

namespace {

constexpr double kHeadingSpeed = 0.1;

void RequirePositive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(name + " must be positive");
  }
}

bool Finite(const KinematicState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.yaw) &&
         std::isfinite(s.v_lon) && std::isfinite(s.v_lat);
}

// Largest speed that still allows slowing to each curvature limit ahead.
double CurveSpeedLimit(const Route& route, double s, const EgoParams& p) {
  double limit = std::numeric_limits<double>::infinity();
  for (double ahead = 0.0; ahead <= 30.0; ahead += 1.0) {
    const double k = std::abs(route.CurvatureAt(s + ahead));
    if (k < 1e-6) continue;
    const double v_c = std::sqrt(p.curve_lat_accel / k);
    limit = std::min(limit, std::sqrt(v_c * v_c + 2.0 * p.idm_decel * ahead));
  }
  return limit;
}

double PurePursuitLat(const KinematicState& ego, const Route& route,
                      const EgoParams& p) {
  const RouteProjection proj = route.Project(ego.Position());
  const double v = ego.Speed();
  const double ld = std::max(p.lookahead_min, p.lookahead_gain * v);
  const Vec2 target = route.PointAt(proj.s + ld);
  const Vec2 local = Rotate(target - ego.Position(), -ego.yaw);
  const double dist2 = std::max(local.Dot(local), 1e-6);
  const double curvature = 2.0 * local.y / dist2;
  return v * v * curvature;
}

}  // namespace

void ControlBounds::Validate(const std::string& name) const {
  if (!(lon_min < 0.0 && lon_max > 0.0 && lat_max > 0.0)) {
    throw std::invalid_argument(
        name + " needs lon_min < 0 < lon_max and lat_max > 0");
  }
}

bool ControlBounds::Clamp(ControlAction* a) const {
  const ControlAction before = *a;
  a->lon = std::clamp(a->lon, lon_min, lon_max);
  a->lat = std::clamp(a->lat, -lat_max, lat_max);
  return before.lon != a->lon || before.lat != a->lat;
}

KinematicState StepVehicle(const KinematicState& s, ControlAction a, double dt,
                           const ControlBounds& bounds, int64_t* clamp_count) {
  if (bounds.Clamp(&a) && clamp_count != nullptr) ++*clamp_count;
  KinematicState n = s;
  n.v_lon = std::max(0.0, s.v_lon + a.lon * dt);
  n.v_lat = s.v_lat + a.lat * dt;
  const Vec2 vel = Rotate({n.v_lon, n.v_lat}, s.yaw);
  n.x = s.x + vel.x * dt;
  n.y = s.y + vel.y * dt;
  const double speed = vel.Norm();
  if (speed > kHeadingSpeed) {
    n.yaw = std::atan2(vel.y, vel.x);
    n.v_lon = speed;
    n.v_lat = 0.0;
  }
  return n;
}

std::string ToString(EgoKind kind) {
  switch (kind) {
    case EgoKind::kRouteFollowerBrake:
      return "route_follower_brake";
    case EgoKind::kIdmPursuit:
      return "idm_pursuit";
    case EgoKind::kAggressiveVariant:
      return "aggressive_variant";
  }
  return "idm_pursuit";
}

EgoKind ParseEgoKind(const std::string& name) {
  if (name == "route_follower_brake") return EgoKind::kRouteFollowerBrake;
  if (name == "idm_pursuit") return EgoKind::kIdmPursuit;
  if (name == "aggressive_variant") return EgoKind::kAggressiveVariant;
  throw std::invalid_argument("unknown ego controller '" + name + "'");
}

void EgoParams::Validate() const {
  RequirePositive(target_speed, "ego.target_speed");
  RequirePositive(brake_ttc, "ego.brake_ttc");
  RequirePositive(headway, "ego.headway");
  RequirePositive(idm_accel, "ego.idm_accel");
  RequirePositive(idm_decel, "ego.idm_decel");
  RequirePositive(speed_gain, "ego.speed_gain");
  RequirePositive(curve_lat_accel, "ego.curve_lat_accel");
  RequirePositive(lookahead_min, "ego.lookahead_min");
  RequirePositive(detection_range, "ego.detection_range");
  if (min_gap < 0.0 || lookahead_gain < 0.0 || corridor_margin < 0.0) {
    throw std::invalid_argument("ego gaps and margins must be >= 0");
  }
}

FrontVehicle DetectFront(const KinematicState& ego, const KinematicState& adv,
                         const Route& route, const EgoParams& params) {
  FrontVehicle f;
  const RouteProjection pe = route.Project(ego.Position());
  const RouteProjection pa = route.Project(adv.Position());
  const double ahead = pa.s - pe.s;
  const double corridor = ego.half_width + adv.half_width + params.corridor_margin;
  if (ahead <= 0.0 || ahead > params.detection_range ||
      std::abs(pa.offset) >= corridor) {
    return f;
  }
  f.present = true;
  f.gap = std::max(0.0, ahead - ego.half_length - adv.half_length);
  const Vec2 tangent = Rotate({1.0, 0.0}, pa.heading);
  f.closing_speed = ego.Speed() - adv.WorldVelocity().Dot(tangent);
  return f;
}

ControlAction EgoControl(EgoKind kind, const EgoParams& params,
                         const KinematicState& ego, const KinematicState& adv,
                         const Route& route, const ControlBounds& bounds) {
  const RouteProjection proj = route.Project(ego.Position());
  const double v = ego.Speed();
  const double v_desired =
      std::min(params.target_speed, CurveSpeedLimit(route, proj.s, params));
  const FrontVehicle front = DetectFront(ego, adv, route, params);

  ControlAction a;
  a.lat = PurePursuitLat(ego, route, params);
  if (kind == EgoKind::kRouteFollowerBrake) {
    a.lon = params.speed_gain * (v_desired - v);
    if (front.present && front.closing_speed > 0.0 &&
        front.gap / front.closing_speed < params.brake_ttc) {
      a.lon = bounds.lon_min;
    }
  } else {
    const double headway = kind == EgoKind::kAggressiveVariant
                               ? 0.5 * params.headway
                               : params.headway;
    const double ratio = v / std::max(v_desired, 0.1);
    double accel = params.idm_accel * (1.0 - ratio * ratio * ratio * ratio);
    if (front.present) {
      const double s_star =
          params.min_gap + v * headway +
          v * front.closing_speed /
              (2.0 * std::sqrt(params.idm_accel * params.idm_decel));
      const double gap = std::max(front.gap, 0.1);
      const double r = std::max(s_star, 0.0) / gap;
      accel -= params.idm_accel * r * r;
    }
    a.lon = accel;
  }
  bounds.Clamp(&a);
  return a;
}

const std::vector<std::string>& TemplateIds() {
  static const std::vector<std::string> ids = {"straight_obstacle", "cut_in",
                                               "left_turn", "crossing"};
  return ids;
}

ScenarioTemplate MakeTemplate(const std::string& id) {
  constexpr double kPi = std::numbers::pi;
  ScenarioTemplate t;
  t.id = id;
  if (id == "straight_obstacle") {
    t.ego_route = Route({{0.0, 0.0}, {150.0, 0.0}});
    t.adv_nominal = {45.0, 0.0, 0.0, 1.0, 0.0};
    t.adv_shift_min = -5.0;
    t.adv_shift_max = 10.0;
    t.adv_speed_min = 0.0;
    t.adv_speed_max = 2.0;
  } else if (id == "cut_in") {
    t.ego_route = Route({{0.0, 0.0}, {150.0, 0.0}});
    t.adv_nominal = {20.0, 3.5, 0.0, 6.0, 0.0};
    t.adv_shift_min = -5.0;
    t.adv_shift_max = 5.0;
    t.adv_speed_min = 5.0;
    t.adv_speed_max = 7.0;
  } else if (id == "left_turn") {
    // Northbound ego turns left onto the westbound lane; the adversary drives
    // south through the intersection on the opposite side.
    constexpr double kRadius = 12.0;
    constexpr double kLane = 1.75;
    std::vector<Vec2> pts = {{kLane, -45.0}};
    const Vec2 center{kLane - kRadius, kLane - kRadius};
    for (const Vec2& p : ArcPolyline(center, kRadius, 0.0, kPi / 2.0, 1.0)) {
      pts.push_back(p);
    }
    pts.push_back({-50.0, kLane});
    t.ego_route = Route(std::move(pts));
    t.adv_nominal = {-kLane, 60.0, -kPi / 2.0, 7.0, 0.0};
    t.adv_shift_min = -10.0;
    t.adv_shift_max = 10.0;
    t.adv_speed_min = 6.0;
    t.adv_speed_max = 8.0;
  } else if (id == "crossing") {
    t.ego_route = Route({{0.0, 0.0}, {120.0, 0.0}});
    t.adv_nominal = {45.0, -35.0, kPi / 2.0, 7.0, 0.0};
    t.adv_shift_min = -8.0;
    t.adv_shift_max = 8.0;
    t.adv_speed_min = 6.0;
    t.adv_speed_max = 8.0;
  } else {
    throw std::invalid_argument("unknown scenario template '" + id + "'");
  }
  return t;
}

void WorldConfig::Validate() const {
  RequirePositive(dt, "world.dt");
  if (max_episode_steps < 2) {
    throw std::invalid_argument("world.max_episode_steps must be >= 2");
  }
  RequirePositive(completion_radius, "world.completion_radius");
  ego_bounds.Validate("world.ego_bounds");
  adv_bounds.Validate("world.adv_bounds");
  ego_params.Validate();
  MakeTemplate(scenario);
}

void SpawnVehicles(const ScenarioTemplate& tmpl, uint64_t seed,
                   KinematicState* ego, KinematicState* adv) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto lerp = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const Route& route = tmpl.ego_route;
  const Vec2 start = route.PointAt(0.0);
  *ego = KinematicState{};
  ego->x = start.x;
  ego->y = start.y;
  ego->yaw = route.HeadingAt(0.0);
  ego->v_lon = lerp(tmpl.ego_speed_min, tmpl.ego_speed_max);

  *adv = tmpl.adv_nominal;
  const double shift = lerp(tmpl.adv_shift_min, tmpl.adv_shift_max);
  adv->x += shift * std::cos(adv->yaw);
  adv->y += shift * std::sin(adv->yaw);
  adv->v_lon = lerp(tmpl.adv_speed_min, tmpl.adv_speed_max);
  adv->v_lat = 0.0;
}

void ScoreFrame(const FeasibilityParams& feasibility, const RiskCritic* critic,
                Frame* frame, FeasibilityReport* report) {
  const FeasibilityReport r = Sigma(frame->ego, frame->adv, feasibility);
  frame->sigma = r.sigma;
  if (critic != nullptr) {
    const RiskFeatures x =
        ExtractRiskFeatures(frame->ego, frame->adv, critic->params());
    frame->phi = critic->Phi(x, CenterDistance(frame->ego, frame->adv));
  } else {
    frame->phi = 0.0;
  }
  if (report != nullptr) *report = r;
}

EpisodeLog RunEpisode(const WorldConfig& world,
                      const FeasibilityParams& feasibility,
                      const RiskCritic* critic, const EpisodeSetup& setup,
                      const AdversaryFn& adversary) {
  const ScenarioTemplate tmpl = MakeTemplate(world.scenario);
  const Route& route = tmpl.ego_route;
  const Vec2 goal = route.points().back();

  EpisodeLog log;
  log.summary.seed = setup.seed;
  log.summary.level = setup.level;
  log.summary.episode = setup.episode;

  KinematicState ego;
  KinematicState adv;
  SpawnVehicles(tmpl, setup.seed, &ego, &adv);

  for (int t = 0; t < world.max_episode_steps; ++t) {
    Frame frame;
    frame.step = t;
    frame.ego = ego;
    frame.adv = adv;
    frame.epsilon = setup.epsilon;
    if (!Finite(ego) || !Finite(adv)) {
      log.summary.fault = true;
      frame.sigma = 0.0;
      log.frames.push_back(frame);
      break;
    }
    FeasibilityReport report;
    ScoreFrame(feasibility, critic, &frame, &report);
    frame.collision = ObbOverlap(ego, adv);
    if (frame.collision) log.summary.collided = true;
    if ((ego.Position() - goal).Norm() <= world.completion_radius) {
      log.summary.completed = true;
    }
    const bool last = t + 1 == world.max_episode_steps;
    if (frame.collision || log.summary.completed || last) {
      log.frames.push_back(frame);
      break;
    }

    FrameContext ctx;
    ctx.step = t;
    ctx.ego = &ego;
    ctx.adv = &adv;
    ctx.route = &route;
    ctx.feasibility = &report;
    ctx.phi = frame.phi;
    ctx.epsilon = setup.epsilon;
    ControlAction adv_action = adversary(ctx);
    if (!std::isfinite(adv_action.lon) || !std::isfinite(adv_action.lat)) {
      log.summary.fault = true;
      log.frames.push_back(frame);
      break;
    }
    if (world.adv_bounds.Clamp(&adv_action)) ++log.summary.adv_clamps;
    frame.adv_action = adv_action;
    log.frames.push_back(frame);

    const ControlAction ego_action = EgoControl(
        world.ego, world.ego_params, ego, adv, route, world.ego_bounds);
    ego = StepVehicle(ego, ego_action, world.dt, world.ego_bounds,
                      &log.summary.ego_clamps);
    adv = StepVehicle(adv, adv_action, world.dt, world.adv_bounds);
  }
  log.summary.steps = static_cast<int>(log.frames.size());
  return log;
}

EpisodeLog ReplayEpisode(const WorldConfig& world,
                         const FeasibilityParams& feasibility,
                         const RiskCritic* critic, const EpisodeLog& source,
                         EgoKind ego) {
  WorldConfig w = world;
  w.ego = ego;
  EpisodeSetup setup;
  setup.seed = source.summary.seed;
  setup.level = source.summary.level;
  setup.episode = source.summary.episode;
  setup.epsilon = source.frames.empty() ? 0.0 : source.frames.front().epsilon;
  const std::vector<Frame>& frames = source.frames;
  // Once the logged actions run out the adversary coasts.
  return RunEpisode(w, feasibility, critic, setup,
                    [&frames](const FrameContext& ctx) {
                      const size_t t = static_cast<size_t>(ctx.step);
                      return t < frames.size() ? frames[t].adv_action
                                               : ControlAction{};
                    });
}

}  // namespace scenegen
