#ifndef SCENEGEN_MICROSIM_H_
#define SCENEGEN_MICROSIM_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scenegen/feasibility.h"
#include "scenegen/geometry.h"
#include "scenegen/risk.h"
#include "scenegen/route.h"

namespace scenegen {

struct ControlAction {
  double lon = 0.0;
  double lat = 0.0;
};

// Longitudinal acceleration in [lon_min, lon_max], lateral in
// [-lat_max, lat_max].
struct ControlBounds {
  double lon_min = -3.0;
  double lon_max = 2.0;
  double lat_max = 2.0;

  void Validate(const std::string& name) const;
  // Returns true if the action had to be clamped.
  bool Clamp(ControlAction* a) const;
};

// Point-mass update in the body frame. Out-of-bound accelerations are clamped
// and counted in *clamp_count when it is non-null.
KinematicState StepVehicle(const KinematicState& s, ControlAction a, double dt,
                           const ControlBounds& bounds,
                           int64_t* clamp_count = nullptr);

enum class EgoKind { kRouteFollowerBrake, kIdmPursuit, kAggressiveVariant };

std::string ToString(EgoKind kind);
EgoKind ParseEgoKind(const std::string& name);

struct EgoParams {
  double target_speed = 7.0;
  double brake_ttc = 1.5;  // route_follower_brake emergency threshold
  double headway = 1.5;    // IDM time headway; halved for the aggressive ego
  double min_gap = 2.0;
  double idm_accel = 2.0;
  double idm_decel = 2.0;
  double speed_gain = 1.0;    // proportional speed tracking
  double curve_lat_accel = 1.8;
  double lookahead_min = 4.0;
  double lookahead_gain = 0.8;
  double corridor_margin = 0.5;
  double detection_range = 40.0;

  void Validate() const;
};

// Nearest adversary ahead inside the ego's route corridor.
struct FrontVehicle {
  bool present = false;
  double gap = 0.0;            // bumper to bumper along the route, m
  double closing_speed = 0.0;  // positive when the gap shrinks
};

FrontVehicle DetectFront(const KinematicState& ego, const KinematicState& adv,
                         const Route& route, const EgoParams& params);

ControlAction EgoControl(EgoKind kind, const EgoParams& params,
                         const KinematicState& ego, const KinematicState& adv,
                         const Route& route, const ControlBounds& bounds);

struct ScenarioTemplate {
  std::string id;
  Route ego_route;
  double ego_speed_min = 6.0;
  double ego_speed_max = 7.0;
  KinematicState adv_nominal;
  // Spawn jitter: shift along the adversary heading and its initial speed.
  double adv_shift_min = 0.0;
  double adv_shift_max = 0.0;
  double adv_speed_min = 0.0;
  double adv_speed_max = 0.0;
};

const std::vector<std::string>& TemplateIds();
// Throws std::invalid_argument for unknown ids.
ScenarioTemplate MakeTemplate(const std::string& id);

struct WorldConfig {
  double dt = 0.1;
  int max_episode_steps = 150;
  std::string scenario = "left_turn";
  EgoKind ego = EgoKind::kIdmPursuit;
  EgoParams ego_params;
  ControlBounds ego_bounds{-3.0, 2.0, 2.0};
  ControlBounds adv_bounds{-4.0, 3.0, 1.5};
  double completion_radius = 2.0;

  void Validate() const;
};

struct Frame {
  int step = 0;
  KinematicState ego;
  KinematicState adv;
  ControlAction adv_action;
  double sigma = 1.0;
  double phi = 0.0;
  double epsilon = 0.0;
  bool collision = false;
};

struct EpisodeSummary {
  bool collided = false;
  bool completed = false;
  bool fault = false;
  int steps = 0;
  uint64_t seed = 0;
  int level = 0;
  int64_t episode = 0;
  int64_t adv_clamps = 0;
  int64_t ego_clamps = 0;
};

struct EpisodeLog {
  std::vector<Frame> frames;
  EpisodeSummary summary;

  // True if the final frame ends the episode for reasons other than the
  // step cap.
  bool Terminal() const {
    return summary.collided || summary.completed || summary.fault;
  }
};

// Everything the adversary sees at frame t.
struct FrameContext {
  int step = 0;
  const KinematicState* ego = nullptr;
  const KinematicState* adv = nullptr;
  const Route* route = nullptr;
  const FeasibilityReport* feasibility = nullptr;
  double phi = 0.0;
  double epsilon = 0.0;
};

using AdversaryFn = std::function<ControlAction(const FrameContext&)>;

struct EpisodeSetup {
  uint64_t seed = 0;
  double epsilon = 0.0;
  int level = 0;
  int64_t episode = 0;
};

// Spawns the template with per-seed jitter.
void SpawnVehicles(const ScenarioTemplate& tmpl, uint64_t seed,
                   KinematicState* ego, KinematicState* adv);

// Fixed-step rollout. critic may be null, in which case phi is 0.
EpisodeLog RunEpisode(const WorldConfig& world,
                      const FeasibilityParams& feasibility,
                      const RiskCritic* critic, const EpisodeSetup& setup,
                      const AdversaryFn& adversary);

// Open-loop replay of logged adversary accelerations against `ego`.
EpisodeLog ReplayEpisode(const WorldConfig& world,
                         const FeasibilityParams& feasibility,
                         const RiskCritic* critic, const EpisodeLog& source,
                         EgoKind ego);

// Recomputes sigma and phi of a frame from its logged states.
void ScoreFrame(const FeasibilityParams& feasibility, const RiskCritic* critic,
                Frame* frame, FeasibilityReport* report = nullptr);

}  // namespace scenegen

#endif  // SCENEGEN_MICROSIM_H_
