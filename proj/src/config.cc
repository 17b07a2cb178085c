#include "scenegen/config.h"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scenegen {

namespace {

using nlohmann::json;

// Reads known keys out of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw std::invalid_argument(path_ + ": expected an object");
    }
  }

  template <typename T>
  void Get(const std::string& key, T* out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
          throw std::invalid_argument("expected an integer");
        }
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() &&
              v.get<int64_t>() < 0) {
            throw std::invalid_argument("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      *out = v.get<T>();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path_ + "." + key + ": " + e.what());
    }
  }

  Section Child(const std::string& key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    if (!node_.contains(key)) return Section(kEmpty, path_ + "." + key);
    return Section(node_.at(key), path_ + "." + key);
  }

  void RejectUnknown() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw std::invalid_argument(path_ + "." + it.key() + ": unknown key");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum>
void GetEnum(Section* s, const std::string& key, Enum* out,
             Enum (*parse)(const std::string&), std::string (*name)(Enum)) {
  std::string text = name(*out);
  s->Get(key, &text);
  try {
    *out = parse(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(s->path() + "." + key + ": " + e.what());
  }
}

void ReadBounds(Section s, ControlBounds* b) {
  s.Get("lon_min", &b->lon_min);
  s.Get("lon_max", &b->lon_max);
  s.Get("lat_max", &b->lat_max);
  s.RejectUnknown();
}

json BoundsJson(const ControlBounds& b) {
  return {{"lon_min", b.lon_min}, {"lon_max", b.lon_max}, {"lat_max", b.lat_max}};
}

json ToJson(const Config& c) {
  json j;
  j["run"] = {{"seed", c.run.seed},
              {"episodes", c.run.episodes},
              {"variant", ToString(c.run.variant)},
              {"workers", c.run.workers},
              {"ttc_proxy_scale", c.run.ttc_proxy_scale},
              {"exclude_tail_s", c.run.exclude_tail_s},
              {"write_logs", c.run.write_logs}};
  const EgoParams& e = c.world.ego_params;
  j["world"] = {{"dt", c.world.dt},
                {"max_episode_steps", c.world.max_episode_steps},
                {"scenario", c.world.scenario},
                {"ego", ToString(c.world.ego)},
                {"completion_radius", c.world.completion_radius},
                {"ego_bounds", BoundsJson(c.world.ego_bounds)},
                {"adv_bounds", BoundsJson(c.world.adv_bounds)},
                {"ego_params",
                 {{"target_speed", e.target_speed},
                  {"brake_ttc", e.brake_ttc},
                  {"headway", e.headway},
                  {"min_gap", e.min_gap},
                  {"idm_accel", e.idm_accel},
                  {"idm_decel", e.idm_decel},
                  {"speed_gain", e.speed_gain},
                  {"curve_lat_accel", e.curve_lat_accel},
                  {"lookahead_min", e.lookahead_min},
                  {"lookahead_gain", e.lookahead_gain},
                  {"corridor_margin", e.corridor_margin},
                  {"detection_range", e.detection_range}}}};
  const FeasibilityParams& f = c.feasibility;
  j["feasibility"] = {{"mode", ToString(c.feasibility_mode)},
                      {"dt", f.dt},
                      {"ego_lon_brake", f.ego_lon_brake},
                      {"npc_lon_brake", f.npc_lon_brake},
                      {"ego_lat_brake", f.ego_lat_brake},
                      {"npc_lat_brake", f.npc_lat_brake},
                      {"p_norm", f.p_norm},
                      {"ttc_floor", f.ttc_floor},
                      {"far_cap", f.far_cap},
                      {"min_lat_safe", f.min_lat_safe},
                      {"same_dir_yaw_threshold", f.same_dir_yaw_threshold},
                      {"reaction_time", f.reaction_time},
                      {"lon_accel_max", f.lon_accel_max},
                      {"lat_accel_max", f.lat_accel_max},
                      {"lon_min_brake", f.lon_min_brake},
                      {"lat_min_brake", f.lat_min_brake}};
  const RiskParams& r = c.risk;
  j["risk"] = {{"hidden", r.hidden},
               {"lr", r.lr},
               {"gamma", r.gamma},
               {"w_plus", r.w_plus},
               {"high_risk_threshold", r.high_risk_threshold},
               {"kappa", r.kappa},
               {"tau", r.tau},
               {"distance_floor", r.distance_floor},
               {"far_cap", r.far_cap},
               {"weight_mode", ToString(r.weight_mode)},
               {"batch_size", r.batch_size},
               {"replay_capacity", r.replay_capacity},
               {"updates_per_episode", r.updates_per_episode},
               {"warmup_episodes", r.warmup_episodes}};
  const PolicyParams& p = c.policy;
  j["policy"] = {{"hidden", p.hidden},
                 {"gamma", p.gamma},
                 {"lambda", p.lambda},
                 {"clip", p.clip},
                 {"batch_size", p.batch_size},
                 {"epochs", p.epochs},
                 {"minibatch", p.minibatch},
                 {"entropy_coef", p.entropy_coef},
                 {"lr", p.lr},
                 {"grad_clip", p.grad_clip},
                 {"log_std_min", p.log_std_min},
                 {"log_std_max", p.log_std_max},
                 {"init_std", p.init_std},
                 {"value_scale", p.value_scale},
                 {"normalize_advantages", p.normalize_advantages}};
  const ScheduleParams& s = c.schedule;
  j["schedule"] = {{"levels", s.levels},
                   {"eps_max", s.eps_max},
                   {"u_min", s.u_min},
                   {"u_max", s.u_max},
                   {"switch_every", s.switch_every}};
  return j;
}

}  // namespace

std::string ToString(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kPhiOnly:
      return "phi_only";
    case Variant::kSigmaOnly:
      return "sigma_only";
    case Variant::kRandom:
      return "random";
  }
  return "full";
}

Variant ParseVariant(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "phi_only") return Variant::kPhiOnly;
  if (name == "sigma_only") return Variant::kSigmaOnly;
  if (name == "random") return Variant::kRandom;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

void RunParams::Validate() const {
  if (episodes <= 0) throw std::invalid_argument("run.episodes must be positive");
  if (workers <= 0) throw std::invalid_argument("run.workers must be positive");
  if (!(ttc_proxy_scale > 0.0)) {
    throw std::invalid_argument("run.ttc_proxy_scale must be positive");
  }
  if (exclude_tail_s < 0.0) {
    throw std::invalid_argument("run.exclude_tail_s must be >= 0");
  }
}

void Config::Validate() const {
  run.Validate();
  world.Validate();
  feasibility.Validate();
  risk.Validate();
  policy.Validate();
  schedule.Validate();
  if (std::abs(world.dt - feasibility.dt) > 1e-12) {
    throw std::invalid_argument("feasibility.dt must equal world.dt");
  }
  if (world.ego_bounds.lon_min < -feasibility.ego_lon_brake - 1e-12 ||
      world.adv_bounds.lon_min < -feasibility.npc_lon_brake - 1e-12 ||
      world.ego_bounds.lat_max > feasibility.ego_lat_brake + 1e-12 ||
      world.adv_bounds.lat_max > feasibility.npc_lat_brake + 1e-12) {
    throw std::invalid_argument(
        "world control bounds exceed the feasibility brake bounds");
  }
}

Config ParseConfig(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  Config c;
  Section top(root, "config");

  Section run = top.Child("run");
  run.Get("seed", &c.run.seed);
  run.Get("episodes", &c.run.episodes);
  GetEnum(&run, "variant", &c.run.variant, &ParseVariant, &ToString);
  run.Get("workers", &c.run.workers);
  run.Get("ttc_proxy_scale", &c.run.ttc_proxy_scale);
  run.Get("exclude_tail_s", &c.run.exclude_tail_s);
  run.Get("write_logs", &c.run.write_logs);
  run.RejectUnknown();

  Section world = top.Child("world");
  world.Get("dt", &c.world.dt);
  world.Get("max_episode_steps", &c.world.max_episode_steps);
  world.Get("scenario", &c.world.scenario);
  GetEnum(&world, "ego", &c.world.ego, &ParseEgoKind, &ToString);
  world.Get("completion_radius", &c.world.completion_radius);
  ReadBounds(world.Child("ego_bounds"), &c.world.ego_bounds);
  ReadBounds(world.Child("adv_bounds"), &c.world.adv_bounds);
  {
    Section e = world.Child("ego_params");
    EgoParams& p = c.world.ego_params;
    e.Get("target_speed", &p.target_speed);
    e.Get("brake_ttc", &p.brake_ttc);
    e.Get("headway", &p.headway);
    e.Get("min_gap", &p.min_gap);
    e.Get("idm_accel", &p.idm_accel);
    e.Get("idm_decel", &p.idm_decel);
    e.Get("speed_gain", &p.speed_gain);
    e.Get("curve_lat_accel", &p.curve_lat_accel);
    e.Get("lookahead_min", &p.lookahead_min);
    e.Get("lookahead_gain", &p.lookahead_gain);
    e.Get("corridor_margin", &p.corridor_margin);
    e.Get("detection_range", &p.detection_range);
    e.RejectUnknown();
  }
  world.RejectUnknown();

  Section feas = top.Child("feasibility");
  GetEnum(&feas, "mode", &c.feasibility_mode, &ParseFeasibilityMode, &ToString);
  FeasibilityParams& f = c.feasibility;
  feas.Get("dt", &f.dt);
  feas.Get("ego_lon_brake", &f.ego_lon_brake);
  feas.Get("npc_lon_brake", &f.npc_lon_brake);
  feas.Get("ego_lat_brake", &f.ego_lat_brake);
  feas.Get("npc_lat_brake", &f.npc_lat_brake);
  feas.Get("p_norm", &f.p_norm);
  feas.Get("ttc_floor", &f.ttc_floor);
  feas.Get("far_cap", &f.far_cap);
  feas.Get("min_lat_safe", &f.min_lat_safe);
  feas.Get("same_dir_yaw_threshold", &f.same_dir_yaw_threshold);
  feas.Get("reaction_time", &f.reaction_time);
  feas.Get("lon_accel_max", &f.lon_accel_max);
  feas.Get("lat_accel_max", &f.lat_accel_max);
  feas.Get("lon_min_brake", &f.lon_min_brake);
  feas.Get("lat_min_brake", &f.lat_min_brake);
  feas.RejectUnknown();

  Section risk = top.Child("risk");
  RiskParams& r = c.risk;
  risk.Get("hidden", &r.hidden);
  risk.Get("lr", &r.lr);
  risk.Get("gamma", &r.gamma);
  risk.Get("w_plus", &r.w_plus);
  risk.Get("high_risk_threshold", &r.high_risk_threshold);
  risk.Get("kappa", &r.kappa);
  risk.Get("tau", &r.tau);
  risk.Get("distance_floor", &r.distance_floor);
  risk.Get("far_cap", &r.far_cap);
  GetEnum(&risk, "weight_mode", &r.weight_mode, &ParseRiskWeightMode, &ToString);
  risk.Get("batch_size", &r.batch_size);
  risk.Get("replay_capacity", &r.replay_capacity);
  risk.Get("updates_per_episode", &r.updates_per_episode);
  risk.Get("warmup_episodes", &r.warmup_episodes);
  risk.RejectUnknown();

  Section pol = top.Child("policy");
  PolicyParams& p = c.policy;
  pol.Get("hidden", &p.hidden);
  pol.Get("gamma", &p.gamma);
  pol.Get("lambda", &p.lambda);
  pol.Get("clip", &p.clip);
  pol.Get("batch_size", &p.batch_size);
  pol.Get("epochs", &p.epochs);
  pol.Get("minibatch", &p.minibatch);
  pol.Get("entropy_coef", &p.entropy_coef);
  pol.Get("lr", &p.lr);
  pol.Get("grad_clip", &p.grad_clip);
  pol.Get("log_std_min", &p.log_std_min);
  pol.Get("log_std_max", &p.log_std_max);
  pol.Get("init_std", &p.init_std);
  pol.Get("value_scale", &p.value_scale);
  pol.Get("normalize_advantages", &p.normalize_advantages);
  pol.RejectUnknown();

  Section sch = top.Child("schedule");
  ScheduleParams& s = c.schedule;
  sch.Get("levels", &s.levels);
  sch.Get("eps_max", &s.eps_max);
  sch.Get("u_min", &s.u_min);
  sch.Get("u_max", &s.u_max);
  sch.Get("switch_every", &s.switch_every);
  sch.RejectUnknown();

  top.RejectUnknown();
  c.Validate();
  return c;
}

Config LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string SerializeConfig(const Config& config) {
  return ToJson(config).dump(2) + "\n";
}

uint64_t Fnv1a(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t ConfigHash(const Config& config) {
  return Fnv1a(ToJson(config).dump());
}

}  // namespace scenegen
