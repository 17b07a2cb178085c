#ifndef SCENEGEN_CONFIG_H_
#define SCENEGEN_CONFIG_H_

#include <cstdint>
#include <string>

#include "scenegen/feasibility.h"
#include "scenegen/microsim.h"
#include "scenegen/policy.h"
#include "scenegen/risk.h"
#include "scenegen/schedule.h"

namespace scenegen {

// full: shielded dual-objective update. phi_only: shielding disabled.
// sigma_only: the risk reward is replaced by a TTC proxy. random: uniform
// adversary actions, no policy learning.
enum class Variant { kFull, kPhiOnly, kSigmaOnly, kRandom };

std::string ToString(Variant v);
Variant ParseVariant(const std::string& name);

struct RunParams {
  uint64_t seed = 1;
  int64_t episodes = 3000;
  Variant variant = Variant::kFull;
  int workers = 1;
  // The TTC proxy reward is exp(-ttc / ttc_proxy_scale).
  double ttc_proxy_scale = 2.0;
  double exclude_tail_s = 0.8;
  bool write_logs = true;

  void Validate() const;
};

struct Config {
  RunParams run;
  WorldConfig world;
  FeasibilityParams feasibility;
  FeasibilityMode feasibility_mode = FeasibilityMode::kPhysicsLimit;
  RiskParams risk;
  PolicyParams policy;
  ScheduleParams schedule;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
};

// Parses a JSON document. Missing keys keep their defaults; unknown keys and
// type mismatches throw std::invalid_argument with the field path.
Config ParseConfig(const std::string& text);
Config LoadConfig(const std::string& path);

// Pretty-printed JSON with every field materialized.
std::string SerializeConfig(const Config& config);

// FNV-1a over the compact serialization.
uint64_t ConfigHash(const Config& config);
uint64_t Fnv1a(const std::string& bytes);

}  // namespace scenegen

#endif  // SCENEGEN_CONFIG_H_
