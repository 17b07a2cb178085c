#ifndef SCENEGEN_CHECKPOINT_H_
#define SCENEGEN_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "scenegen/nn.h"
#include "scenegen/policy.h"
#include "scenegen/risk.h"

namespace scenegen {

// Named flat float64 arrays plus free-form metadata. On disk: magic, format
// version, config hash, a shape table (name, length), the raw data and the
// metadata string, all little-endian.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  uint64_t config_hash = 0;
  std::map<std::string, Eigen::VectorXd> tensors;
  std::string metadata;

  void Put(const std::string& name, Eigen::VectorXd v) {
    tensors[name] = std::move(v);
  }
  // Throws std::runtime_error if missing or of the wrong length.
  const Eigen::VectorXd& Get(const std::string& name, Eigen::Index size) const;
  bool Has(const std::string& name) const { return tensors.count(name) > 0; }
};

std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(const std::string& bytes);

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

void PutAdam(const Adam& adam, const std::string& prefix, Checkpoint* ckpt);
void GetAdam(const Checkpoint& ckpt, const std::string& prefix, Adam* adam);

void PutPolicy(const ScenarioPolicy& policy, const std::string& prefix,
               Checkpoint* ckpt);
void GetPolicy(const Checkpoint& ckpt, const std::string& prefix,
               ScenarioPolicy* policy);

void PutRiskCritic(const RiskCritic& critic, const std::string& prefix,
                   Checkpoint* ckpt);
void GetRiskCritic(const Checkpoint& ckpt, const std::string& prefix,
                   RiskCritic* critic);

}  // namespace scenegen

#endif  // SCENEGEN_CHECKPOINT_H_
