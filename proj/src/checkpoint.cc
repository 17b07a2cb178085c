#include "scenegen/checkpoint.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace scenegen {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};

template <typename T>
void Write(std::string* out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out->append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T Read() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string ReadString(uint64_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool Done() const { return pos_ == bytes_.size(); }

 private:
  void Need(uint64_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error("checkpoint truncated");
    }
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

const Eigen::VectorXd& Checkpoint::Get(const std::string& name,
                                       Eigen::Index size) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw std::runtime_error("checkpoint has no tensor '" + name + "'");
  }
  if (size >= 0 && it->second.size() != size) {
    throw std::runtime_error("checkpoint tensor '" + name +
                             "' has the wrong length");
  }
  return it->second;
}

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  Write<uint32_t>(&out, Checkpoint::kVersion);
  Write<uint64_t>(&out, ckpt.config_hash);
  Write<uint32_t>(&out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, v] : ckpt.tensors) {
    Write<uint32_t>(&out, static_cast<uint32_t>(name.size()));
    out += name;
    Write<uint64_t>(&out, static_cast<uint64_t>(v.size()));
  }
  for (const auto& [name, v] : ckpt.tensors) {
    for (Eigen::Index i = 0; i < v.size(); ++i) Write<double>(&out, v(i));
  }
  Write<uint64_t>(&out, ckpt.metadata.size());
  out += ckpt.metadata;
  return out;
}

Checkpoint DecodeCheckpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.ReadString(4) != std::string(kMagic, 4)) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.Read<uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config_hash = r.Read<uint64_t>();
  const uint32_t count = r.Read<uint32_t>();
  std::vector<std::pair<std::string, uint64_t>> shapes;
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t len = r.Read<uint32_t>();
    std::string name = r.ReadString(len);
    shapes.emplace_back(std::move(name), r.Read<uint64_t>());
  }
  for (const auto& [name, n] : shapes) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (uint64_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = r.Read<double>();
    ckpt.tensors[name] = std::move(v);
  }
  ckpt.metadata = r.ReadString(r.Read<uint64_t>());
  if (!r.Done()) throw std::runtime_error("trailing bytes in checkpoint");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    const std::string bytes = EncodeCheckpoint(ckpt);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename '" + tmp + "'");
  }
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return DecodeCheckpoint(ss.str());
}

void PutAdam(const Adam& adam, const std::string& prefix, Checkpoint* ckpt) {
  ckpt->Put(prefix + ".m", adam.m());
  ckpt->Put(prefix + ".v", adam.v());
  Eigen::VectorXd t(1);
  t(0) = static_cast<double>(adam.steps());
  ckpt->Put(prefix + ".t", t);
}

void GetAdam(const Checkpoint& ckpt, const std::string& prefix, Adam* adam) {
  const Eigen::Index n = adam->m().size();
  adam->SetState(static_cast<int64_t>(ckpt.Get(prefix + ".t", 1)(0)),
                 ckpt.Get(prefix + ".m", n), ckpt.Get(prefix + ".v", n));
}

void PutPolicy(const ScenarioPolicy& policy, const std::string& prefix,
               Checkpoint* ckpt) {
  ckpt->Put(prefix + ".actor", policy.actor().Parameters());
  ckpt->Put(prefix + ".critic", policy.critic().Parameters());
  PutAdam(policy.actor_opt(), prefix + ".actor_opt", ckpt);
  PutAdam(policy.critic_opt(), prefix + ".critic_opt", ckpt);
}

void GetPolicy(const Checkpoint& ckpt, const std::string& prefix,
               ScenarioPolicy* policy) {
  policy->actor().SetParameters(
      ckpt.Get(prefix + ".actor", policy->actor().ParameterCount()));
  policy->critic().SetParameters(
      ckpt.Get(prefix + ".critic", policy->critic().ParameterCount()));
  GetAdam(ckpt, prefix + ".actor_opt", &policy->actor_opt());
  GetAdam(ckpt, prefix + ".critic_opt", &policy->critic_opt());
}

void PutRiskCritic(const RiskCritic& critic, const std::string& prefix,
                   Checkpoint* ckpt) {
  ckpt->Put(prefix + ".online", critic.online().Parameters());
  ckpt->Put(prefix + ".target", critic.target().Parameters());
  PutAdam(critic.optimizer(), prefix + ".opt", ckpt);
}

void GetRiskCritic(const Checkpoint& ckpt, const std::string& prefix,
                   RiskCritic* critic) {
  const int n = critic->online().ParameterCount();
  critic->online().SetParameters(ckpt.Get(prefix + ".online", n));
  critic->target().SetParameters(ckpt.Get(prefix + ".target", n));
  GetAdam(ckpt, prefix + ".opt", &critic->optimizer());
}

}  // namespace scenegen
