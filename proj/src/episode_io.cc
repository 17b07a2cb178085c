#include "scenegen/episode_io.h"

#include <fstream>
#include <istream>
#include <stdexcept>

#include "json.hpp"

namespace scenegen {

namespace {

using nlohmann::json;

json StateArray(const KinematicState& s) {
  return json::array({s.x, s.y, s.yaw, s.v_lon, s.v_lat});
}

}  // namespace

const std::vector<std::string>& FrameFields() {
  static const std::vector<std::string> fields = {
      "step",      "ego_x",   "ego_y",   "ego_yaw",   "ego_v_lon",
      "ego_v_lat", "adv_x",   "adv_y",   "adv_yaw",   "adv_v_lon",
      "adv_v_lat", "adv_lon", "adv_lat", "sigma",     "phi",
      "epsilon",   "collision"};
  return fields;
}

std::string EpisodeHeaderLine() {
  json h = {{"format", "scenegen-episodes"},
            {"version", kEpisodeFormatVersion},
            {"frame_fields", FrameFields()}};
  return h.dump();
}

std::string EncodeEpisode(const EpisodeLog& log) {
  std::string out;
  const EpisodeSummary& s = log.summary;
  const KinematicState ego =
      log.frames.empty() ? KinematicState{} : log.frames.front().ego;
  const KinematicState adv =
      log.frames.empty() ? KinematicState{} : log.frames.front().adv;
  json begin = {{"type", "episode"},
                {"episode", s.episode},
                {"seed", s.seed},
                {"level", s.level},
                {"ego_extent", {ego.half_length, ego.half_width}},
                {"adv_extent", {adv.half_length, adv.half_width}}};
  out += begin.dump();
  out += '\n';
  for (const Frame& f : log.frames) {
    json row = json::array({f.step});
    for (const auto& v : StateArray(f.ego)) row.push_back(v);
    for (const auto& v : StateArray(f.adv)) row.push_back(v);
    row.push_back(f.adv_action.lon);
    row.push_back(f.adv_action.lat);
    row.push_back(f.sigma);
    row.push_back(f.phi);
    row.push_back(f.epsilon);
    row.push_back(f.collision ? 1 : 0);
    out += row.dump();
    out += '\n';
  }
  json end = {{"type", "summary"},
              {"collided", s.collided},
              {"completed", s.completed},
              {"fault", s.fault},
              {"steps", s.steps},
              {"seed", s.seed},
              {"adv_clamps", s.adv_clamps},
              {"ego_clamps", s.ego_clamps}};
  out += end.dump();
  out += '\n';
  return out;
}

void WriteEpisodes(const std::vector<EpisodeLog>& logs,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << EpisodeHeaderLine() << '\n';
  for (const EpisodeLog& log : logs) out << EncodeEpisode(log);
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

std::vector<EpisodeLog> ParseEpisodes(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty episode file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error&) {
    throw std::runtime_error("episode file: bad header line");
  }
  if (!header.is_object() || header.value("format", "") != "scenegen-episodes") {
    throw std::runtime_error("episode file: unrecognized header");
  }
  if (header.value("version", -1) != kEpisodeFormatVersion) {
    throw std::runtime_error("episode file: unsupported version");
  }
  const size_t n_fields = FrameFields().size();

  std::vector<EpisodeLog> logs;
  EpisodeLog* cur = nullptr;
  double ego_extent[2] = {2.4, 1.0};
  double adv_extent[2] = {2.4, 1.0};
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw std::runtime_error("episode file: malformed line " +
                               std::to_string(line_no));
    }
    if (j.is_array()) {
      if (cur == nullptr || j.size() != n_fields) {
        throw std::runtime_error("episode file: bad frame at line " +
                                 std::to_string(line_no));
      }
      Frame f;
      f.step = j[0].get<int>();
      KinematicState* states[2] = {&f.ego, &f.adv};
      for (int k = 0; k < 2; ++k) {
        KinematicState& s = *states[k];
        const size_t o = 1 + 5 * static_cast<size_t>(k);
        s.x = j[o].get<double>();
        s.y = j[o + 1].get<double>();
        s.yaw = j[o + 2].get<double>();
        s.v_lon = j[o + 3].get<double>();
        s.v_lat = j[o + 4].get<double>();
      }
      f.ego.half_length = ego_extent[0];
      f.ego.half_width = ego_extent[1];
      f.adv.half_length = adv_extent[0];
      f.adv.half_width = adv_extent[1];
      f.adv_action.lon = j[11].get<double>();
      f.adv_action.lat = j[12].get<double>();
      f.sigma = j[13].get<double>();
      f.phi = j[14].get<double>();
      f.epsilon = j[15].get<double>();
      f.collision = j[16].get<int>() != 0;
      cur->frames.push_back(f);
      continue;
    }
    const std::string type = j.value("type", "");
    if (type == "episode") {
      logs.emplace_back();
      cur = &logs.back();
      cur->summary.episode = j.at("episode").get<int64_t>();
      cur->summary.seed = j.at("seed").get<uint64_t>();
      cur->summary.level = j.at("level").get<int>();
      ego_extent[0] = j.at("ego_extent")[0].get<double>();
      ego_extent[1] = j.at("ego_extent")[1].get<double>();
      adv_extent[0] = j.at("adv_extent")[0].get<double>();
      adv_extent[1] = j.at("adv_extent")[1].get<double>();
    } else if (type == "summary") {
      if (cur == nullptr) {
        throw std::runtime_error("episode file: summary without episode");
      }
      cur->summary.collided = j.at("collided").get<bool>();
      cur->summary.completed = j.at("completed").get<bool>();
      cur->summary.fault = j.at("fault").get<bool>();
      cur->summary.steps = j.at("steps").get<int>();
      cur->summary.adv_clamps = j.at("adv_clamps").get<int64_t>();
      cur->summary.ego_clamps = j.at("ego_clamps").get<int64_t>();
      cur = nullptr;
    } else {
      throw std::runtime_error("episode file: unknown record at line " +
                               std::to_string(line_no));
    }
  }
  if (cur != nullptr) throw std::runtime_error("episode file: truncated episode");
  return logs;
}

std::vector<EpisodeLog> ReadEpisodes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return ParseEpisodes(in);
}

}  // namespace scenegen
