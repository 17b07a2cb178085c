#ifndef SCENEGEN_EPISODE_IO_H_
#define SCENEGEN_EPISODE_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "scenegen/microsim.h"

namespace scenegen {

// Line-delimited episode logs. The first line of a file is a header object
// naming the format, its version and the frame field order. Each episode is
// an "episode" object line, one JSON array per frame in kFrameFields order,
// and a closing "summary" object line.
inline constexpr int kEpisodeFormatVersion = 1;
const std::vector<std::string>& FrameFields();

std::string EpisodeHeaderLine();
std::string EncodeEpisode(const EpisodeLog& log);

void WriteEpisodes(const std::vector<EpisodeLog>& logs, const std::string& path);
// Throws std::runtime_error on malformed input or a version mismatch.
std::vector<EpisodeLog> ReadEpisodes(const std::string& path);
std::vector<EpisodeLog> ParseEpisodes(std::istream& in);

}  // namespace scenegen

#endif  // SCENEGEN_EPISODE_IO_H_
