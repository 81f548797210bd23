#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hainav/harness/config.hpp"
#include "hainav/sim/render.hpp"

namespace hainav::harness {

struct EpisodeStep {
  std::vector<uint8_t> obs;   // quantized 3x56x56
  std::vector<uint8_t> mask;  // 7x7 visibility flags
  uint8_t action = 0;
  uint8_t collision = 0;
  int16_t local_x = 0, local_y = 0, local_h = 0;  // integrated since episode start
  int16_t room_id = -1;
  int16_t gx = 0, gy = 0, gh = 0;
};

struct Episode {
  uint64_t maze_seed = 0;
  uint8_t room_width = 4;
  int16_t start_x = 0, start_y = 0, start_h = 0;
  std::vector<EpisodeStep> steps;
};

// Fixed-layout binary dataset: header (magic, version, config hash, kind,
// count), then length-prefixed episodes of packed observations, action and
// collision bytes, and pose triplets.
void write_dataset(const std::string& path, const std::string& kind, uint64_t config_hash,
                   const std::vector<Episode>& episodes);

struct Dataset {
  std::string kind;
  uint64_t config_hash = 0;
  std::vector<Episode> episodes;
};
Dataset read_dataset(const std::string& path);

inline std::vector<double> dequantize(const std::vector<uint8_t>& obs) {
  std::vector<double> out(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) out[i] = obs[i] / 255.0;
  return out;
}

// Rolls the random data-collection policies and writes one allocentric and one
// egocentric file per room width under out_dir. Deterministic in master_seed.
struct DatasetPaths {
  std::vector<std::string> allo_files;
  std::vector<std::string> ego_files;
};
DatasetPaths collect_dataset(const Profile& profile, uint64_t master_seed,
                             const std::string& out_dir);

}  // namespace hainav::harness
