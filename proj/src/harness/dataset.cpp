#include "hainav/harness/dataset.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace hainav::harness {

namespace {

constexpr uint64_t kMagic = 0x534456414E494148ULL;  // "HAINAVDS"
constexpr uint32_t kVersion = 1;

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

template <class T>
void put(FILE* f, const T& v) {
  std::fwrite(&v, sizeof v, 1, f);
}
template <class T>
T get(FILE* f) {
  T v{};
  if (std::fread(&v, sizeof v, 1, f) != 1) throw std::runtime_error("dataset: truncated");
  return v;
}
void put_str(FILE* f, const std::string& s) {
  put<uint32_t>(f, static_cast<uint32_t>(s.size()));
  std::fwrite(s.data(), 1, s.size(), f);
}
std::string get_str(FILE* f) {
  const auto n = get<uint32_t>(f);
  std::string s(n, '\0');
  if (n && std::fread(s.data(), 1, n, f) != n) throw std::runtime_error("dataset: truncated");
  return s;
}

constexpr size_t kObsBytes = sim::kImagePixels;
constexpr size_t kMaskBytes = sim::kWindowTiles * sim::kWindowTiles;

}  // namespace

void write_dataset(const std::string& path, const std::string& kind, uint64_t config_hash,
                   const std::vector<Episode>& episodes) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("dataset: cannot write " + path);
  put(f.get(), kMagic);
  put(f.get(), kVersion);
  put_str(f.get(), kind);
  put(f.get(), config_hash);
  put<uint32_t>(f.get(), static_cast<uint32_t>(episodes.size()));
  for (const Episode& ep : episodes) {
    const uint64_t body =
        sizeof(uint64_t) + 1 + 3 * sizeof(int16_t) + sizeof(uint32_t) +
        ep.steps.size() * (kObsBytes + kMaskBytes + 2 + 7 * sizeof(int16_t));
    put(f.get(), body);
    put(f.get(), ep.maze_seed);
    put(f.get(), ep.room_width);
    put(f.get(), ep.start_x);
    put(f.get(), ep.start_y);
    put(f.get(), ep.start_h);
    put<uint32_t>(f.get(), static_cast<uint32_t>(ep.steps.size()));
    for (const EpisodeStep& s : ep.steps) {
      std::fwrite(s.obs.data(), 1, kObsBytes, f.get());
      std::fwrite(s.mask.data(), 1, kMaskBytes, f.get());
      put(f.get(), s.action);
      put(f.get(), s.collision);
      put(f.get(), s.local_x);
      put(f.get(), s.local_y);
      put(f.get(), s.local_h);
      put(f.get(), s.room_id);
      put(f.get(), s.gx);
      put(f.get(), s.gy);
      put(f.get(), s.gh);
    }
  }
}

Dataset read_dataset(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("dataset: cannot read " + path);
  if (get<uint64_t>(f.get()) != kMagic) throw std::runtime_error("dataset: bad magic");
  if (get<uint32_t>(f.get()) != kVersion) throw std::runtime_error("dataset: bad version");
  Dataset out;
  out.kind = get_str(f.get());
  out.config_hash = get<uint64_t>(f.get());
  const auto count = get<uint32_t>(f.get());
  out.episodes.resize(count);
  for (Episode& ep : out.episodes) {
    (void)get<uint64_t>(f.get());  // body length, unused on sequential read
    ep.maze_seed = get<uint64_t>(f.get());
    ep.room_width = get<uint8_t>(f.get());
    ep.start_x = get<int16_t>(f.get());
    ep.start_y = get<int16_t>(f.get());
    ep.start_h = get<int16_t>(f.get());
    ep.steps.resize(get<uint32_t>(f.get()));
    for (EpisodeStep& s : ep.steps) {
      s.obs.resize(kObsBytes);
      if (std::fread(s.obs.data(), 1, kObsBytes, f.get()) != kObsBytes)
        throw std::runtime_error("dataset: truncated obs");
      s.mask.resize(kMaskBytes);
      if (std::fread(s.mask.data(), 1, kMaskBytes, f.get()) != kMaskBytes)
        throw std::runtime_error("dataset: truncated mask");
      s.action = get<uint8_t>(f.get());
      s.collision = get<uint8_t>(f.get());
      s.local_x = get<int16_t>(f.get());
      s.local_y = get<int16_t>(f.get());
      s.local_h = get<int16_t>(f.get());
      s.room_id = get<int16_t>(f.get());
      s.gx = get<int16_t>(f.get());
      s.gy = get<int16_t>(f.get());
      s.gh = get<int16_t>(f.get());
    }
  }
  return out;
}

namespace {

std::vector<uint8_t> quantize(const std::vector<double>& obs) {
  std::vector<uint8_t> out(obs.size());
  for (size_t i = 0; i < obs.size(); ++i)
    out[i] = static_cast<uint8_t>(obs[i] * 255.0 + 0.5);
  return out;
}

std::vector<uint8_t> pack_mask(const std::array<bool, 49>& mask) {
  std::vector<uint8_t> out(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1 : 0;
  return out;
}

// Floor tiles just inside a room next to an aisle opening.
std::vector<sim::Pose> near_door_starts(const sim::Maze& maze, Rng& rng, int count) {
  std::vector<std::pair<int, int>> spots;
  for (const auto& [x, y] : maze.floor_tiles()) {
    if (maze.room_at(x, y) < 0) continue;
    for (int h = 0; h < 4; ++h) {
      const int nx = x + sim::heading_dx(static_cast<sim::Heading>(h));
      const int ny = y + sim::heading_dy(static_cast<sim::Heading>(h));
      const auto k = maze.tile(nx, ny).kind;
      if (k == sim::TileKind::Corridor || k == sim::TileKind::DoorClosed ||
          k == sim::TileKind::DoorOpen) {
        spots.emplace_back(x, y);
        break;
      }
    }
  }
  if (spots.empty()) spots = maze.floor_tiles();
  std::vector<sim::Pose> out;
  for (int i = 0; i < count; ++i) {
    const auto [x, y] = spots[rng.uniform_int(static_cast<int>(spots.size()))];
    out.push_back(sim::Pose{x, y, static_cast<sim::Heading>(rng.uniform_int(4))});
  }
  return out;
}

EpisodeStep make_step(const sim::Maze& maze, const sim::Pose& pose, sim::Action action,
                      bool collision, const sim::Pose& local) {
  const auto obs = sim::render(maze, pose);
  EpisodeStep s;
  s.obs = quantize(obs.pixels);
  s.mask = pack_mask(obs.mask);
  s.action = static_cast<uint8_t>(action);
  s.collision = collision ? 1 : 0;
  s.local_x = static_cast<int16_t>(local.x);
  s.local_y = static_cast<int16_t>(local.y);
  s.local_h = static_cast<int16_t>(local.heading);
  s.room_id = static_cast<int16_t>(maze.room_at(pose.x, pose.y));
  s.gx = static_cast<int16_t>(pose.x);
  s.gy = static_cast<int16_t>(pose.y);
  s.gh = static_cast<int16_t>(pose.heading);
  return s;
}

void apply_local(sim::Pose& local, sim::Action a, bool collided) {
  switch (a) {
    case sim::Action::Left: local.heading = sim::turn_left(local.heading); break;
    case sim::Action::Right: local.heading = sim::turn_right(local.heading); break;
    case sim::Action::Forward:
      if (!collided) {
        local.x += sim::heading_dx(local.heading);
        local.y += sim::heading_dy(local.heading);
      }
      break;
    case sim::Action::StandBy: break;
  }
}

// Random walk confined to the starting room (the allocentric protocol).
Episode roll_room_sequence(sim::Maze maze, uint64_t maze_seed, const sim::Pose& start, int steps,
                           Rng& rng) {
  Episode ep;
  ep.maze_seed = maze_seed;
  ep.room_width = static_cast<uint8_t>(maze.config().room_width);
  ep.start_x = static_cast<int16_t>(start.x);
  ep.start_y = static_cast<int16_t>(start.y);
  ep.start_h = static_cast<int16_t>(start.heading);

  const int room = maze.room_at(start.x, start.y);
  sim::Pose pose = start;
  // Local frame convention: the entry heading reads as north, matching the
  // agent's run-time dead reckoning.
  sim::Pose local{0, 0, sim::Heading::N};
  ep.steps.push_back(make_step(maze, pose, sim::Action::StandBy, false, local));
  for (int t = 1; t < steps; ++t) {
    const int r = rng.uniform_int(3);
    sim::Action a = r == 0 ? sim::Action::Left
                    : r == 1 ? sim::Action::Right
                             : sim::Action::Forward;
    if (a == sim::Action::Forward) {
      const int nx = pose.x + sim::heading_dx(pose.heading);
      const int ny = pose.y + sim::heading_dy(pose.heading);
      if (maze.room_at(nx, ny) != room)
        a = rng.uniform_int(2) == 0 ? sim::Action::Left : sim::Action::Right;
    }
    const auto out = maze.step(pose, a);
    pose = out.next_pose;
    apply_local(local, a, out.collision);
    ep.steps.push_back(make_step(maze, pose, a, out.collision, local));
  }
  return ep;
}

// Free-roaming random walk, doors included (the egocentric protocol).
Episode roll_free_sequence(sim::Maze maze, uint64_t maze_seed, const sim::Pose& start, int steps,
                           Rng& rng) {
  Episode ep;
  ep.maze_seed = maze_seed;
  ep.room_width = static_cast<uint8_t>(maze.config().room_width);
  ep.start_x = static_cast<int16_t>(start.x);
  ep.start_y = static_cast<int16_t>(start.y);
  ep.start_h = static_cast<int16_t>(start.heading);

  sim::Pose pose = start;
  sim::Pose local{0, 0, sim::Heading::N};
  ep.steps.push_back(make_step(maze, pose, sim::Action::StandBy, false, local));
  for (int t = 1; t < steps; ++t) {
    const int r = rng.uniform_int(3);  // uniform over left/right/forward
    const sim::Action a = r == 0 ? sim::Action::Left
                          : r == 1 ? sim::Action::Right
                                   : sim::Action::Forward;
    const auto out = maze.step(pose, a);
    pose = out.next_pose;
    apply_local(local, a, out.collision);
    ep.steps.push_back(make_step(maze, pose, a, out.collision, local));
  }
  return ep;
}

}  // namespace

DatasetPaths collect_dataset(const Profile& profile, uint64_t master_seed,
                             const std::string& out_dir) {
  DatasetPaths paths;
  const uint64_t cfg_hash = fnv1a64(profile.name + ":" + std::to_string(master_seed));

  for (int w : profile.room_widths) {
    std::vector<sim::Maze> mazes;
    std::vector<uint64_t> maze_seeds;
    for (int e = 0; e < profile.envs_per_width; ++e) {
      sim::MazeConfig mc;
      mc.rows = profile.maze_rows;
      mc.cols = profile.maze_cols;
      mc.room_width = w;
      mc.seed = mix_seed(master_seed, static_cast<uint64_t>(w), 1000 + e);
      mc.place_white_tile = true;
      mazes.push_back(sim::Maze::generate(mc));
      maze_seeds.push_back(mc.seed);
    }

    std::vector<Episode> allo_eps;
    for (int i = 0; i < profile.allo_sequences_per_width; ++i) {
      const int env = i % profile.envs_per_width;
      Rng rng(mix_seed(master_seed, static_cast<uint64_t>(w) * 2 + 0, i));
      const auto starts = near_door_starts(mazes[env], rng, 1);
      allo_eps.push_back(
          roll_room_sequence(mazes[env], maze_seeds[env], starts[0], profile.allo_seq_len, rng));
    }
    const std::string allo_path = out_dir + "/allo_w" + std::to_string(w) + ".bin";
    write_dataset(allo_path, "allo", cfg_hash, allo_eps);
    paths.allo_files.push_back(allo_path);

    std::vector<Episode> ego_eps;
    for (int i = 0; i < profile.ego_sequences_per_width; ++i) {
      const int env = i % profile.envs_per_width;
      Rng rng(mix_seed(master_seed, static_cast<uint64_t>(w) * 2 + 1, i));
      const auto starts = near_door_starts(mazes[env], rng, 1);
      ego_eps.push_back(
          roll_free_sequence(mazes[env], maze_seeds[env], starts[0], profile.ego_seq_len, rng));
    }
    const std::string ego_path = out_dir + "/ego_w" + std::to_string(w) + ".bin";
    write_dataset(ego_path, "ego", cfg_hash, ego_eps);
    paths.ego_files.push_back(ego_path);
  }
  return paths;
}

}  // namespace hainav::harness
