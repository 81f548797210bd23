#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hainav::sim {

enum class RoomColor : uint8_t { Red = 0, Green = 1, Blue = 2, Purple = 3 };

enum class TileKind : uint8_t {
  Wall = 0,
  RoomFloor,   // colored by the room it belongs to
  Corridor,    // aisle tile, neutral color
  DoorClosed,
  DoorOpen,
  White,       // the single goal tile
};

enum class Heading : uint8_t { N = 0, E = 1, S = 2, W = 3 };

enum class Action : uint8_t { Left = 0, Right = 1, Forward = 2, StandBy = 3 };
inline constexpr int kNumActions = 4;

struct Pose {
  int x = 0;  // tile column
  int y = 0;  // tile row
  Heading heading = Heading::N;

  bool operator==(const Pose&) const = default;
};

// Heading deltas in grid coordinates (y grows downward).
inline int heading_dx(Heading h) {
  static constexpr std::array<int, 4> dx{0, 1, 0, -1};
  return dx[static_cast<int>(h)];
}
inline int heading_dy(Heading h) {
  static constexpr std::array<int, 4> dy{-1, 0, 1, 0};
  return dy[static_cast<int>(h)];
}
inline Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
inline Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }

struct MazeConfig {
  int rows = 3;           // room rows
  int cols = 3;           // room columns
  int room_width = 4;     // tiles per room side, 4..7 (8 only for generalization runs)
  int aisle_length = 2;   // corridor tile + door tile
  uint64_t seed = 0;
  bool place_white_tile = true;
  double extra_aisle_prob = 0.35;  // chance of keeping a non-tree aisle
  bool all_aisles = false;         // connect every adjacent room pair (test fixtures)
  std::vector<RoomColor> fixed_colors;  // optional explicit room colors (test fixtures)
};

struct Tile {
  TileKind kind = TileKind::Wall;
  RoomColor color = RoomColor::Red;  // meaningful for RoomFloor only
  int16_t room = -1;                 // room index for room tiles, -1 elsewhere
};

struct StepOutcome {
  Pose next_pose;
  bool collision = false;
  bool door_opened = false;
  bool on_white = false;
};

class Maze {
 public:
  Maze() = default;

  int width() const { return width_; }
  int height() const { return height_; }
  int num_rooms() const { return config_.rows * config_.cols; }
  const MazeConfig& config() const { return config_; }

  const Tile& tile(int x, int y) const { return tiles_[y * width_ + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool is_wall(int x, int y) const { return !in_bounds(x, y) || tile(x, y).kind == TileKind::Wall; }
  bool is_walkable(int x, int y) const;
  bool blocks_sight(int x, int y) const;

  int room_at(int x, int y) const { return in_bounds(x, y) ? tile(x, y).room : -1; }
  RoomColor room_color(int room) const { return room_colors_[room]; }
  // Center tile of a room's interior.
  std::pair<int, int> room_center(int room) const;
  std::vector<std::pair<int, int>> room_interior(int room) const;

  std::optional<std::pair<int, int>> white_tile() const { return white_; }

  // Room adjacency induced by generated aisles.
  const std::vector<std::pair<int, int>>& aisle_pairs() const { return aisle_pairs_; }

  bool door_open(int x, int y) const { return tile(x, y).kind == TileKind::DoorOpen; }
  void open_door(int x, int y);
  void close_all_doors();

  std::vector<std::pair<int, int>> floor_tiles() const;  // every walkable tile
  StepOutcome step(const Pose& pose, Action action);

  std::string serialize() const;
  static Maze deserialize(const std::string& text);

  static Maze generate(const MazeConfig& config);

 private:
  MazeConfig config_;
  int width_ = 0;
  int height_ = 0;
  std::vector<Tile> tiles_;
  std::vector<RoomColor> room_colors_;
  std::vector<std::pair<int, int>> aisle_pairs_;
  std::optional<std::pair<int, int>> white_;
};

// Minimal-cost action sequence (rotations and forward each cost 1) from start
// to any heading on the goal tile. Closed doors are traversable (they open).
std::optional<std::vector<Action>> astar_path(const Maze& maze, const Pose& start,
                                              std::pair<int, int> goal_tile);

}  // namespace hainav::sim
