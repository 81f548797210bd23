#pragma once

#include <array>
#include <string>
#include <vector>

#include "hainav/sim/maze.hpp"

namespace hainav::sim {

inline constexpr int kWindowTiles = 7;  // 7x7 tile field of view
inline constexpr int kTilePixels = 8;
inline constexpr int kImageSize = kWindowTiles * kTilePixels;  // 56
inline constexpr int kChannels = 3;
inline constexpr int kImagePixels = kChannels * kImageSize * kImageSize;

// Agent cell within the window (bottom centre, facing "up").
inline constexpr int kAgentRow = kWindowTiles - 1;
inline constexpr int kAgentCol = kWindowTiles / 2;

struct Observation {
  std::vector<double> pixels;              // CHW, 3x56x56, values in [0,1]
  std::array<bool, kWindowTiles * kWindowTiles> mask{};  // true = visible

  bool visible(int wr, int wc) const { return mask[wr * kWindowTiles + wc]; }
};

// Global tile under window cell (wr, wc) for an agent at `pose`.
std::pair<int, int> window_tile(const Pose& pose, int wr, int wc);

// Tile-level shadow flood within the window; walls and closed doors block sight.
std::array<bool, kWindowTiles * kWindowTiles> compute_visibility(const Maze& maze,
                                                                 const Pose& pose);

Observation render(const Maze& maze, const Pose& pose);

// Reference colors used by the renderer (RGB in [0,1]).
std::array<double, 3> room_color_rgb(RoomColor c);
std::array<double, 3> tile_base_rgb(const Tile& t);
inline constexpr std::array<double, 3> kUnseenRgb{0.0, 0.0, 0.0};
inline constexpr std::array<double, 3> kWallRgb{0.5, 0.5, 0.5};
inline constexpr std::array<double, 3> kCorridorRgb{0.35, 0.35, 0.35};
inline constexpr std::array<double, 3> kDoorRgb{0.95, 0.60, 0.05};
inline constexpr std::array<double, 3> kWhiteRgb{1.0, 1.0, 1.0};
inline constexpr std::array<double, 3> kAgentRgb{0.0, 0.9, 0.9};

// Top-down raster of the whole maze, one kTilePixels patch per tile.
std::vector<double> render_topdown(const Maze& maze, int* out_h = nullptr, int* out_w = nullptr);

// Tiles visible from at least one valid pose (doors opened); coverage denominator.
std::vector<std::pair<int, int>> observable_tiles(const Maze& maze);

void write_ppm(const std::string& path, const std::vector<double>& chw, int h, int w);

}  // namespace hainav::sim
