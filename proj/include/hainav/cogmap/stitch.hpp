#pragma once

#include <array>
#include <vector>

#include "hainav/cogmap/recognition.hpp"
#include "hainav/sim/render.hpp"

namespace hainav::cogmap {

enum class TileClass : uint8_t { Unknown = 0, Wall, Corridor, Door, White, Floor };

struct TileGuess {
  TileClass cls = TileClass::Unknown;
  sim::RoomColor color = sim::RoomColor::Red;  // valid for Floor
  std::array<double, 3> rgb{0, 0, 0};
  double confidence = 0.0;  // higher = closer match to a reference color
};

// Nearest reference color over the renderer palette.
TileGuess classify_patch_rgb(const std::array<double, 3>& rgb);

// Top-down tile map of one place, decoded by querying poses that face each
// raster tile from one tile away. Offsets are in the place's local frame.
struct RoomRaster {
  int radius = 0;  // covers offsets in [-radius, radius]^2
  std::vector<TileGuess> tiles;

  const TileGuess& at(int dx, int dy) const {
    return tiles[(dy + radius) * (2 * radius + 1) + (dx + radius)];
  }
  TileGuess& at(int dx, int dy) {
    return tiles[(dy + radius) * (2 * radius + 1) + (dx + radius)];
  }
  std::vector<std::pair<int, int>> door_offsets() const;
  std::vector<std::pair<int, int>> walkable_offsets() const;
};

RoomRaster decode_room_raster(const PlaceDecoder& decoder, const GaussianBelief& place,
                              int radius);

// Average color of the tile straight ahead of the agent in a decoded view.
std::array<double, 3> front_tile_rgb(const std::vector<double>& image);

struct StitchedMap {
  std::vector<double> image;  // CHW
  int height = 0, width = 0;
  int min_x = 0, min_y = 0;  // global tile of the canvas origin
  std::vector<TileGuess> tile_guesses;
  std::vector<int> winner;  // node id that painted each tile; -1 untouched
  int tiles_w = 0, tiles_h = 0;

  const TileGuess* guess_at(int gx, int gy) const {
    const int tx = gx - min_x, ty = gy - min_y;
    if (tx < 0 || ty < 0 || tx >= tiles_w || ty >= tiles_h) return nullptr;
    return &tile_guesses[ty * tiles_w + tx];
  }
};

// Paints every node's decoded raster onto a global canvas at its anchor;
// overlaps go to the node with the sharpest place belief.
StitchedMap stitch_map(const CognitiveGraph& graph, const PlaceDecoder& decoder, int room_radius);

}  // namespace hainav::cogmap
