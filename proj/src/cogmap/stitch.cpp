#include "hainav/cogmap/stitch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hainav::cogmap {

namespace {

struct Reference {
  TileClass cls;
  sim::RoomColor color;
  std::array<double, 3> rgb;
};

const std::vector<Reference>& palette() {
  static const std::vector<Reference> refs = [] {
    std::vector<Reference> v;
    v.push_back({TileClass::Wall, sim::RoomColor::Red, sim::kWallRgb});
    v.push_back({TileClass::Corridor, sim::RoomColor::Red, sim::kCorridorRgb});
    v.push_back({TileClass::Door, sim::RoomColor::Red, sim::kDoorRgb});
    // Open doors render as an amber ring with a dark interior; match their mean.
    v.push_back({TileClass::Door, sim::RoomColor::Red,
                 {0.95 * 28.0 / 64 + 0.12 * 36.0 / 64, 0.60 * 28.0 / 64 + 0.12 * 36.0 / 64,
                  0.05 * 28.0 / 64 + 0.12 * 36.0 / 64}});
    v.push_back({TileClass::White, sim::RoomColor::Red, sim::kWhiteRgb});
    v.push_back({TileClass::Unknown, sim::RoomColor::Red, sim::kUnseenRgb});
    for (int c = 0; c < 4; ++c) {
      const auto rc = sim::room_color_rgb(static_cast<sim::RoomColor>(c));
      v.push_back({TileClass::Floor, static_cast<sim::RoomColor>(c),
                   {0.5 * rc[0], 0.5 * rc[1], 0.5 * rc[2]}});
    }
    return v;
  }();
  return refs;
}

}  // namespace

TileGuess classify_patch_rgb(const std::array<double, 3>& rgb) {
  double best = std::numeric_limits<double>::max();
  const Reference* winner = nullptr;
  for (const Reference& r : palette()) {
    double d = 0.0;
    for (int c = 0; c < 3; ++c) d += (rgb[c] - r.rgb[c]) * (rgb[c] - r.rgb[c]);
    if (d < best) {
      best = d;
      winner = &r;
    }
  }
  TileGuess g;
  g.cls = winner->cls;
  g.color = winner->color;
  g.rgb = rgb;
  g.confidence = 1.0 / (1.0 + std::sqrt(best) * 10.0);
  return g;
}

std::array<double, 3> front_tile_rgb(const std::vector<double>& image) {
  // Tile window cell directly ahead of the agent: row kAgentRow-1, centre column.
  const int wr = sim::kAgentRow - 1, wc = sim::kAgentCol;
  std::array<double, 3> rgb{0, 0, 0};
  int n = 0;
  for (int py = 1; py < sim::kTilePixels - 1; ++py)
    for (int px = 1; px < sim::kTilePixels - 1; ++px) {
      for (int c = 0; c < 3; ++c)
        rgb[c] += image[(static_cast<size_t>(c) * sim::kImageSize + wr * sim::kTilePixels + py) *
                            sim::kImageSize +
                        wc * sim::kTilePixels + px];
      ++n;
    }
  for (int c = 0; c < 3; ++c) rgb[c] /= n;
  return rgb;
}

std::vector<std::pair<int, int>> RoomRaster::door_offsets() const {
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (at(dx, dy).cls == TileClass::Door) out.emplace_back(dx, dy);
  return out;
}

std::vector<std::pair<int, int>> RoomRaster::walkable_offsets() const {
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const TileClass c = at(dx, dy).cls;
      if (c == TileClass::Floor || c == TileClass::White || c == TileClass::Corridor ||
          c == TileClass::Door)
        out.emplace_back(dx, dy);
    }
  return out;
}

RoomRaster decode_room_raster(const PlaceDecoder& decoder, const GaussianBelief& place,
                              int radius) {
  RoomRaster raster;
  raster.radius = radius;
  raster.tiles.assign((2 * radius + 1) * (2 * radius + 1), TileGuess{});
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      // Stand one tile south of the target facing north, so the target is the
      // front-centre window tile.
      const allo::LocalPose q{dx, dy + 1, sim::Heading::N};
      const auto img = decoder.decode_mean(place, q);
      raster.at(dx, dy) = classify_patch_rgb(front_tile_rgb(img));
    }
  return raster;
}

StitchedMap stitch_map(const CognitiveGraph& graph, const PlaceDecoder& decoder,
                       int room_radius) {
  StitchedMap map;
  if (graph.empty()) return map;

  int min_x = std::numeric_limits<int>::max(), min_y = min_x;
  int max_x = std::numeric_limits<int>::min(), max_y = max_x;
  for (const LocationNode& n : graph.nodes()) {
    min_x = std::min(min_x, n.anchor.x - room_radius);
    min_y = std::min(min_y, n.anchor.y - room_radius);
    max_x = std::max(max_x, n.anchor.x + room_radius);
    max_y = std::max(max_y, n.anchor.y + room_radius);
  }
  map.min_x = min_x;
  map.min_y = min_y;
  map.tiles_w = max_x - min_x + 1;
  map.tiles_h = max_y - min_y + 1;
  map.tile_guesses.assign(static_cast<size_t>(map.tiles_w) * map.tiles_h, TileGuess{});
  map.winner.assign(map.tile_guesses.size(), -1);

  // Sharper beliefs paint over vaguer ones.
  auto mean_std = [](const LocationNode& n) {
    double s = 0.0;
    for (double v : n.place.std) s += v;
    return s / static_cast<double>(n.place.std.size());
  };
  std::vector<int> order;
  for (const LocationNode& n : graph.nodes()) order.push_back(n.experience_id);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return mean_std(graph.node(a)) > mean_std(graph.node(b));
  });

  for (int id : order) {
    const LocationNode& n = graph.node(id);
    const RoomRaster raster = decode_room_raster(decoder, n.place, room_radius);
    for (int dy = -room_radius; dy <= room_radius; ++dy)
      for (int dx = -room_radius; dx <= room_radius; ++dx) {
        const int tx = n.anchor.x + dx - min_x;
        const int ty = n.anchor.y + dy - min_y;
        const size_t at = static_cast<size_t>(ty) * map.tiles_w + tx;
        map.tile_guesses[at] = raster.at(dx, dy);
        map.winner[at] = id;
      }
  }

  map.height = map.tiles_h * sim::kTilePixels;
  map.width = map.tiles_w * sim::kTilePixels;
  map.image.assign(static_cast<size_t>(3) * map.height * map.width, 0.0);
  for (int ty = 0; ty < map.tiles_h; ++ty)
    for (int tx = 0; tx < map.tiles_w; ++tx) {
      const TileGuess& g = map.tile_guesses[static_cast<size_t>(ty) * map.tiles_w + tx];
      if (map.winner[static_cast<size_t>(ty) * map.tiles_w + tx] < 0) continue;
      for (int c = 0; c < 3; ++c)
        for (int py = 0; py < sim::kTilePixels; ++py) {
          double* row = &map.image[(static_cast<size_t>(c) * map.height + ty * sim::kTilePixels +
                                    py) *
                                       map.width +
                                   tx * sim::kTilePixels];
          std::fill(row, row + sim::kTilePixels, g.rgb[c]);
        }
    }
  return map;
}

}  // namespace hainav::cogmap
