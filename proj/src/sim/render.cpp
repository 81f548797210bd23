#include "hainav/sim/render.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace hainav::sim {

std::array<double, 3> room_color_rgb(RoomColor c) {
  switch (c) {
    case RoomColor::Red: return {0.90, 0.10, 0.10};
    case RoomColor::Green: return {0.10, 0.80, 0.15};
    case RoomColor::Blue: return {0.15, 0.20, 0.90};
    case RoomColor::Purple: return {0.55, 0.15, 0.80};
  }
  return {0, 0, 0};
}

std::array<double, 3> tile_base_rgb(const Tile& t) {
  switch (t.kind) {
    case TileKind::Wall: return kWallRgb;
    case TileKind::Corridor: return kCorridorRgb;
    case TileKind::DoorClosed:
    case TileKind::DoorOpen: return kDoorRgb;
    case TileKind::White: return kWhiteRgb;
    case TileKind::RoomFloor: {
      auto c = room_color_rgb(t.color);
      return {0.5 * c[0], 0.5 * c[1], 0.5 * c[2]};
    }
  }
  return kUnseenRgb;
}

std::pair<int, int> window_tile(const Pose& pose, int wr, int wc) {
  const int ax = heading_dx(pose.heading), ay = heading_dy(pose.heading);
  const Heading right = turn_right(pose.heading);
  const int rx = heading_dx(right), ry = heading_dy(right);
  const int fwd = kAgentRow - wr;
  const int side = wc - kAgentCol;
  return {pose.x + fwd * ax + side * rx, pose.y + fwd * ay + side * ry};
}

std::array<bool, kWindowTiles * kWindowTiles> compute_visibility(const Maze& maze,
                                                                 const Pose& pose) {
  std::array<bool, kWindowTiles * kWindowTiles> vis{};
  std::array<bool, kWindowTiles * kWindowTiles> see_through{};
  for (int wr = 0; wr < kWindowTiles; ++wr)
    for (int wc = 0; wc < kWindowTiles; ++wc) {
      const auto [x, y] = window_tile(pose, wr, wc);
      see_through[wr * kWindowTiles + wc] = maze.in_bounds(x, y) && !maze.blocks_sight(x, y);
    }

  auto at = [&](int wr, int wc) -> bool& { return vis[wr * kWindowTiles + wc]; };
  at(kAgentRow, kAgentCol) = true;

  // Two sweeps per row, from the agent row outward; visibility spreads sideways
  // through see-through cells and one row ahead (including diagonals).
  for (int wr = kAgentRow; wr >= 0; --wr) {
    for (int wc = 0; wc < kWindowTiles; ++wc) {
      if (!at(wr, wc) || !see_through[wr * kWindowTiles + wc]) continue;
      if (wc + 1 < kWindowTiles) at(wr, wc + 1) = true;
      if (wr > 0) {
        at(wr - 1, wc) = true;
        if (wc + 1 < kWindowTiles) at(wr - 1, wc + 1) = true;
      }
    }
    for (int wc = kWindowTiles - 1; wc >= 0; --wc) {
      if (!at(wr, wc) || !see_through[wr * kWindowTiles + wc]) continue;
      if (wc > 0) at(wr, wc - 1) = true;
      if (wr > 0) {
        at(wr - 1, wc) = true;
        if (wc > 0) at(wr - 1, wc - 1) = true;
      }
    }
  }
  return vis;
}

namespace {

void fill_patch(std::vector<double>& img, int wr, int wc, const std::array<double, 3>& rgb) {
  for (int c = 0; c < kChannels; ++c)
    for (int py = 0; py < kTilePixels; ++py) {
      double* row = &img[(c * kImageSize + wr * kTilePixels + py) * kImageSize + wc * kTilePixels];
      std::fill(row, row + kTilePixels, rgb[c]);
    }
}

void draw_open_door(std::vector<double>& img, int wr, int wc) {
  fill_patch(img, wr, wc, kDoorRgb);
  // Dark interior so open and closed doors look different.
  for (int c = 0; c < kChannels; ++c)
    for (int py = 1; py < kTilePixels - 1; ++py) {
      double* row = &img[(c * kImageSize + wr * kTilePixels + py) * kImageSize + wc * kTilePixels];
      std::fill(row + 1, row + kTilePixels - 1, 0.12);
    }
}

void draw_agent_marker(std::vector<double>& img, int wr, int wc) {
  // Up-pointing triangle inside the tile patch.
  static constexpr int kSpan[kTilePixels][2] = {{3, 4}, {3, 4}, {3, 4}, {2, 5},
                                                {2, 5}, {1, 6}, {1, 6}, {0, 0}};
  for (int py = 0; py < kTilePixels - 1; ++py)
    for (int px = kSpan[py][0]; px <= kSpan[py][1]; ++px)
      for (int c = 0; c < kChannels; ++c)
        img[(c * kImageSize + wr * kTilePixels + py) * kImageSize + wc * kTilePixels + px] =
            kAgentRgb[c];
}

void draw_tile(std::vector<double>& img, const Maze& maze, int x, int y, int wr, int wc) {
  if (!maze.in_bounds(x, y)) {
    fill_patch(img, wr, wc, kUnseenRgb);
    return;
  }
  const Tile& t = maze.tile(x, y);
  if (t.kind == TileKind::DoorOpen)
    draw_open_door(img, wr, wc);
  else
    fill_patch(img, wr, wc, tile_base_rgb(t));
}

}  // namespace

Observation render(const Maze& maze, const Pose& pose) {
  Observation obs;
  obs.pixels.assign(kImagePixels, 0.0);
  obs.mask = compute_visibility(maze, pose);
  for (int wr = 0; wr < kWindowTiles; ++wr)
    for (int wc = 0; wc < kWindowTiles; ++wc) {
      if (!obs.mask[wr * kWindowTiles + wc]) continue;  // unseen stays black
      const auto [x, y] = window_tile(pose, wr, wc);
      draw_tile(obs.pixels, maze, x, y, wr, wc);
    }
  draw_agent_marker(obs.pixels, kAgentRow, kAgentCol);
  return obs;
}

std::vector<double> render_topdown(const Maze& maze, int* out_h, int* out_w) {
  const int h = maze.height() * kTilePixels;
  const int w = maze.width() * kTilePixels;
  std::vector<double> img(static_cast<size_t>(kChannels) * h * w, 0.0);
  for (int ty = 0; ty < maze.height(); ++ty)
    for (int tx = 0; tx < maze.width(); ++tx) {
      const auto rgb = tile_base_rgb(maze.tile(tx, ty));
      for (int c = 0; c < kChannels; ++c)
        for (int py = 0; py < kTilePixels; ++py) {
          double* row = &img[(static_cast<size_t>(c) * h + ty * kTilePixels + py) * w +
                             tx * kTilePixels];
          std::fill(row, row + kTilePixels, rgb[c]);
        }
    }
  if (out_h) *out_h = h;
  if (out_w) *out_w = w;
  return img;
}

std::vector<std::pair<int, int>> observable_tiles(const Maze& maze) {
  Maze open = maze;
  for (int y = 0; y < open.height(); ++y)
    for (int x = 0; x < open.width(); ++x) open.open_door(x, y);

  std::set<std::pair<int, int>> seen;
  for (const auto& [fx, fy] : open.floor_tiles())
    for (int h = 0; h < 4; ++h) {
      const Pose p{fx, fy, static_cast<Heading>(h)};
      const auto vis = compute_visibility(open, p);
      for (int wr = 0; wr < kWindowTiles; ++wr)
        for (int wc = 0; wc < kWindowTiles; ++wc) {
          if (!vis[wr * kWindowTiles + wc]) continue;
          const auto t = window_tile(p, wr, wc);
          if (open.in_bounds(t.first, t.second)) seen.insert(t);
        }
    }
  return {seen.begin(), seen.end()};
}

void write_ppm(const std::string& path, const std::vector<double>& chw, int h, int w) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "P6\n%d %d\n255\n", w, h);
  std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(chw[(static_cast<size_t>(c) * h + y) * w + x], 0.0, 1.0);
        row[x * 3 + c] = static_cast<unsigned char>(v * 255.0 + 0.5);
      }
    std::fwrite(row.data(), 1, row.size(), f);
  }
  std::fclose(f);
}

}  // namespace hainav::sim
