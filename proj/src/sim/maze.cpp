#include "hainav/sim/maze.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hainav::sim {

namespace {

// Union-find over room indices, used when sampling the aisle layout.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

struct AisleCandidate {
  int room_a;
  int room_b;
  bool horizontal;  // true: rooms side by side, aisle crosses a vertical band
};

}  // namespace

bool Maze::is_walkable(int x, int y) const {
  if (!in_bounds(x, y)) return false;
  return tile(x, y).kind != TileKind::Wall;
}

bool Maze::blocks_sight(int x, int y) const {
  if (!in_bounds(x, y)) return true;
  const TileKind k = tile(x, y).kind;
  return k == TileKind::Wall || k == TileKind::DoorClosed;
}

std::pair<int, int> Maze::room_center(int room) const {
  const int w = config_.room_width;
  const int rj = room % config_.cols;
  const int ri = room / config_.cols;
  const int x0 = 1 + rj * (w + 2);
  const int y0 = 1 + ri * (w + 2);
  return {x0 + w / 2, y0 + w / 2};
}

std::vector<std::pair<int, int>> Maze::room_interior(int room) const {
  const int w = config_.room_width;
  const int rj = room % config_.cols;
  const int ri = room / config_.cols;
  const int x0 = 1 + rj * (w + 2);
  const int y0 = 1 + ri * (w + 2);
  std::vector<std::pair<int, int>> out;
  out.reserve(w * w);
  for (int y = y0; y < y0 + w; ++y)
    for (int x = x0; x < x0 + w; ++x) out.emplace_back(x, y);
  return out;
}

void Maze::open_door(int x, int y) {
  Tile& t = tiles_[y * width_ + x];
  if (t.kind == TileKind::DoorClosed) t.kind = TileKind::DoorOpen;
}

void Maze::close_all_doors() {
  for (Tile& t : tiles_)
    if (t.kind == TileKind::DoorOpen) t.kind = TileKind::DoorClosed;
}

std::vector<std::pair<int, int>> Maze::floor_tiles() const {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (is_walkable(x, y)) out.emplace_back(x, y);
  return out;
}

StepOutcome Maze::step(const Pose& pose, Action action) {
  StepOutcome out;
  out.next_pose = pose;
  switch (action) {
    case Action::Left:
      out.next_pose.heading = turn_left(pose.heading);
      break;
    case Action::Right:
      out.next_pose.heading = turn_right(pose.heading);
      break;
    case Action::StandBy:
      break;
    case Action::Forward: {
      const int nx = pose.x + heading_dx(pose.heading);
      const int ny = pose.y + heading_dy(pose.heading);
      if (!is_walkable(nx, ny)) {
        out.collision = true;
      } else {
        if (tile(nx, ny).kind == TileKind::DoorClosed) {
          open_door(nx, ny);
          out.door_opened = true;
        }
        out.next_pose.x = nx;
        out.next_pose.y = ny;
      }
      break;
    }
  }
  out.on_white = tile(out.next_pose.x, out.next_pose.y).kind == TileKind::White;
  return out;
}

Maze Maze::generate(const MazeConfig& config) {
  if (config.rows < 1 || config.cols < 1) throw std::invalid_argument("maze: need at least one room");
  if (config.room_width < 4 || config.room_width > 8)
    throw std::invalid_argument("maze: room_width must be in [4,8]");
  if (config.aisle_length != 2) throw std::invalid_argument("maze: aisle_length fixed at 2");

  Maze m;
  m.config_ = config;
  const int w = config.room_width;
  m.width_ = 2 + config.cols * w + (config.cols - 1) * 2;
  m.height_ = 2 + config.rows * w + (config.rows - 1) * 2;
  m.tiles_.assign(static_cast<size_t>(m.width_) * m.height_, Tile{});

  std::mt19937_64 rng(config.seed);

  // Room colors.
  const int n_rooms = config.rows * config.cols;
  m.room_colors_.resize(n_rooms);
  if (!config.fixed_colors.empty()) {
    if (static_cast<int>(config.fixed_colors.size()) != n_rooms)
      throw std::invalid_argument("maze: fixed_colors size mismatch");
    m.room_colors_ = config.fixed_colors;
  } else {
    for (int r = 0; r < n_rooms; ++r)
      m.room_colors_[r] = static_cast<RoomColor>(rng() % 4);
  }

  // Room interiors.
  for (int ri = 0; ri < config.rows; ++ri) {
    for (int rj = 0; rj < config.cols; ++rj) {
      const int room = ri * config.cols + rj;
      const int x0 = 1 + rj * (w + 2);
      const int y0 = 1 + ri * (w + 2);
      for (int y = y0; y < y0 + w; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
          Tile& t = m.tiles_[y * m.width_ + x];
          t.kind = TileKind::RoomFloor;
          t.color = m.room_colors_[room];
          t.room = static_cast<int16_t>(room);
        }
      }
    }
  }

  // Candidate aisles between adjacent rooms; keep a random spanning tree plus
  // a random subset of the rest.
  std::vector<AisleCandidate> candidates;
  for (int ri = 0; ri < config.rows; ++ri)
    for (int rj = 0; rj < config.cols; ++rj) {
      const int room = ri * config.cols + rj;
      if (rj + 1 < config.cols) candidates.push_back({room, room + 1, true});
      if (ri + 1 < config.rows) candidates.push_back({room, room + config.cols, false});
    }
  std::shuffle(candidates.begin(), candidates.end(), rng);

  DisjointSet ds(n_rooms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const AisleCandidate& c : candidates) {
    const bool needed = ds.unite(c.room_a, c.room_b);
    const bool keep = config.all_aisles || needed || unit(rng) < config.extra_aisle_prob;
    if (!keep) continue;
    m.aisle_pairs_.emplace_back(c.room_a, c.room_b);

    const int ri = c.room_a / config.cols;
    const int rj = c.room_a % config.cols;
    const int offset = static_cast<int>(rng() % static_cast<uint64_t>(w));
    if (c.horizontal) {
      const int y = 1 + ri * (w + 2) + offset;
      const int x0 = 1 + rj * (w + 2) + w;  // first band column
      m.tiles_[y * m.width_ + x0] = Tile{TileKind::Corridor, RoomColor::Red, -1};
      m.tiles_[y * m.width_ + x0 + 1] = Tile{TileKind::DoorClosed, RoomColor::Red, -1};
    } else {
      const int x = 1 + rj * (w + 2) + offset;
      const int y0 = 1 + ri * (w + 2) + w;
      m.tiles_[y0 * m.width_ + x] = Tile{TileKind::Corridor, RoomColor::Red, -1};
      m.tiles_[(y0 + 1) * m.width_ + x] = Tile{TileKind::DoorClosed, RoomColor::Red, -1};
    }
  }
  std::sort(m.aisle_pairs_.begin(), m.aisle_pairs_.end());

  if (config.place_white_tile) {
    std::vector<std::pair<int, int>> interior;
    for (int r = 0; r < n_rooms; ++r) {
      auto tiles = m.room_interior(r);
      interior.insert(interior.end(), tiles.begin(), tiles.end());
    }
    const auto [wx, wy] = interior[rng() % interior.size()];
    Tile& t = m.tiles_[wy * m.width_ + wx];
    t.kind = TileKind::White;
    m.white_ = {wx, wy};
  }
  return m;
}

// --- Serialization -----------------------------------------------------------

namespace {
char tile_char(const Tile& t) {
  switch (t.kind) {
    case TileKind::Wall: return '#';
    case TileKind::Corridor: return '.';
    case TileKind::DoorClosed: return 'D';
    case TileKind::DoorOpen: return 'O';
    case TileKind::White: return 'W';
    case TileKind::RoomFloor:
      return "rgbp"[static_cast<int>(t.color)];
  }
  return '?';
}

RoomColor color_from_char(char c) {
  switch (c) {
    case 'r': return RoomColor::Red;
    case 'g': return RoomColor::Green;
    case 'b': return RoomColor::Blue;
    case 'p': return RoomColor::Purple;
  }
  throw std::invalid_argument("maze: bad color char");
}
}  // namespace

std::string Maze::serialize() const {
  std::ostringstream out;
  out << "hainav-maze 1\n";
  out << config_.rows << ' ' << config_.cols << ' ' << config_.room_width << ' ' << config_.seed
      << '\n';
  for (RoomColor c : room_colors_) out << "rgbp"[static_cast<int>(c)];
  out << '\n';
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out << tile_char(tile(x, y));
    out << '\n';
  }
  return out.str();
}

Maze Maze::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "hainav-maze" || version != 1) throw std::invalid_argument("maze: bad header");

  MazeConfig cfg;
  in >> cfg.rows >> cfg.cols >> cfg.room_width >> cfg.seed;
  std::string colors;
  in >> colors;

  Maze m;
  m.config_ = cfg;
  const int w = cfg.room_width;
  m.width_ = 2 + cfg.cols * w + (cfg.cols - 1) * 2;
  m.height_ = 2 + cfg.rows * w + (cfg.rows - 1) * 2;
  m.tiles_.assign(static_cast<size_t>(m.width_) * m.height_, Tile{});
  m.room_colors_.resize(cfg.rows * cfg.cols);
  for (int r = 0; r < cfg.rows * cfg.cols; ++r) m.room_colors_[r] = color_from_char(colors[r]);

  auto room_of = [&](int x, int y) -> int {
    const int cx = (x - 1) % (w + 2);
    const int cy = (y - 1) % (w + 2);
    if (x < 1 || y < 1 || cx >= w || cy >= w) return -1;
    return ((y - 1) / (w + 2)) * cfg.cols + (x - 1) / (w + 2);
  };

  std::string line;
  std::getline(in, line);  // consume newline after color row
  for (int y = 0; y < m.height_; ++y) {
    std::getline(in, line);
    if (static_cast<int>(line.size()) < m.width_) throw std::invalid_argument("maze: short row");
    for (int x = 0; x < m.width_; ++x) {
      Tile& t = m.tiles_[y * m.width_ + x];
      const char c = line[x];
      const int room = room_of(x, y);
      switch (c) {
        case '#': t = Tile{TileKind::Wall, RoomColor::Red, -1}; break;
        case '.': t = Tile{TileKind::Corridor, RoomColor::Red, -1}; break;
        case 'D': t = Tile{TileKind::DoorClosed, RoomColor::Red, -1}; break;
        case 'O': t = Tile{TileKind::DoorOpen, RoomColor::Red, -1}; break;
        case 'W':
          t = Tile{TileKind::White, RoomColor::Red, static_cast<int16_t>(room)};
          m.white_ = {x, y};
          break;
        default:
          t = Tile{TileKind::RoomFloor, color_from_char(c), static_cast<int16_t>(room)};
          break;
      }
    }
  }

  // Recover aisle pairs from door positions.
  for (int y = 0; y < m.height_; ++y)
    for (int x = 0; x < m.width_; ++x) {
      const TileKind k = m.tile(x, y).kind;
      if (k != TileKind::DoorClosed && k != TileKind::DoorOpen) continue;
      int a = -1, b = -1;
      for (int d = 1; d <= 2; ++d) {
        if (room_of(x - d, y) >= 0 && a < 0) a = room_of(x - d, y);
        if (room_of(x + d, y) >= 0 && b < 0) b = room_of(x + d, y);
        if (room_of(x, y - d) >= 0 && a < 0) a = room_of(x, y - d);
        if (room_of(x, y + d) >= 0 && b < 0) b = room_of(x, y + d);
      }
      if (a >= 0 && b >= 0) m.aisle_pairs_.emplace_back(std::min(a, b), std::max(a, b));
    }
  std::sort(m.aisle_pairs_.begin(), m.aisle_pairs_.end());
  return m;
}

// --- Path planning ------------------------------------------------------------

std::optional<std::vector<Action>> astar_path(const Maze& maze, const Pose& start,
                                              std::pair<int, int> goal_tile) {
  const auto [gx, gy] = goal_tile;
  if (!maze.is_walkable(gx, gy)) return std::nullopt;
  if (start.x == gx && start.y == gy) return std::vector<Action>{};

  const int W = maze.width(), H = maze.height();
  auto index = [&](int x, int y, int h) { return (y * W + x) * 4 + h; };
  std::vector<int> dist(static_cast<size_t>(W) * H * 4, INT32_MAX);
  std::vector<int> prev(static_cast<size_t>(W) * H * 4, -1);
  std::vector<Action> via(static_cast<size_t>(W) * H * 4, Action::StandBy);

  auto heuristic = [&](int x, int y) { return std::abs(x - gx) + std::abs(y - gy); };

  using Entry = std::pair<int, int>;  // (f, state)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int s0 = index(start.x, start.y, static_cast<int>(start.heading));
  dist[s0] = 0;
  open.push({heuristic(start.x, start.y), s0});

  while (!open.empty()) {
    const auto [f, s] = open.top();
    open.pop();
    const int h = s % 4;
    const int x = (s / 4) % W;
    const int y = s / 4 / W;
    if (f > dist[s] + heuristic(x, y)) continue;
    if (x == gx && y == gy) {
      std::vector<Action> actions;
      int cur = s;
      while (prev[cur] != -1) {
        actions.push_back(via[cur]);
        cur = prev[cur];
      }
      std::reverse(actions.begin(), actions.end());
      return actions;
    }
    auto relax = [&](int ns, Action a) {
      if (dist[s] + 1 < dist[ns]) {
        dist[ns] = dist[s] + 1;
        prev[ns] = s;
        via[ns] = a;
        open.push({dist[ns] + heuristic((ns / 4) % W, ns / 4 / W), ns});
      }
    };
    relax(index(x, y, (h + 3) % 4), Action::Left);
    relax(index(x, y, (h + 1) % 4), Action::Right);
    const int nx = x + heading_dx(static_cast<Heading>(h));
    const int ny = y + heading_dy(static_cast<Heading>(h));
    if (maze.is_walkable(nx, ny)) relax(index(nx, ny, h), Action::Forward);
  }
  return std::nullopt;
}

}  // namespace hainav::sim
