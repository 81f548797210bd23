#include "hainav/planner/agent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace hainav::planner {

using allo::LocalPose;
using cogmap::TileClass;
using sim::Action;
using sim::Heading;
using sim::Pose;

Agent::Agent(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model, AgentConfig cfg)
    : ego_(&ego_model),
      allo_(&allo_model),
      seq_model_(ego_model),
      place_decoder_(allo_model),
      cfg_(cfg),
      can_(cogmap::CanConfig{.radius = cfg.can_radius}),
      detector_(cfg.reset_threshold, cfg.debounce) {}

LocalPose Agent::to_local(const Pose& global) const {
  return {global.x - anchor_.x, global.y - anchor_.y, global.heading};
}

void Agent::begin(const sim::Observation& obs) {
  can_.reset(Pose{0, 0, Heading::N});
  ego_state_ = ego_->observe(ego_->initial_state(), Action::StandBy, obs.pixels);
  const Pose global = can_.decode();
  last_pose_ = global;

  for (int wr = 0; wr < sim::kWindowTiles; ++wr)
    for (int wc = 0; wc < sim::kWindowTiles; ++wc)
      if (obs.visible(wr, wc)) seen_tiles_.insert(sim::window_tile(global, wr, wc));

  start_recognition(global);
  update_recognition(obs, global);
}

void Agent::start_recognition(const Pose& entry_pose) {
  phase_ = Phase::Recognizing;
  evidence_.clear();
  entry_pose_ = entry_pose;
  door_tile_ = {entry_pose.x, entry_pose.y};
  prev_node_ = current_node_ >= 0 ? std::optional<int>(current_node_) : std::nullopt;
  last_argmax_ = -2;
  argmax_streak_ = 0;
}

void Agent::update_recognition(const sim::Observation& obs, const Pose& global) {
  cogmap::Evidence ev;
  ev.obs = obs.pixels;
  ev.pixmask = allo::pixel_mask(obs.mask);
  ev.global_pose = global;
  evidence_.push_back(std::move(ev));

  const auto hyp = cogmap::recognize(graph_, place_decoder_, global, evidence_, cfg_.recog);

  HypothesisTraceRow row;
  row.step = step_count_;
  row.n_hypotheses = static_cast<int>(hyp.size());
  row.new_place_prob = hyp.new_place_prob();
  for (const auto& h : hyp.hypotheses)
    if (h.node_id >= 0) row.node_probs.emplace_back(h.node_id, h.prob);
  trace_.push_back(row);

  const int argmax = hyp.argmax_node();
  argmax_streak_ = argmax == last_argmax_ ? argmax_streak_ + 1 : 1;
  last_argmax_ = argmax;

  const bool unambiguous = hyp.size() == 1;
  const bool stable = argmax_streak_ >= cfg_.recog.resolve_debounce;
  const bool exhausted = static_cast<int>(evidence_.size()) >= cfg_.max_recognition_evidence;
  if (unambiguous || stable || exhausted) finish_recognition(argmax);
}

void Agent::finish_recognition(int chosen_node) {
  const Pose anchor = chosen_node >= 0 ? graph_.node(chosen_node).anchor : entry_pose_;
  std::vector<GaussianBelief> beliefs;
  beliefs.reserve(evidence_.size());
  for (const cogmap::Evidence& ev : evidence_) {
    const LocalPose local{ev.global_pose.x - anchor.x, ev.global_pose.y - anchor.y,
                          ev.global_pose.heading};
    beliefs.push_back(allo_->encode(ev.obs, local));
  }

  cogmap::ResolvedOutcome outcome;
  outcome.node_id = chosen_node;
  outcome.anchor = anchor;
  outcome.place = fuse(beliefs);
  outcome.prev_node = prev_node_;
  outcome.door_tile = door_tile_;
  current_node_ = cogmap::update_graph(graph_, outcome);

  anchor_ = graph_.node(current_node_).anchor;
  place_ = graph_.node(current_node_).place;
  phase_ = Phase::InPlace;
  detector_.reset();
  trace_.back().resolved_node = current_node_;

  if (static_cast<int>(node_fusions_.size()) < graph_.size())
    node_fusions_.resize(graph_.size(), 0);
  node_fusions_[current_node_] += static_cast<int>(evidence_.size());
  fusions_in_place_ = node_fusions_[current_node_];
  fused_poses_.clear();
  for (const cogmap::Evidence& ev : evidence_)
    fused_poses_.insert({ev.global_pose.x - anchor_.x, ev.global_pose.y - anchor_.y,
                         static_cast<int>(ev.global_pose.heading)});
  recent_.clear();
  evidence_.clear();

  if (static_cast<int>(rasters_.size()) < graph_.size()) {
    rasters_.resize(graph_.size());
    raster_age_.resize(graph_.size(), -1);
  }
  rasters_[current_node_].reset();  // place belief changed
  fusions_since_raster_ = 0;
  top_dirty_ = true;
  waypoints_.clear();
  waypoint_idx_ = 0;
}

void Agent::update_in_place(const sim::Observation& obs, const Pose& global) {
  const LocalPose local = to_local(global);
  const auto pixmask = allo::pixel_mask(obs.mask);
  last_error_ = allo_->prediction_error(place_, obs.pixels, pixmask, local);

  recent_.push_back({obs.pixels, pixmask, global});
  while (static_cast<int>(recent_.size()) > std::max(1, cfg_.debounce)) recent_.pop_front();

  // A freshly entered place predicts poorly until a few views are fused in;
  // tolerate larger errors until then.
  double slack = 1.0;
  if (fusions_in_place_ < 3) slack = 3.0;
  else if (fusions_in_place_ < 6) slack = 2.0;
  else if (fusions_in_place_ < 10) slack = 1.25;

  if (detector_.update(last_error_ / slack)) {
    ++transition_count_;
    // The high-error window belongs to the next place; reuse it as evidence.
    const auto window = recent_;
    start_recognition(window.front().global_pose);
    evidence_.assign(window.begin(), window.end() - 1);
    update_recognition(obs, global);
    return;
  }
  if (last_error_ <= cfg_.reset_threshold * slack) {
    // Within-place evidence sharpens the room code; each pose counts once.
    const auto key = std::make_tuple(local.x, local.y, static_cast<int>(local.heading));
    if (fused_poses_.insert(key).second) {
      place_ = fuse({place_, allo_->encode(obs.pixels, local)});
      graph_.node(current_node_).place = place_;
      ++fusions_since_raster_;
      ++fusions_in_place_;
      node_fusions_[current_node_] = fusions_in_place_;
    }
  }
}

void Agent::observe(Action executed, const sim::Observation& obs, bool collided) {
  ++step_count_;
  ++steps_since_mid_;
  can_.integrate(executed, collided);
  const Pose global = can_.decode();
  ego_state_ = ego_->observe(ego_state_, executed, obs.pixels);

  for (int wr = 0; wr < sim::kWindowTiles; ++wr)
    for (int wc = 0; wc < sim::kWindowTiles; ++wc) {
      if (!obs.visible(wr, wc)) continue;
      const auto tile = sim::window_tile(global, wr, wc);
      seen_tiles_.insert(tile);
      // Remember the goal tile whenever it comes into view.
      if (!white_tile_seen_ || !(wr == sim::kAgentRow && wc == sim::kAgentCol)) {
        std::array<double, 3> rgb{0, 0, 0};
        int n = 0;
        for (int py = 1; py < sim::kTilePixels - 1; ++py)
          for (int px = 1; px < sim::kTilePixels - 1; ++px) {
            for (int c = 0; c < 3; ++c)
              rgb[c] += obs.pixels[(static_cast<size_t>(c) * sim::kImageSize +
                                    wr * sim::kTilePixels + py) *
                                       sim::kImageSize +
                                   wc * sim::kTilePixels + px];
            ++n;
          }
        for (int c = 0; c < 3; ++c) rgb[c] /= n;
        if (cogmap::classify_patch_rgb(rgb).cls == TileClass::White) white_tile_seen_ = tile;
      }
    }

  if (executed == Action::Forward && collided) {
    const std::pair<int, int> ahead{last_pose_.x + sim::heading_dx(last_pose_.heading),
                                    last_pose_.y + sim::heading_dy(last_pose_.heading)};
    blocked_tiles_.insert(ahead);
    ++stuck_counter_;
    if (stuck_counter_ >= 3) {
      waypoints_.clear();  // force a mid-level replan away from the obstruction
      stuck_counter_ = 0;
    }
  } else {
    stuck_counter_ = 0;
  }
  last_pose_ = global;

  if (phase_ == Phase::Recognizing)
    update_recognition(obs, global);
  else
    update_in_place(obs, global);
}

void Agent::refresh_raster(int node) {
  // Classify tiles from a handful of decoded views instead of one decode per
  // tile; each view covers its visible window.
  const GaussianBelief& place = graph_.node(node).place;
  const int R = cfg_.raster_radius;
  cogmap::RoomRaster raster;
  raster.radius = R;
  raster.tiles.assign((2 * R + 1) * (2 * R + 1), cogmap::TileGuess{});

  static constexpr int kOffsets[5][2] = {{0, 0}, {-3, 0}, {3, 0}, {0, -3}, {0, 3}};
  for (const auto& off : kOffsets)
    for (int h = 0; h < 4; ++h) {
      const LocalPose q{off[0], off[1], static_cast<Heading>(h)};
      const auto img = place_decoder_.decode_mean(place, q);
      const Pose qpose{q.x, q.y, q.heading};
      for (int wr = 0; wr < sim::kWindowTiles; ++wr)
        for (int wc = 0; wc < sim::kWindowTiles; ++wc) {
          const auto [tx, ty] = sim::window_tile(qpose, wr, wc);
          if (std::abs(tx) > R || std::abs(ty) > R) continue;
          std::array<double, 3> rgb{0, 0, 0};
          int n = 0;
          for (int py = 1; py < sim::kTilePixels - 1; ++py)
            for (int px = 1; px < sim::kTilePixels - 1; ++px) {
              for (int c = 0; c < 3; ++c)
                rgb[c] += img[(static_cast<size_t>(c) * sim::kImageSize +
                               wr * sim::kTilePixels + py) *
                                  sim::kImageSize +
                              wc * sim::kTilePixels + px];
              ++n;
            }
          for (int c = 0; c < 3; ++c) rgb[c] /= n;
          auto guess = cogmap::classify_patch_rgb(rgb);
          if (wr == sim::kAgentRow && wc == sim::kAgentCol) continue;  // marker tile
          cogmap::TileGuess& slot = raster.at(tx, ty);
          const bool informative = guess.cls != TileClass::Unknown;
          const bool slot_empty = slot.confidence == 0.0 || slot.cls == TileClass::Unknown;
          if ((informative && (slot_empty || guess.confidence > slot.confidence)) ||
              (!informative && slot.confidence == 0.0))
            slot = guess;
        }
    }
  rasters_[node] = std::move(raster);
  raster_age_[node] = step_count_;
  if (node == current_node_) fusions_since_raster_ = 0;
}

const cogmap::RoomRaster* Agent::raster_of(int node) {
  if (node < 0 || node >= graph_.size()) return nullptr;
  if (static_cast<int>(rasters_.size()) < graph_.size()) {
    rasters_.resize(graph_.size());
    raster_age_.resize(graph_.size(), -1);
  }
  const bool stale =
      node == current_node_ && fusions_since_raster_ >= cfg_.raster_refresh_fusions;
  if (!rasters_[node] || stale) refresh_raster(node);
  return &*rasters_[node];
}

std::vector<std::pair<int, int>> Agent::frontier_doors(int node) {
  const cogmap::RoomRaster* raster = raster_of(node);
  std::vector<std::pair<int, int>> out;
  if (!raster) return out;
  const Pose anchor = graph_.node(node).anchor;
  for (const auto& [dx, dy] : raster->door_offsets()) {
    const std::pair<int, int> door{anchor.x + dx, anchor.y + dy};
    if (blocked_tiles_.count(door)) continue;
    bool covered = false;
    for (const auto& e : graph_.edges()) {
      if (e.from != node && e.to != node) continue;
      const int d = std::abs(e.door_x - door.first) + std::abs(e.door_y - door.second);
      if (d <= 2) covered = true;
    }
    if (!covered) out.push_back(door);
  }
  return out;
}

NodeGoalInfo Agent::node_info(int node) {
  NodeGoalInfo info;
  const auto& place = graph_.node(node).place;
  double s = 0.0;
  for (double v : place.std) s += v;
  info.epistemic = s / static_cast<double>(place.std.size());
  info.open_frontiers = static_cast<int>(frontier_doors(node).size());

  if (pref_.patch_rgb) {
    info.pref_match = 0.0;
    const cogmap::RoomRaster* raster = raster_of(node);
    if (raster) {
      for (const auto& g : raster->tiles)
        if (g.cls == TileClass::White) info.pref_match = std::max(info.pref_match, g.confidence);
    }
    if (white_tile_seen_) {
      const Pose anchor = graph_.node(node).anchor;
      const int d = std::max(std::abs(white_tile_seen_->first - anchor.x),
                             std::abs(white_tile_seen_->second - anchor.y));
      if (d <= cfg_.raster_radius) info.pref_match = std::max(info.pref_match, 0.95);
    }
  }
  return info;
}

void Agent::replan_top() {
  std::vector<NodeGoalInfo> infos;
  infos.reserve(graph_.size());
  for (int id = 0; id < graph_.size(); ++id) infos.push_back(node_info(id));
  node_path_ = efe_location(graph_, infos, current_node_, pref_, cfg_.efe);
  top_dirty_ = false;
  waypoints_.clear();
  waypoint_idx_ = 0;
}

std::vector<LocalPose> Agent::bfs_waypoints(const LocalPose& from,
                                            std::pair<int, int> target_tile, int node) {
  const cogmap::RoomRaster* raster = raster_of(node);
  const Pose anchor = graph_.node(node).anchor;
  const int R = raster ? raster->radius : 0;

  auto walkable = [&](int x, int y) {
    if (blocked_tiles_.count({anchor.x + x, anchor.y + y})) return false;
    if (x == from.x && y == from.y) return true;
    if (x == target_tile.first && y == target_tile.second) return true;
    if (!raster || std::abs(x) > R || std::abs(y) > R) return false;
    const TileClass c = raster->at(x, y).cls;
    return c == TileClass::Floor || c == TileClass::White || c == TileClass::Corridor ||
           c == TileClass::Door;
  };

  // 4-neighbour BFS over the decoded floor plan.
  std::map<std::pair<int, int>, std::pair<int, int>> parent;
  std::deque<std::pair<int, int>> q;
  const std::pair<int, int> src{from.x, from.y};
  q.push_back(src);
  parent[src] = src;
  bool found = src == target_tile;
  while (!q.empty() && !found) {
    const auto [cx, cy] = q.front();
    q.pop_front();
    for (int h = 0; h < 4; ++h) {
      const int nx = cx + sim::heading_dx(static_cast<Heading>(h));
      const int ny = cy + sim::heading_dy(static_cast<Heading>(h));
      if (parent.count({nx, ny}) || !walkable(nx, ny)) continue;
      parent[{nx, ny}] = {cx, cy};
      if (nx == target_tile.first && ny == target_tile.second) {
        found = true;
        break;
      }
      q.push_back({nx, ny});
    }
  }

  std::vector<LocalPose> out;
  if (!found) {
    out.push_back({target_tile.first, target_tile.second, from.heading});
    return out;
  }
  std::vector<std::pair<int, int>> tiles{target_tile};
  while (tiles.back() != src) tiles.push_back(parent[tiles.back()]);
  std::reverse(tiles.begin(), tiles.end());
  for (size_t i = 1; i < tiles.size(); ++i) {
    const int dx = tiles[i].first - tiles[i - 1].first;
    const int dy = tiles[i].second - tiles[i - 1].second;
    Heading h = from.heading;
    if (dx == 1) h = Heading::E;
    else if (dx == -1) h = Heading::W;
    else if (dy == 1) h = Heading::S;
    else if (dy == -1) h = Heading::N;
    out.push_back({tiles[i].first, tiles[i].second, h});
  }
  if (out.empty()) out.push_back({target_tile.first, target_tile.second, from.heading});
  return out;
}

bool Agent::waypoint_reached() const {
  if (waypoint_idx_ >= waypoints_.size()) return true;
  const LocalPose cur = to_local(can_.decode());
  const LocalPose& wp = waypoints_[waypoint_idx_];
  if (cur.x != wp.x || cur.y != wp.y) return false;
  // Final waypoint also requires the heading (it encodes where to look).
  if (waypoint_idx_ + 1 == waypoints_.size()) return cur.heading == wp.heading;
  return true;
}

void Agent::replan_mid() {
  steps_since_mid_ = 0;
  waypoints_.clear();
  waypoint_idx_ = 0;
  const Pose global = can_.decode();
  const LocalPose cur = to_local(global);
  const cogmap::RoomRaster* raster = raster_of(current_node_);
  if (!raster) return;
  const Pose anchor = graph_.node(current_node_).anchor;

  // Heading toward the next place: walk to the connecting door and through it.
  if (node_path_.node_path.size() >= 2) {
    const int next = node_path_.node_path[1];
    std::pair<int, int> door{0, 0};
    bool have_door = false;
    for (const auto& e : graph_.edges())
      if ((e.from == current_node_ && e.to == next) ||
          (e.to == current_node_ && e.from == next)) {
        door = {e.door_x, e.door_y};
        have_door = true;
      }
    if (have_door) {
      const std::pair<int, int> local_door{door.first - anchor.x, door.second - anchor.y};
      waypoints_ = bfs_waypoints(cur, local_door, current_node_);
      // One step beyond the door, toward the next room's anchor.
      const Pose na = graph_.node(next).anchor;
      const int bx = na.x - door.first, by = na.y - door.second;
      int sx = 0, sy = 0;
      if (std::abs(bx) >= std::abs(by)) sx = bx > 0 ? 1 : (bx < 0 ? -1 : 0);
      else sy = by > 0 ? 1 : (by < 0 ? -1 : 0);
      if (sx != 0 || sy != 0) {
        Heading h = sx == 1 ? Heading::E : sx == -1 ? Heading::W : (sy == 1 ? Heading::S : Heading::N);
        waypoints_.push_back({local_door.first + sx, local_door.second + sy, h});
      }
      return;
    }
  }

  // Frontier of the current place: head through an unexplored door.
  const auto frontiers = frontier_doors(current_node_);

  // Goal mode: if the white tile is localized in this room, walk onto it.
  if (pref_.patch_rgb) {
    std::optional<std::pair<int, int>> white_local;
    if (white_tile_seen_) {
      const int d = std::max(std::abs(white_tile_seen_->first - anchor.x),
                             std::abs(white_tile_seen_->second - anchor.y));
      if (d <= raster->radius)
        white_local = {white_tile_seen_->first - anchor.x, white_tile_seen_->second - anchor.y};
    }
    if (!white_local) {
      double best_conf = 0.3;
      for (int dy = -raster->radius; dy <= raster->radius; ++dy)
        for (int dx = -raster->radius; dx <= raster->radius; ++dx)
          if (raster->at(dx, dy).cls == TileClass::White &&
              raster->at(dx, dy).confidence > best_conf) {
            best_conf = raster->at(dx, dy).confidence;
            white_local = {dx, dy};
          }
    }
    if (white_local) {
      std::vector<LocalPose> candidates;
      for (int h = 0; h < 4; ++h)
        candidates.push_back({white_local->first, white_local->second, static_cast<Heading>(h)});
      const auto ranked = efe_pose(place_decoder_, place_, candidates, pref_, cur, cfg_.efe,
                                   mix_seed(cfg_.seed, step_count_, 77));
      waypoints_ = bfs_waypoints(cur, *white_local, current_node_);
      if (!waypoints_.empty()) waypoints_.back().heading = ranked.front().first.heading;
      return;
    }
  }

  if (node_path_.node_path.size() <= 1) {
    if (!frontiers.empty()) {
      // Nearest open door first.
      std::pair<int, int> best = frontiers[0];
      int best_d = std::numeric_limits<int>::max();
      for (const auto& f : frontiers) {
        const int d = std::abs(f.first - global.x) + std::abs(f.second - global.y);
        if (d < best_d) {
          best_d = d;
          best = f;
        }
      }
      const std::pair<int, int> local_door{best.first - anchor.x, best.second - anchor.y};
      waypoints_ = bfs_waypoints(cur, local_door, current_node_);
      // Step through the frontier: continue along the door's outward axis.
      if (!waypoints_.empty()) {
        const LocalPose& last = waypoints_.back();
        const int sx = sim::heading_dx(last.heading), sy = sim::heading_dy(last.heading);
        waypoints_.push_back({last.x + sx, last.y + sy, last.heading});
      }
      return;
    }

    // Otherwise pick an in-room pose by expected information gain.
    std::vector<std::pair<int, int>> tiles = raster->walkable_offsets();
    std::vector<std::pair<double, std::pair<int, int>>> weighted;
    for (const auto& [dx, dy] : tiles) {
      if (blocked_tiles_.count({anchor.x + dx, anchor.y + dy})) continue;
      if (raster->at(dx, dy).cls == TileClass::Door) continue;
      int unseen = 0;
      for (int oy = -3; oy <= 3; ++oy)
        for (int ox = -3; ox <= 3; ++ox)
          if (!seen_tiles_.count({anchor.x + dx + ox, anchor.y + dy + oy})) ++unseen;
      weighted.push_back({-static_cast<double>(unseen), {dx, dy}});
    }
    if (weighted.empty()) return;
    std::stable_sort(weighted.begin(), weighted.end());
    std::vector<LocalPose> candidates;
    const size_t top = std::min<size_t>(6, weighted.size());
    for (size_t i = 0; i < top; ++i)
      for (int h = 0; h < 4; ++h)
        candidates.push_back(
            {weighted[i].second.first, weighted[i].second.second, static_cast<Heading>(h)});
    const auto ranked = efe_pose(place_decoder_, place_, candidates, pref_, cur, cfg_.efe,
                                 mix_seed(cfg_.seed, step_count_, 13));
    const LocalPose target = ranked.front().first;
    waypoints_ = bfs_waypoints(cur, {target.x, target.y}, current_node_);
    if (!waypoints_.empty()) waypoints_.back().heading = target.heading;
    else waypoints_.push_back(target);
  }
}

sim::Action Agent::act() {
  const uint64_t seed = mix_seed(cfg_.seed, static_cast<uint64_t>(step_count_));

  if (phase_ == Phase::Recognizing) {
    // Between places: keep moving on epistemic value alone.
    StepGuidance guidance;
    return best_action(seq_model_, ego_state_, guidance, cfg_.efe, seed).first;
  }

  if (top_dirty_ || (node_path_.node_path.empty() && !node_path_.stand_by)) replan_top();
  if (node_path_.stand_by && waypoints_.empty()) {
    // Nothing left to learn; without a preference there is nothing to do.
    if (pref_.empty()) return Action::StandBy;
  }

  while (waypoint_idx_ < waypoints_.size() && waypoint_reached()) ++waypoint_idx_;
  if (waypoint_idx_ >= waypoints_.size() || steps_since_mid_ >= cfg_.mid_replan_period) {
    replan_mid();
    while (waypoint_idx_ < waypoints_.size() && waypoint_reached()) ++waypoint_idx_;
  }

  StepGuidance guidance;
  guidance.goal = pref_;
  if (waypoint_idx_ < waypoints_.size())
    guidance.waypoint_images.push_back(
        place_decoder_.decode_mean(place_, waypoints_[waypoint_idx_]));
  const auto [action, score] = best_action(seq_model_, ego_state_, guidance, cfg_.efe, seed);
  return action;
}

}  // namespace hainav::planner
