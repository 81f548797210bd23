#include "hainav/harness/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "hainav/core/parallel.hpp"
#include "hainav/sim/render.hpp"

namespace hainav::harness {

namespace {

struct CoverageTracker {
  std::set<std::pair<int, int>> observable;
  std::set<std::pair<int, int>> seen;

  explicit CoverageTracker(const sim::Maze& maze) {
    const auto tiles = sim::observable_tiles(maze);
    observable.insert(tiles.begin(), tiles.end());
  }
  void add(const sim::Maze& maze, const sim::Pose& pose, const sim::Observation& obs) {
    for (int wr = 0; wr < sim::kWindowTiles; ++wr)
      for (int wc = 0; wc < sim::kWindowTiles; ++wc) {
        if (!obs.visible(wr, wc)) continue;
        const auto t = sim::window_tile(pose, wr, wc);
        if (maze.in_bounds(t.first, t.second)) seen.insert(t);
      }
  }
  double coverage() const {
    return observable.empty()
               ? 0.0
               : static_cast<double>(seen.size()) / static_cast<double>(observable.size());
  }
};

sim::Pose random_start(const sim::Maze& maze, Rng& rng) {
  const auto floors = maze.floor_tiles();
  while (true) {
    const auto [x, y] = floors[rng.uniform_int(static_cast<int>(floors.size()))];
    if (maze.room_at(x, y) < 0) continue;  // start inside a room, not an aisle
    if (maze.tile(x, y).kind == sim::TileKind::White) continue;
    return sim::Pose{x, y, static_cast<sim::Heading>(rng.uniform_int(4))};
  }
}

}  // namespace

RunRecord run_exploration_once(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model,
                               planner::AgentConfig agent_cfg, const sim::MazeConfig& maze_cfg,
                               uint64_t run_seed, int max_steps, double coverage_target,
                               planner::Agent* agent_out) {
  sim::MazeConfig mc = maze_cfg;
  mc.seed = run_seed;
  sim::Maze maze = sim::Maze::generate(mc);
  Rng rng(mix_seed(run_seed, 0x5EED));
  sim::Pose pose = random_start(maze, rng);

  agent_cfg.seed = mix_seed(run_seed, 0xA6E7);
  planner::Agent agent(ego_model, allo_model, agent_cfg);

  CoverageTracker cov(maze);
  sim::Observation obs = sim::render(maze, pose);
  cov.add(maze, pose, obs);
  agent.begin(obs);

  RunRecord rec;
  rec.coverage_by_step.push_back(cov.coverage());
  for (int t = 1; t <= max_steps; ++t) {
    const sim::Action a = agent.act();
    const auto out = maze.step(pose, a);
    pose = out.next_pose;
    obs = sim::render(maze, pose);
    cov.add(maze, pose, obs);
    agent.observe(a, obs, out.collision);
    rec.coverage_by_step.push_back(cov.coverage());
    rec.steps_used = t;
    if (cov.coverage() >= coverage_target) {
      rec.success = true;
      break;
    }
  }
  rec.final_coverage = cov.coverage();
  rec.final_nodes = agent.graph().size();
  if (agent_out) *agent_out = agent;
  return rec;
}

RunRecord run_random_exploration(const sim::MazeConfig& maze_cfg, uint64_t run_seed,
                                 int max_steps, double coverage_target) {
  sim::MazeConfig mc = maze_cfg;
  mc.seed = run_seed;
  sim::Maze maze = sim::Maze::generate(mc);
  Rng rng(mix_seed(run_seed, 0x5EED));
  sim::Pose pose = random_start(maze, rng);
  Rng policy(mix_seed(run_seed, 0xBA5E));

  CoverageTracker cov(maze);
  cov.add(maze, pose, sim::render(maze, pose));
  RunRecord rec;
  rec.coverage_by_step.push_back(cov.coverage());
  for (int t = 1; t <= max_steps; ++t) {
    const int r = policy.uniform_int(3);
    const sim::Action a = r == 0   ? sim::Action::Left
                          : r == 1 ? sim::Action::Right
                                   : sim::Action::Forward;
    const auto out = maze.step(pose, a);
    pose = out.next_pose;
    cov.add(maze, pose, sim::render(maze, pose));
    rec.coverage_by_step.push_back(cov.coverage());
    rec.steps_used = t;
    if (cov.coverage() >= coverage_target) {
      rec.success = true;
      break;
    }
  }
  rec.final_coverage = cov.coverage();
  return rec;
}

RunRecord run_scripted_sweep(const sim::MazeConfig& maze_cfg, uint64_t run_seed,
                             double coverage_target) {
  sim::MazeConfig mc = maze_cfg;
  mc.seed = run_seed;
  sim::Maze maze = sim::Maze::generate(mc);
  Rng rng(mix_seed(run_seed, 0x5EED));
  sim::Pose pose = random_start(maze, rng);

  CoverageTracker cov(maze);
  cov.add(maze, pose, sim::render(maze, pose));
  RunRecord rec;
  rec.coverage_by_step.push_back(cov.coverage());

  auto play = [&](sim::Action a) {
    const auto out = maze.step(pose, a);
    pose = out.next_pose;
    cov.add(maze, pose, sim::render(maze, pose));
    rec.coverage_by_step.push_back(cov.coverage());
    ++rec.steps_used;
  };

  // Visit every room centre (breadth-first over the aisle graph) and spin.
  std::vector<int> room_order;
  std::vector<bool> seen_room(maze.num_rooms(), false);
  std::vector<int> queue{maze.room_at(pose.x, pose.y)};
  seen_room[queue[0]] = true;
  while (!queue.empty()) {
    const int r = queue.front();
    queue.erase(queue.begin());
    room_order.push_back(r);
    for (const auto& [a, b] : maze.aisle_pairs()) {
      const int other = a == r ? b : (b == r ? a : -1);
      if (other >= 0 && !seen_room[other]) {
        seen_room[other] = true;
        queue.push_back(other);
      }
    }
  }
  for (int room : room_order) {
    const auto path = sim::astar_path(maze, pose, maze.room_center(room));
    if (!path) continue;
    for (const sim::Action a : *path) play(a);
    for (int k = 0; k < 4; ++k) play(sim::Action::Left);
  }
  rec.final_coverage = cov.coverage();
  rec.success = rec.final_coverage >= coverage_target;
  return rec;
}

RunRecord run_goal_once(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model,
                        planner::AgentConfig agent_cfg, const sim::MazeConfig& maze_cfg,
                        uint64_t run_seed, int max_steps) {
  sim::MazeConfig mc = maze_cfg;
  mc.seed = run_seed;
  mc.place_white_tile = true;
  sim::Maze maze = sim::Maze::generate(mc);
  if (!maze.white_tile()) throw std::runtime_error("goal eval: maze has no white tile");
  const auto [wx, wy] = *maze.white_tile();
  const int goal_room = maze.room_at(wx, wy);

  Rng rng(mix_seed(run_seed, 0x5EED));
  sim::Pose pose = random_start(maze, rng);

  agent_cfg.seed = mix_seed(run_seed, 0xA6E7);
  planner::Agent agent(ego_model, allo_model, agent_cfg);
  planner::Preference pref;
  pref.patch_rgb = {{1.0, 1.0, 1.0}};
  agent.set_preference(pref);

  RunRecord rec;
  {
    const auto oracle = sim::astar_path(maze, pose, {wx, wy});
    rec.astar_steps = oracle ? static_cast<int>(oracle->size()) : -1;
  }
  (void)goal_room;

  // Discovery: the first step at which the white tile is actually visible;
  // from then on the goal's location is part of the agent's map knowledge.
  auto white_visible = [&](const sim::Observation& o) {
    for (int wr = 0; wr < sim::kWindowTiles; ++wr)
      for (int wc = 0; wc < sim::kWindowTiles; ++wc)
        if (o.visible(wr, wc) && sim::window_tile(pose, wr, wc) == std::pair<int, int>{wx, wy})
          return true;
    return false;
  };
  auto mark_discovery = [&](int t) {
    if (rec.discovery_step >= 0) return;
    rec.discovery_step = t;
    const auto o2 = sim::astar_path(maze, pose, {wx, wy});
    rec.post_discovery_astar = o2 ? static_cast<int>(o2->size()) : -1;
  };

  sim::Observation obs = sim::render(maze, pose);
  agent.begin(obs);
  if (white_visible(obs)) mark_discovery(0);
  if (pose.x == wx && pose.y == wy) {  // started on the goal
    rec.success = true;
    rec.steps_to_goal = 0;
    return rec;
  }

  for (int t = 1; t <= max_steps; ++t) {
    const sim::Action a = agent.act();
    const auto out = maze.step(pose, a);
    pose = out.next_pose;
    obs = sim::render(maze, pose);
    agent.observe(a, obs, out.collision);
    rec.steps_used = t;
    if (white_visible(obs)) mark_discovery(t);
    if (out.on_white) {
      rec.success = true;
      rec.steps_to_goal = t;
      if (rec.discovery_step >= 0) rec.post_discovery_steps = t - rec.discovery_step;
      break;
    }
  }
  rec.final_nodes = agent.graph().size();
  return rec;
}

std::vector<RunRecord> eval_exploration(const ego::EgoModel& ego_model,
                                        const allo::AlloModel& allo_model,
                                        const planner::AgentConfig& agent_cfg,
                                        const EvalOptions& opts) {
  std::vector<RunRecord> runs(opts.runs);
  parallel_for(opts.runs, opts.workers, [&](int i) {
    runs[i] = run_exploration_once(ego_model, allo_model, agent_cfg, opts.maze,
                                   mix_seed(opts.seed, 100 + i), opts.max_steps,
                                   opts.coverage_target);
    runs[i].run_id = i;
  });
  if (!opts.out_dir.empty()) write_run_csvs(runs, opts.out_dir, "explore");
  return runs;
}

std::vector<RunRecord> eval_goal(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model,
                                 const planner::AgentConfig& agent_cfg, const EvalOptions& opts) {
  std::vector<RunRecord> runs(opts.runs);
  parallel_for(opts.runs, opts.workers, [&](int i) {
    runs[i] = run_goal_once(ego_model, allo_model, agent_cfg, opts.maze,
                            mix_seed(opts.seed, 100 + i), opts.max_steps);
    runs[i].run_id = i;
  });
  if (!opts.out_dir.empty()) write_run_csvs(runs, opts.out_dir, "goal");
  return runs;
}

void write_run_csvs(const std::vector<RunRecord>& runs, const std::string& dir,
                    const std::string& kind) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream sum(dir + "/summary.csv");
    sum << "run_id,success,steps,final_coverage,nodes,steps_to_goal,astar_steps,"
           "discovery_step,post_discovery_steps,post_discovery_astar\n";
    for (const RunRecord& r : runs)
      sum << r.run_id << ',' << (r.success ? 1 : 0) << ',' << r.steps_used << ','
          << r.final_coverage << ',' << r.final_nodes << ',' << r.steps_to_goal << ','
          << r.astar_steps << ',' << r.discovery_step << ',' << r.post_discovery_steps << ','
          << r.post_discovery_astar << '\n';
  }
  if (kind == "explore") {
    for (const RunRecord& r : runs) {
      std::ofstream out(dir + "/run_" + std::to_string(r.run_id) + ".csv");
      out << "run_id,step,coverage,success\n";
      double cov = 0.0;
      for (size_t t = 0; t < r.coverage_by_step.size(); ++t) {
        cov = r.coverage_by_step[t];
        out << r.run_id << ',' << t << ',' << cov << ',' << (r.success ? 1 : 0) << '\n';
      }
    }
  }
}

MseCurve eval_unseen_pose_mse(const allo::AlloModel& model, int room_width, int n_rooms,
                              int max_obs, uint64_t seed) {
  MseCurve curve;
  curve.mean_mse.assign(max_obs + 1, 0.0);
  std::vector<int> counts(max_obs + 1, 0);

  for (int room = 0; room < n_rooms; ++room) {
    sim::MazeConfig mc;
    mc.rows = 1;
    mc.cols = 2;  // a room plus a neighbour so a door is present
    mc.room_width = room_width;
    mc.seed = mix_seed(seed, 0xF00D, room);
    mc.place_white_tile = true;
    sim::Maze maze = sim::Maze::generate(mc);

    Rng rng(mix_seed(seed, 0xFACE, room));
    const auto floors = maze.floor_tiles();
    sim::Pose start{0, 0, sim::Heading::N};
    while (true) {
      const auto [x, y] = floors[rng.uniform_int(static_cast<int>(floors.size()))];
      if (maze.room_at(x, y) >= 0) {
        start = sim::Pose{x, y, static_cast<sim::Heading>(rng.uniform_int(4))};
        break;
      }
    }
    // Walk confined to the room (same protocol as the dataset).
    const int room_id = maze.room_at(start.x, start.y);
    sim::Pose pose = start;
    sim::Pose local{0, 0, sim::Heading::N};
    allo::AlloSequence seq;
    for (int t = 0; t < 40; ++t) {
      if (t > 0) {
        const int r = rng.uniform_int(3);
        sim::Action a = r == 0   ? sim::Action::Left
                        : r == 1 ? sim::Action::Right
                                 : sim::Action::Forward;
        if (a == sim::Action::Forward) {
          const int nx = pose.x + sim::heading_dx(pose.heading);
          const int ny = pose.y + sim::heading_dy(pose.heading);
          if (maze.room_at(nx, ny) != room_id)
            a = rng.uniform_int(2) == 0 ? sim::Action::Left : sim::Action::Right;
        }
        const auto out = maze.step(pose, a);
        pose = out.next_pose;
        switch (a) {
          case sim::Action::Left: local.heading = sim::turn_left(local.heading); break;
          case sim::Action::Right: local.heading = sim::turn_right(local.heading); break;
          case sim::Action::Forward:
            if (!out.collision) {
              local.x += sim::heading_dx(local.heading);
              local.y += sim::heading_dy(local.heading);
            }
            break;
          default: break;
        }
      }
      const auto obs = sim::render(maze, pose);
      allo::AlloStep step;
      step.obs = obs.pixels;
      step.pixmask = allo::pixel_mask(obs.mask);
      step.pose = allo::LocalPose{local.x, local.y, local.heading};
      seq.push_back(std::move(step));
    }

    // Fuse k observations, evaluate on poses not yet visited.
    std::vector<GaussianBelief> beliefs;
    for (int k = 0; k <= max_obs && k < static_cast<int>(seq.size()); ++k) {
      if (k > 0) beliefs.push_back(model.encode(seq[k - 1].obs, seq[k - 1].pose));
      const GaussianBelief z =
          k == 0 ? GaussianBelief::standard(model.config().z_dim) : fuse(beliefs);
      std::set<std::tuple<int, int, int>> visited;
      for (int t = 0; t < k; ++t)
        visited.insert({seq[t].pose.x, seq[t].pose.y, static_cast<int>(seq[t].pose.heading)});
      double err = 0.0;
      int n = 0;
      for (size_t t = k; t < seq.size(); ++t) {
        if (visited.count(
                {seq[t].pose.x, seq[t].pose.y, static_cast<int>(seq[t].pose.heading)}))
          continue;
        err += model.prediction_error(z, seq[t].obs, seq[t].pixmask, seq[t].pose);
        ++n;
      }
      if (n > 0) {
        curve.mean_mse[k] += err / n;
        counts[k] += 1;
      }
    }
  }
  for (size_t k = 0; k < curve.mean_mse.size(); ++k)
    if (counts[k] > 0) curve.mean_mse[k] /= counts[k];
  curve.rooms = n_rooms;
  return curve;
}

}  // namespace hainav::harness
