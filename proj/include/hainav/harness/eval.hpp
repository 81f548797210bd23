#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hainav/harness/config.hpp"
#include "hainav/harness/trainer.hpp"
#include "hainav/planner/agent.hpp"

namespace hainav::harness {

struct RunRecord {
  int run_id = 0;
  bool success = false;
  int steps_used = 0;
  double final_coverage = 0.0;
  std::vector<double> coverage_by_step;  // [0] = after the initial observation
  int final_nodes = 0;
  // Goal-task extras.
  int steps_to_goal = -1;
  int astar_steps = -1;           // oracle plan length from the start pose
  int discovery_step = -1;        // first step standing in the goal room
  int post_discovery_steps = -1;  // steps from discovery to stepping on the goal
  int post_discovery_astar = -1;  // oracle length from the discovery pose
};

struct EvalOptions {
  sim::MazeConfig maze;  // seed is overridden per run
  int runs = 20;
  int max_steps = 1500;
  uint64_t seed = 0;
  int workers = 2;
  double coverage_target = 0.9;
  std::string out_dir;  // empty: no per-run artifacts
};

// Epistemic-foraging run: no preference; success at coverage_target.
RunRecord run_exploration_once(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model,
                               planner::AgentConfig agent_cfg, const sim::MazeConfig& maze_cfg,
                               uint64_t run_seed, int max_steps, double coverage_target,
                               planner::Agent* agent_out = nullptr);

// Uniform-random baseline over {left, right, forward}.
RunRecord run_random_exploration(const sim::MazeConfig& maze_cfg, uint64_t run_seed,
                                 int max_steps, double coverage_target);

// Scripted oracle sweep: visits every room centre and spins; validates the
// coverage accounting.
RunRecord run_scripted_sweep(const sim::MazeConfig& maze_cfg, uint64_t run_seed,
                             double coverage_target);

// Goal run: preference set to the white tile; success when standing on it.
RunRecord run_goal_once(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model,
                        planner::AgentConfig agent_cfg, const sim::MazeConfig& maze_cfg,
                        uint64_t run_seed, int max_steps);

std::vector<RunRecord> eval_exploration(const ego::EgoModel&, const allo::AlloModel&,
                                        const planner::AgentConfig&, const EvalOptions&);
std::vector<RunRecord> eval_goal(const ego::EgoModel&, const allo::AlloModel&,
                                 const planner::AgentConfig&, const EvalOptions&);

void write_run_csvs(const std::vector<RunRecord>& runs, const std::string& dir,
                    const std::string& kind);

// Unseen-pose reconstruction error as observations accumulate (fresh rooms).
struct MseCurve {
  std::vector<double> mean_mse;  // index k: fused from k observations
  int rooms = 0;
};
MseCurve eval_unseen_pose_mse(const allo::AlloModel& model, int room_width, int n_rooms,
                              int max_obs, uint64_t seed);

}  // namespace hainav::harness
