#pragma once

#include <string>
#include <vector>

#include "hainav/planner/agent.hpp"

namespace hainav::harness {

// Experiment scale. The desk profile fits on a workstation in hours; the paper
// profile reproduces the full dataset sizes.
struct Profile {
  std::string name = "desk";
  std::vector<int> room_widths{4, 5};
  int envs_per_width = 20;
  int maze_rows = 3, maze_cols = 3;

  int allo_sequences_per_width = 200;
  int allo_seq_len = 40;
  int ego_sequences_per_width = 40;
  int ego_seq_len = 400;
  int ego_subseq_len = 20;

  int ego_train_steps = 2600;
  int ego_batch = 8;
  double ego_lr = 3e-4;
  int allo_train_steps = 1200;
  int allo_batch = 4;
  double allo_lr = 2e-4;
  double val_fraction = 0.1;

  int eval_max_steps = 1500;
  int eval_runs = 20;
};

Profile desk_profile();
Profile paper_profile();
Profile profile_by_name(const std::string& name);

planner::AgentConfig default_agent_config(int room_width);

// JSON round-trip for the tunable agent keys; unknown keys are rejected.
std::string agent_config_to_json(const planner::AgentConfig& cfg);
void apply_agent_config_json(const std::string& json_text, planner::AgentConfig& cfg);

// Stable hash of a configuration echo (dataset headers, manifests).
uint64_t fnv1a64(const std::string& text);
uint64_t file_checksum(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace hainav::harness
