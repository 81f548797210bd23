#include "hainav/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hainav::harness {

Profile desk_profile() { return Profile{}; }

Profile paper_profile() {
  Profile p;
  p.name = "paper";
  p.room_widths = {4, 5, 6, 7};
  p.envs_per_width = 100;
  p.allo_sequences_per_width = 1000;
  p.ego_sequences_per_width = 100;
  p.ego_train_steps = 20000;
  p.allo_train_steps = 20000;
  p.ego_batch = 16;
  p.allo_batch = 8;
  p.eval_runs = 30;
  return p;
}

Profile profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw std::invalid_argument("unknown profile: " + name);
}

planner::AgentConfig default_agent_config(int room_width) {
  planner::AgentConfig cfg;
  cfg.efe.w_epi = 1.0;
  cfg.efe.w_prag = 1.0;
  cfg.efe.horizon = 3;
  cfg.efe.mc_samples = 5;
  cfg.efe.collision_penalty = 5.0;
  cfg.reset_threshold = 0.05;
  cfg.debounce = 2;
  cfg.room_span = room_width + 2;
  cfg.raster_radius = room_width + 3;
  cfg.recog.gating_radius = 1.5 * (room_width + 2);
  cfg.recog.resolve_debounce = 3;
  cfg.recog.pose_prior_sigma = room_width + 2;
  return cfg;
}

std::string agent_config_to_json(const planner::AgentConfig& cfg) {
  nlohmann::json j;
  j["w_epi"] = cfg.efe.w_epi;
  j["w_prag"] = cfg.efe.w_prag;
  j["H_a"] = cfg.efe.horizon;
  j["mc_samples"] = cfg.efe.mc_samples;
  j["collision_penalty"] = cfg.efe.collision_penalty;
  j["reset_threshold"] = cfg.reset_threshold;
  j["debounce"] = cfg.debounce;
  j["resolve_debounce"] = cfg.recog.resolve_debounce;
  j["gating_radius"] = cfg.recog.gating_radius;
  j["newplace_mse"] = cfg.recog.newplace_mse;
  j["newplace_discount"] = cfg.recog.newplace_discount;
  j["obs_sigma"] = cfg.recog.obs_sigma;
  j["room_span"] = cfg.room_span;
  j["raster_radius"] = cfg.raster_radius;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

void apply_agent_config_json(const std::string& json_text, planner::AgentConfig& cfg) {
  const auto j = nlohmann::json::parse(json_text);
  for (const auto& [key, value] : j.items()) {
    if (key == "w_epi") cfg.efe.w_epi = value.get<double>();
    else if (key == "w_prag") cfg.efe.w_prag = value.get<double>();
    else if (key == "H_a") cfg.efe.horizon = value.get<int>();
    else if (key == "mc_samples") cfg.efe.mc_samples = value.get<int>();
    else if (key == "collision_penalty") cfg.efe.collision_penalty = value.get<double>();
    else if (key == "reset_threshold") cfg.reset_threshold = value.get<double>();
    else if (key == "debounce") cfg.debounce = value.get<int>();
    else if (key == "resolve_debounce") cfg.recog.resolve_debounce = value.get<int>();
    else if (key == "gating_radius") cfg.recog.gating_radius = value.get<double>();
    else if (key == "newplace_mse") cfg.recog.newplace_mse = value.get<double>();
    else if (key == "newplace_discount") cfg.recog.newplace_discount = value.get<double>();
    else if (key == "obs_sigma") cfg.recog.obs_sigma = value.get<double>();
    else if (key == "room_span") cfg.room_span = value.get<int>();
    else if (key == "raster_radius") cfg.raster_radius = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<uint64_t>();
    else throw std::invalid_argument("unknown agent config key: " + key);
  }
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checksum: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hainav::harness
