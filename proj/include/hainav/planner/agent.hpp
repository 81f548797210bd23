#pragma once

#include <deque>
#include <optional>
#include <set>
#include <vector>

#include "hainav/allo/model.hpp"
#include "hainav/cogmap/pose_can.hpp"
#include "hainav/cogmap/stitch.hpp"
#include "hainav/ego/model.hpp"
#include "hainav/planner/efe.hpp"

namespace hainav::planner {

struct AgentConfig {
  EfeConfig efe;
  double reset_threshold = 0.05;  // place-prediction error that signals a transition
  int debounce = 2;               // consecutive high-error steps before a transition
  cogmap::RecognitionConfig recog;
  int room_span = 6;        // room_width + aisle band; drives radii below
  int raster_radius = 7;    // place raster half-extent (tiles)
  int mid_replan_period = 10;
  int max_recognition_evidence = 8;
  int raster_refresh_fusions = 6;
  uint64_t seed = 0;
  int can_radius = 80;
};

// Per-step place-recognition telemetry (one row per step spent recognizing).
struct HypothesisTraceRow {
  int step = 0;
  int n_hypotheses = 0;
  double new_place_prob = 0.0;
  std::vector<std::pair<int, double>> node_probs;
  int resolved_node = -2;  // -2 pending, otherwise the resolved node id
};

// Three-level agent: places at the top, in-place poses in the middle, actions
// at the bottom. Owns the cognitive map and runs entirely on its own
// observations plus the per-step collision flag.
class Agent {
 public:
  Agent(const ego::EgoModel& ego_model, const allo::AlloModel& allo_model, AgentConfig cfg);

  void set_preference(Preference pref) { pref_ = std::move(pref); }

  // First observation, before any action has been taken.
  void begin(const sim::Observation& obs);
  // Report the executed action and its result, then pick the next action.
  void observe(sim::Action executed, const sim::Observation& obs, bool collided);
  sim::Action act();

  // --- introspection ---
  const cogmap::CognitiveGraph& graph() const { return graph_; }
  sim::Pose pose_estimate() const { return can_.decode(); }
  int current_node() const { return current_node_; }
  bool recognizing() const { return phase_ == Phase::Recognizing; }
  const std::vector<HypothesisTraceRow>& hypothesis_trace() const { return trace_; }
  int transition_count() const { return transition_count_; }
  const cogmap::RoomRaster* raster_of(int node);
  const GaussianBelief& place_belief() const { return place_; }
  double last_prediction_error() const { return last_error_; }

 private:
  enum class Phase { Recognizing, InPlace };

  allo::LocalPose to_local(const sim::Pose& global) const;
  void start_recognition(const sim::Pose& entry_pose);
  void finish_recognition(int chosen_node);
  void update_recognition(const sim::Observation& obs, const sim::Pose& global);
  void update_in_place(const sim::Observation& obs, const sim::Pose& global);
  void refresh_raster(int node);
  std::vector<std::pair<int, int>> frontier_doors(int node);
  NodeGoalInfo node_info(int node);
  void replan_top();
  void replan_mid();
  bool waypoint_reached() const;
  std::vector<allo::LocalPose> bfs_waypoints(const allo::LocalPose& from,
                                             std::pair<int, int> target_tile, int node);

  const ego::EgoModel* ego_;
  const allo::AlloModel* allo_;
  EgoSequenceModel seq_model_;
  cogmap::AlloPlaceDecoder place_decoder_;
  AgentConfig cfg_;
  Preference pref_;

  // Perception state.
  ego::EgoState ego_state_;
  cogmap::PoseAttractor can_;
  int step_count_ = 0;

  // Place state.
  Phase phase_ = Phase::Recognizing;
  sim::Pose anchor_{};
  GaussianBelief place_;
  int fusions_since_raster_ = 0;
  int fusions_in_place_ = 0;
  std::set<std::tuple<int, int, int>> fused_poses_;
  std::deque<cogmap::Evidence> recent_;  // rolling debounce window
  cogmap::TransitionDetector detector_;
  double last_error_ = 0.0;

  // Recognition state.
  std::vector<cogmap::Evidence> evidence_;
  sim::Pose entry_pose_{};
  int last_argmax_ = -2;
  int argmax_streak_ = 0;
  std::optional<int> prev_node_;
  std::pair<int, int> door_tile_{0, 0};
  int transition_count_ = 0;
  std::vector<HypothesisTraceRow> trace_;

  // Map state.
  cogmap::CognitiveGraph graph_;
  int current_node_ = -1;
  std::vector<int> node_fusions_;
  std::vector<std::optional<cogmap::RoomRaster>> rasters_;
  std::vector<int> raster_age_;

  // Agent-side world memory.
  std::set<std::pair<int, int>> seen_tiles_;
  std::set<std::pair<int, int>> blocked_tiles_;
  std::optional<std::pair<int, int>> white_tile_seen_;

  // Plan state.
  LocationPolicy node_path_;
  PosePolicy waypoints_;
  size_t waypoint_idx_ = 0;
  int steps_since_mid_ = 0;
  bool top_dirty_ = true;
  int stuck_counter_ = 0;
  sim::Pose last_pose_{};
};

}  // namespace hainav::planner
