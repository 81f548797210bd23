#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hainav/cogmap/graph.hpp"
#include "hainav/cogmap/recognition.hpp"
#include "hainav/ego/model.hpp"

namespace hainav::planner {

using nn::Vec;

// Goal specification. The white-tile goal is a preferred tile patch; a full
// preferred observation and a known node id are also supported.
struct Preference {
  std::optional<Vec> observation;
  std::optional<std::array<double, 3>> patch_rgb;
  std::optional<int> node_id;

  bool empty() const { return !observation && !patch_rgb && !node_id; }
};

struct EfeConfig {
  double w_epi = 1.0;
  double w_prag = 1.0;
  int horizon = 3;               // H_a, exhaustive enumeration of 4^H_a candidates
  int mc_samples = 5;            // Monte Carlo samples for information gain
  double collision_penalty = 5.0;
  double collision_threshold = 0.5;
  double tie_dist_weight = 0.002;  // nearest-first bias for pose ranking
  double graph_discount = 0.85;    // per-hop discount of location-level gain
  double frontier_gain = 1.0;      // expected gain of an unexplored door
  double node_epi_floor = 0.02;    // below this a place counts as exhausted
  double pref_match_threshold = 0.3;
};

struct EFEScore {
  double epistemic = 0.0;   // expected information gain, nats (>= 0)
  double pragmatic = 0.0;   // preference log-alignment (0 without a preference)
  double collision = 0.0;   // accumulated collision penalties
  double total = 0.0;       // -w_epi*epistemic - w_prag*pragmatic + collision
};

// Candidate policies at the three levels.
struct LocationPolicy {
  std::vector<int> node_path;  // inclusive, starting at the current node
  bool stand_by = false;       // environment exhausted
};
using PosePolicy = std::vector<allo::LocalPose>;
using ActionPolicy = std::vector<sim::Action>;

// Candidate enumeration order; also the tie-break order.
inline constexpr std::array<sim::Action, 4> kActionOrder{
    sim::Action::Left, sim::Action::Forward, sim::Action::Right, sim::Action::StandBy};

// Surface of the egocentric model the low-level planner needs; tests mock it.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  virtual ego::EgoState prior_step(const ego::EgoState& state, sim::Action a,
                                   const Vec* eps) const = 0;
  virtual GaussianBelief posterior_update(const Vec& h, sim::Action a, const Vec& obs) const = 0;
  virtual ego::Decoded decode(const Vec& s_sample) const = 0;
  virtual int s_dim() const = 0;
};

class EgoSequenceModel : public SequenceModel {
 public:
  explicit EgoSequenceModel(const ego::EgoModel& m) : model_(&m) {}
  ego::EgoState prior_step(const ego::EgoState& s, sim::Action a, const Vec* eps) const override {
    return model_->prior_step(s, a, eps);
  }
  GaussianBelief posterior_update(const Vec& h, sim::Action a, const Vec& obs) const override {
    return model_->posterior_update(h, a, obs);
  }
  ego::Decoded decode(const Vec& s) const override { return model_->decode(s); }
  int s_dim() const override { return model_->config().s_dim; }

 private:
  const ego::EgoModel* model_;
};

// Distance between an imagined image and the preference (lower = better match).
double preference_distance(const Vec& image, const Preference& pref);

// Per-step waypoint guidance for the low level: expected views along the pose
// policy; the last image holds while the rollout outruns the waypoints.
struct StepGuidance {
  std::vector<Vec> waypoint_images;
  Preference goal;  // external preference, folded into every step
};

// Expected free energy of one candidate action sequence rolled through the
// model's imagination: latent information gain (Monte Carlo), preference
// alignment of the imagined images, and a fixed penalty per predicted collision.
EFEScore efe_action(const SequenceModel& model, const ego::EgoState& state,
                    const ActionPolicy& candidate, const Preference& pref, const EfeConfig& cfg,
                    uint64_t seed);

// Evaluates every H_a-step candidate (shared-prefix tree) and returns the
// first action of the best one; ties fall to kActionOrder.
std::pair<sim::Action, EFEScore> best_action(const SequenceModel& model,
                                             const ego::EgoState& state,
                                             const StepGuidance& guidance, const EfeConfig& cfg,
                                             uint64_t seed);

// Mid-level: ranks candidate poses inside the current place by decoder
// uncertainty (pixel variance across place samples) and preference match.
std::vector<std::pair<allo::LocalPose, EFEScore>> efe_pose(
    const cogmap::PlaceDecoder& decoder, const GaussianBelief& place,
    const std::vector<allo::LocalPose>& candidates, const Preference& pref,
    const allo::LocalPose& current, const EfeConfig& cfg, uint64_t seed);

// Location-level summary the agent computes from its caches.
struct NodeGoalInfo {
  double epistemic = 0.0;   // residual uncertainty of the stored place
  int open_frontiers = 0;   // decoded doors without a graph edge
  double pref_match = -1.0;  // preference match quality, <0 when unknown
};

// Top level: frontier/uncertainty foraging discounted by graph distance, or
// the shortest path to the best preference-matching node.
LocationPolicy efe_location(const cogmap::CognitiveGraph& graph,
                            const std::vector<NodeGoalInfo>& info, int current_node,
                            const Preference& pref, const EfeConfig& cfg);

}  // namespace hainav::planner
