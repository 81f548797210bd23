#include "hainav/cogmap/recognition.hpp"

#include <algorithm>
#include <cmath>

namespace hainav::cogmap {

int HypothesisSet::argmax_node() const {
  int best = -1;
  double best_p = -1.0;
  for (const Hypothesis& h : hypotheses)
    if (h.prob > best_p) {
      best_p = h.prob;
      best = h.node_id;
    }
  return best;
}

double HypothesisSet::prob_of(int node_id) const {
  for (const Hypothesis& h : hypotheses)
    if (h.node_id == node_id) return h.prob;
  return 0.0;
}

namespace {

// Mean per-pixel squared error over visible pixels; 0 with empty support.
double visible_mse(const std::vector<double>& pred, const Evidence& ev) {
  double err = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < ev.obs.size(); ++i) {
    if (!ev.pixmask[i]) continue;
    const double d = pred[i] - ev.obs[i];
    err += d * d;
    ++n;
  }
  return n == 0 ? 0.0 : err / static_cast<double>(n);
}

}  // namespace

HypothesisSet recognize(const CognitiveGraph& graph, const PlaceDecoder& decoder,
                        const sim::Pose& pose_estimate, const std::vector<Evidence>& evidence,
                        const RecognitionConfig& cfg) {
  HypothesisSet out;

  // Pose gating: only places anchored near the estimate can explain the data.
  std::vector<int> candidates;
  for (const LocationNode& n : graph.nodes()) {
    const double dx = n.anchor.x - pose_estimate.x;
    const double dy = n.anchor.y - pose_estimate.y;
    if (std::sqrt(dx * dx + dy * dy) <= cfg.gating_radius)
      candidates.push_back(n.experience_id);
  }

  const double inv2s2 = 1.0 / (2.0 * cfg.obs_sigma * cfg.obs_sigma);
  for (int id : candidates) {
    const LocationNode& n = graph.node(id);
    Hypothesis h;
    h.node_id = id;
    for (const Evidence& ev : evidence) {
      const allo::LocalPose local{ev.global_pose.x - n.anchor.x, ev.global_pose.y - n.anchor.y,
                                  ev.global_pose.heading};
      const auto pred = decoder.decode_mean(n.place, local);
      h.log_score -= visible_mse(pred, ev) * inv2s2;
    }
    const double dx = n.anchor.x - pose_estimate.x;
    const double dy = n.anchor.y - pose_estimate.y;
    h.log_score -= (dx * dx + dy * dy) / (2.0 * cfg.pose_prior_sigma * cfg.pose_prior_sigma);
    out.hypotheses.push_back(h);
  }

  // New-place candidate: a constant per-observation likelihood at the model's
  // typical within-room reconstruction quality, discounted.
  Hypothesis fresh;
  fresh.node_id = -1;
  fresh.log_score =
      static_cast<double>(evidence.size()) * (-cfg.newplace_mse * inv2s2 +
                                              std::log(cfg.newplace_discount));
  out.hypotheses.push_back(fresh);

  // Softmax normalization.
  double max_score = out.hypotheses[0].log_score;
  for (const Hypothesis& h : out.hypotheses) max_score = std::max(max_score, h.log_score);
  double total = 0.0;
  for (Hypothesis& h : out.hypotheses) {
    h.prob = std::exp(h.log_score - max_score);
    total += h.prob;
  }
  for (Hypothesis& h : out.hypotheses) h.prob /= total;
  return out;
}

int update_graph(CognitiveGraph& graph, const ResolvedOutcome& outcome) {
  int current;
  if (outcome.node_id < 0) {
    current = graph.add_node(outcome.anchor, outcome.place);
  } else {
    current = outcome.node_id;
    graph.fuse_into_node(current, outcome.place);
  }
  if (outcome.prev_node && *outcome.prev_node != current) {
    graph.add_edge(*outcome.prev_node, current, outcome.door_tile);
    graph.add_edge(current, *outcome.prev_node, outcome.door_tile);
  }
  return current;
}

}  // namespace hainav::cogmap
