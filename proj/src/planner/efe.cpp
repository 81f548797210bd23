#include "hainav/planner/efe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "hainav/sim/render.hpp"

namespace hainav::planner {

namespace {

double image_mse(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

// Best patch match over the tile window, biased toward tiles near the agent so
// that approaching the preferred tile keeps lowering the distance.
double patch_distance(const Vec& image, const std::array<double, 3>& patch) {
  namespace sm = hainav::sim;
  if (image.size() != static_cast<size_t>(sm::kImagePixels)) {
    // Non-standard image (mock models): plain distance to a patch-colored image.
    double s = 0.0;
    for (size_t i = 0; i < image.size(); ++i) {
      const double d = image[i] - patch[i % 3];
      s += d * d;
    }
    return s / static_cast<double>(image.size());
  }
  double best = 3.0;
  for (int wr = 0; wr < sm::kWindowTiles; ++wr)
    for (int wc = 0; wc < sm::kWindowTiles; ++wc) {
      std::array<double, 3> rgb{0, 0, 0};
      int n = 0;
      for (int py = 1; py < sm::kTilePixels - 1; ++py)
        for (int px = 1; px < sm::kTilePixels - 1; ++px) {
          for (int c = 0; c < 3; ++c)
            rgb[c] += image[(static_cast<size_t>(c) * sm::kImageSize + wr * sm::kTilePixels + py) *
                                sm::kImageSize +
                            wc * sm::kTilePixels + px];
          ++n;
        }
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        rgb[c] /= n;
        d += (rgb[c] - patch[c]) * (rgb[c] - patch[c]);
      }
      const double prox =
          (std::abs(wr - sm::kAgentRow) + std::abs(wc - sm::kAgentCol)) / 12.0;
      best = std::min(best, d + 0.3 * prox);
    }
  return best;
}

}  // namespace

double preference_distance(const Vec& image, const Preference& pref) {
  double d = 0.0;
  if (pref.observation) d += image_mse(image, *pref.observation);
  if (pref.patch_rgb) d += patch_distance(image, *pref.patch_rgb);
  return d;
}

namespace {

struct NodeContribution {
  double ig = 0.0;
  double prag = 0.0;
  double coll = 0.0;
  ego::EgoState state;
};

NodeContribution eval_node(const SequenceModel& model, const ego::EgoState& parent,
                           sim::Action a, size_t step_index, const StepGuidance& guidance,
                           const EfeConfig& cfg, uint64_t node_seed) {
  NodeContribution out;
  out.state = model.prior_step(parent, a, nullptr);

  const ego::Decoded dec = model.decode(out.state.s_sample);
  if (dec.collision_prob > cfg.collision_threshold) out.coll = cfg.collision_penalty;

  // Expected information gain: average KL between the posterior after an
  // imagined observation and the prior predictive belief.
  if (cfg.w_epi != 0.0 && cfg.mc_samples > 0) {
    double ig = 0.0;
    for (int i = 0; i < cfg.mc_samples; ++i) {
      Rng rng(mix_seed(node_seed, static_cast<uint64_t>(i)));
      Vec eps(model.s_dim());
      for (double& e : eps) e = rng.normal();
      Vec s(out.state.s.mean);
      for (size_t k = 0; k < s.size(); ++k) s[k] += out.state.s.std[k] * eps[k];
      const ego::Decoded sample_dec = model.decode(s);
      const GaussianBelief post = model.posterior_update(out.state.h, a, sample_dec.image);
      ig += gaussian_kl(post, out.state.s);
    }
    out.ig = ig / cfg.mc_samples;
  }

  double dist = preference_distance(dec.image, guidance.goal);
  if (!guidance.waypoint_images.empty()) {
    const size_t wp = std::min(step_index, guidance.waypoint_images.size() - 1);
    dist += image_mse(dec.image, guidance.waypoint_images[wp]);
  }
  const bool has_pref = !guidance.goal.empty() || !guidance.waypoint_images.empty();
  out.prag = has_pref ? -dist : 0.0;
  return out;
}

}  // namespace

EFEScore efe_action(const SequenceModel& model, const ego::EgoState& state,
                    const ActionPolicy& candidate, const Preference& pref, const EfeConfig& cfg,
                    uint64_t seed) {
  StepGuidance guidance;
  guidance.goal = pref;
  EFEScore score;
  ego::EgoState cur = state;
  for (size_t k = 0; k < candidate.size(); ++k) {
    const uint64_t node_seed =
        mix_seed(seed, static_cast<uint64_t>(k), static_cast<uint64_t>(candidate[k]));
    const NodeContribution c = eval_node(model, cur, candidate[k], k, guidance, cfg, node_seed);
    score.epistemic += c.ig;
    score.pragmatic += c.prag;
    score.collision += c.coll;
    cur = c.state;
  }
  score.total = -cfg.w_epi * score.epistemic - cfg.w_prag * score.pragmatic + score.collision;
  return score;
}

std::pair<sim::Action, EFEScore> best_action(const SequenceModel& model,
                                             const ego::EgoState& state,
                                             const StepGuidance& guidance, const EfeConfig& cfg,
                                             uint64_t seed) {
  EFEScore best;
  best.total = std::numeric_limits<double>::infinity();
  sim::Action best_first = sim::Action::StandBy;

  // Depth-first over the shared-prefix candidate tree, in tie-break order; the
  // first strictly better leaf wins, so equal scores fall to kActionOrder.
  struct Frame {
    ego::EgoState state;
    EFEScore acc;
  };
  std::function<void(const Frame&, size_t, sim::Action, uint64_t)> descend =
      [&](const Frame& f, size_t depth, sim::Action first, uint64_t path_seed) {
        if (depth == static_cast<size_t>(cfg.horizon)) {
          EFEScore leaf = f.acc;
          leaf.total =
              -cfg.w_epi * leaf.epistemic - cfg.w_prag * leaf.pragmatic + leaf.collision;
          if (leaf.total < best.total) {
            best = leaf;
            best_first = first;
          }
          return;
        }
        for (sim::Action a : kActionOrder) {
          const uint64_t node_seed =
              mix_seed(path_seed, static_cast<uint64_t>(depth), static_cast<uint64_t>(a));
          const NodeContribution c =
              eval_node(model, f.state, a, depth, guidance, cfg, node_seed);
          Frame next;
          next.state = c.state;
          next.acc = f.acc;
          next.acc.epistemic += c.ig;
          next.acc.pragmatic += c.prag;
          next.acc.collision += c.coll;
          descend(next, depth + 1, depth == 0 ? a : first, node_seed);
        }
      };
  descend(Frame{state, EFEScore{}}, 0, sim::Action::StandBy, seed);
  return {best_first, best};
}

std::vector<std::pair<allo::LocalPose, EFEScore>> efe_pose(
    const cogmap::PlaceDecoder& decoder, const GaussianBelief& place,
    const std::vector<allo::LocalPose>& candidates, const Preference& pref,
    const allo::LocalPose& current, const EfeConfig& cfg, uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("efe_pose: empty candidate set");

  // Shared place samples across candidates.
  std::vector<GaussianBelief> samples;
  for (int i = 0; i < cfg.mc_samples; ++i) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(i)));
    GaussianBelief s;
    s.mean = place.sample(rng);
    s.std.assign(place.std.size(), 1.0);
    samples.push_back(std::move(s));
  }

  std::vector<std::pair<allo::LocalPose, EFEScore>> scored;
  scored.reserve(candidates.size());
  for (const allo::LocalPose& pose : candidates) {
    EFEScore s;
    if (cfg.w_epi != 0.0 && !samples.empty()) {
      // Decoder disagreement across place samples = epistemic value of the pose.
      std::vector<Vec> imgs;
      for (const auto& z : samples) imgs.push_back(decoder.decode_mean(z, pose));
      const size_t n = imgs[0].size();
      double var = 0.0;
      for (size_t px = 0; px < n; ++px) {
        double m = 0.0, m2 = 0.0;
        for (const Vec& img : imgs) {
          m += img[px];
          m2 += img[px] * img[px];
        }
        m /= imgs.size();
        var += m2 / imgs.size() - m * m;
      }
      s.epistemic = var / static_cast<double>(n);
    }
    if (!pref.empty()) {
      const Vec mean_img = decoder.decode_mean(place, pose);
      s.pragmatic = -preference_distance(mean_img, pref);
    }
    const double dist = std::abs(pose.x - current.x) + std::abs(pose.y - current.y);
    s.total = -cfg.w_epi * s.epistemic - cfg.w_prag * s.pragmatic + cfg.tie_dist_weight * dist;
    scored.emplace_back(pose, s);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.second.total < b.second.total; });
  return scored;
}

LocationPolicy efe_location(const cogmap::CognitiveGraph& graph,
                            const std::vector<NodeGoalInfo>& info, int current_node,
                            const Preference& pref, const EfeConfig& cfg) {
  if (graph.empty()) throw std::invalid_argument("efe_location: empty graph");
  LocationPolicy out;

  // Exploitation: head for the place that best matches the preference.
  if (!pref.empty()) {
    int best = -1;
    double best_match = cfg.pref_match_threshold;
    if (pref.node_id && *pref.node_id < graph.size()) best = *pref.node_id;
    if (best < 0)
      for (int id = 0; id < graph.size(); ++id)
        if (info[id].pref_match > best_match) {
          best_match = info[id].pref_match;
          best = id;
        }
    if (best >= 0) {
      out.node_path = graph.shortest_path(current_node, best);
      if (!out.node_path.empty()) return out;
    }
  }

  // Exploration: expected gain of each place, discounted by graph distance.
  int best = -1;
  double best_score = 0.0;
  for (int id = 0; id < graph.size(); ++id) {
    double gain = cfg.frontier_gain * info[id].open_frontiers;
    if (info[id].epistemic > cfg.node_epi_floor) gain += info[id].epistemic;
    if (gain <= 0.0) continue;
    const auto path = graph.shortest_path(current_node, id);
    if (path.empty()) continue;
    const double score = gain * std::pow(cfg.graph_discount, path.size() - 1);
    if (score > best_score) {
      best_score = score;
      best = id;
    }
  }
  if (best < 0) {
    out.stand_by = true;  // nothing left to learn and nothing preferred
    return out;
  }
  out.node_path = graph.shortest_path(current_node, best);
  return out;
}

}  // namespace hainav::planner
