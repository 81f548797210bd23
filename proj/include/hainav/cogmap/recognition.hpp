#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "hainav/allo/model.hpp"
#include "hainav/cogmap/graph.hpp"

namespace hainav::cogmap {

// Decoder surface the map layer needs from the place model; tests substitute
// handcrafted implementations.
class PlaceDecoder {
 public:
  virtual ~PlaceDecoder() = default;
  virtual std::vector<double> decode_mean(const GaussianBelief& z,
                                          const allo::LocalPose& pose) const = 0;
  virtual GaussianBelief encode(const std::vector<double>& obs,
                                const allo::LocalPose& pose) const = 0;
  virtual int image_pixels() const = 0;
};

class AlloPlaceDecoder : public PlaceDecoder {
 public:
  explicit AlloPlaceDecoder(const allo::AlloModel& m) : model_(&m) {}
  std::vector<double> decode_mean(const GaussianBelief& z,
                                  const allo::LocalPose& pose) const override {
    return model_->decode(z.mean, pose);
  }
  GaussianBelief encode(const std::vector<double>& obs,
                        const allo::LocalPose& pose) const override {
    return model_->encode(obs, pose);
  }
  int image_pixels() const override { return model_->config().image_pixels(); }

 private:
  const allo::AlloModel* model_;
};

// True once the place-prediction error stays above threshold for a debounce
// window of consecutive steps.
class TransitionDetector {
 public:
  TransitionDetector(double threshold, int debounce)
      : threshold_(threshold), debounce_(debounce) {}
  bool update(double error) {
    streak_ = error > threshold_ ? streak_ + 1 : 0;
    return streak_ >= debounce_;
  }
  void reset() { streak_ = 0; }
  int streak() const { return streak_; }

 private:
  double threshold_;
  int debounce_;
  int streak_ = 0;
};

inline bool detect_transition(double error, double threshold, int debounce, int& streak) {
  streak = error > threshold ? streak + 1 : 0;
  return streak >= debounce;
}

struct Hypothesis {
  int node_id = -1;  // -1: new-place candidate
  double prob = 0.0;
  double log_score = 0.0;
};

struct HypothesisSet {
  std::vector<Hypothesis> hypotheses;

  int argmax_node() const;
  double prob_of(int node_id) const;
  double new_place_prob() const { return prob_of(-1); }
  size_t size() const { return hypotheses.size(); }
};

struct Evidence {
  std::vector<double> obs;
  std::vector<uint8_t> pixmask;
  sim::Pose global_pose;
};

struct RecognitionConfig {
  double gating_radius = 9.0;      // tiles; 1.5x the room span by default profile
  double obs_sigma = 0.12;         // pixel likelihood noise scale
  double newplace_mse = 0.01;      // calibrated median within-room visible MSE
  double newplace_discount = 0.8;  // likelihood discount for the new-place candidate
  double pose_prior_sigma = 6.0;   // anchor-distance prior (tiles)
  int resolve_debounce = 3;        // stable-argmax steps before resolving
};

// Scores pose-gated existing places plus one new-place candidate against the
// evidence gathered since the transition; probabilities softmax-normalized.
HypothesisSet recognize(const CognitiveGraph& graph, const PlaceDecoder& decoder,
                        const sim::Pose& pose_estimate, const std::vector<Evidence>& evidence,
                        const RecognitionConfig& cfg);

struct ResolvedOutcome {
  int node_id = -1;  // -1: create a new place
  sim::Pose anchor;  // entry pose of the (possibly new) place
  GaussianBelief place;
  std::optional<int> prev_node;
  std::pair<int, int> door_tile{0, 0};
};

// Applies a resolved recognition to the graph; returns the current node id.
int update_graph(CognitiveGraph& graph, const ResolvedOutcome& outcome);

}  // namespace hainav::cogmap
