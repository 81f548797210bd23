#pragma once

#include <array>
#include <vector>

#include "hainav/core/gaussian.hpp"
#include "hainav/nn/dist.hpp"
#include "hainav/nn/module.hpp"
#include "hainav/sim/maze.hpp"

namespace hainav::ego {

using nn::Tensor;
using nn::Vec;

struct EgoConfig {
  int image_size = 56;  // divisible by 8
  int channels = 3;
  int action_dim = 4;
  int h_dim = 256;
  int s_dim = 32;
  std::array<int, 3> enc_channels{8, 16, 32};
  int post_hidden = 256;
  int dec_hidden = 256;
  std::array<int, 2> dec_channels{16, 8};
  std::array<int, 2> col_hidden{16, 8};
  double std_floor = 1e-3;
  // Collision cross-entropy weight. The image likelihood term is ~1e2 larger
  // per step; unit weight leaves the head too weak for planning.
  double collision_weight = 15.0;

  int enc_spatial() const { return image_size / 8; }
  int image_pixels() const { return channels * image_size * image_size; }

  static EgoConfig tiny();  // toy instantiation for gradient checks
};

// Latent rollout state. h/c are the recurrent history (updated only by the
// prior step); s is the current stochastic belief with its drawn sample.
struct EgoState {
  Vec h, c;
  GaussianBelief s;
  Vec s_sample;
};

struct Decoded {
  Vec image;
  double collision_prob = 0.0;
};

struct EgoSequence {
  std::vector<Vec> observations;    // T images
  std::vector<sim::Action> actions;  // actions[t] precedes observations[t]
  std::vector<double> collisions;   // 0/1 flags aligned with observations
};

struct LossParts {
  Tensor total;
  double kl = 0, nll = 0, bce = 0;
};

class EgoModel {
 public:
  EgoModel(EgoConfig cfg, uint64_t init_seed);

  const EgoConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // --- graph-building pieces (used by the loss and by evaluation wrappers) ---
  struct PriorOut {
    Tensor h, c, mean, std;
  };
  PriorOut prior_step_t(const Tensor& h, const Tensor& c, const Tensor& s_sample,
                        const Tensor& action) const;
  std::pair<Tensor, Tensor> posterior_t(const Tensor& h, const Tensor& action,
                                        const Tensor& obs) const;
  Tensor decode_image_t(const Tensor& s) const;
  Tensor collision_logit_t(const Tensor& s) const;

  // Free-energy loss over one subsequence: KL(posterior || prior) plus image
  // negative log-likelihood plus collision cross-entropy, summed over steps.
  LossParts loss_t(const EgoSequence& seq, Rng& eps_rng) const;

  // --- evaluation API (no graphs) ---
  EgoState initial_state() const;
  // Advance the recurrent prior; sample via eps (nullptr draws the mean).
  EgoState prior_step(const EgoState& state, sim::Action a, const Vec* eps = nullptr) const;
  GaussianBelief posterior_update(const Vec& h, sim::Action a, const Vec& obs) const;
  Decoded decode(const Vec& s_sample) const;
  // Roll prior_step over the action sequence, decoding at each step.
  std::vector<Decoded> imagine(const EgoState& state, const std::vector<sim::Action>& actions,
                               Rng* sample_rng = nullptr) const;
  // Posterior-conditioned state update used by the agent loop at runtime.
  EgoState observe(const EgoState& state, sim::Action a, const Vec& obs) const;

  static Vec action_onehot(sim::Action a, int dim = 4);

 private:
  Tensor encode_obs_t(const Tensor& obs) const;

  EgoConfig cfg_;
  nn::ParamStore params_;
};

}  // namespace hainav::ego
