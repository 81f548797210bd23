#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hainav/core/gaussian.hpp"
#include "hainav/nn/dist.hpp"
#include "hainav/nn/module.hpp"
#include "hainav/sim/maze.hpp"
#include "hainav/sim/render.hpp"

namespace hainav::allo {

using nn::Tensor;
using nn::Vec;

// Pose relative to the place anchor (the pose at place entry), axis-aligned
// with the global frame and accumulated by integrating actions.
struct LocalPose {
  int x = 0;
  int y = 0;
  sim::Heading heading = sim::Heading::N;

  bool operator==(const LocalPose&) const = default;
};

struct AlloConfig {
  int image_size = 56;
  int channels = 3;
  int z_dim = 32;
  int pose_embed_dim = 9;
  std::array<int, 4> enc_channels{16, 32, 64, 128};
  int dec_base_channels = 256;
  int dec_base_hw = 4;
  std::array<int, 3> dec_channels{128, 64, 32};
  double std_floor = 1e-3;
  double pose_span = 8.0;  // normalization for pose offsets

  int enc_spatial() const { return image_size / 8; }
  int image_pixels() const { return channels * image_size * image_size; }

  static AlloConfig tiny();
};

struct AlloStep {
  Vec obs;
  std::vector<uint8_t> pixmask;  // 1 = visible pixel, aligned with obs
  LocalPose pose;
};
using AlloSequence = std::vector<AlloStep>;

struct LossParts {
  Tensor total;
  double kl = 0, recon = 0;
};

// Expands a 7x7 tile visibility mask to a per-pixel (CHW) mask.
std::vector<uint8_t> pixel_mask(const std::array<bool, sim::kWindowTiles * sim::kWindowTiles>& m);

class AlloModel {
 public:
  AlloModel(AlloConfig cfg, uint64_t init_seed);

  const AlloConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // --- graph-building pieces ---
  Tensor pose_embed_t(const LocalPose& pose) const;
  std::pair<Tensor, Tensor> encode_t(const Tensor& obs, const LocalPose& pose) const;
  Tensor decode_t(const Tensor& z, const LocalPose& pose) const;

  // Eq-style free energy over one in-room sequence: per-step KL of the
  // posterior against the standard normal, plus squared reconstruction error
  // of every observation decoded from the prefix-fused place code.
  LossParts loss_t(const AlloSequence& seq, int prefix_len, Rng& eps_rng) const;

  // --- evaluation API ---
  GaussianBelief encode(const Vec& obs, const LocalPose& pose) const;
  Vec decode(const Vec& z_sample, const LocalPose& pose) const;
  // Visible-pixels MSE between decode(z.mean, pose) and obs; 0 when nothing is visible.
  double prediction_error(const GaussianBelief& z, const Vec& obs,
                          const std::vector<uint8_t>& pixmask, const LocalPose& pose) const;

 private:
  Vec pose_features(const LocalPose& pose) const;

  AlloConfig cfg_;
  nn::ParamStore params_;
};

}  // namespace hainav::allo
