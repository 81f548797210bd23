#include <doctest.h>

#include <cmath>

#include "hainav/allo/model.hpp"
#include "oracles.hpp"

using namespace hainav;
using namespace hainav::allo;

namespace {

AlloSequence random_sequence(const AlloConfig& cfg, int T, uint64_t seed, bool full_mask = true) {
  Rng rng(seed);
  AlloSequence seq;
  for (int t = 0; t < T; ++t) {
    AlloStep step;
    step.obs.resize(cfg.image_pixels());
    for (double& v : step.obs) v = rng.uniform();
    step.pixmask.assign(cfg.image_pixels(), 1);
    if (!full_mask)
      for (auto& m : step.pixmask) m = rng.uniform() < 0.7 ? 1 : 0;
    step.pose = {rng.uniform_int(5) - 2, rng.uniform_int(5) - 2,
                 static_cast<sim::Heading>(rng.uniform_int(4))};
    seq.push_back(std::move(step));
  }
  return seq;
}

}  // namespace

TEST_CASE("allo: encode emits 2x32 parameters; pose embedding is 9-dim") {
  AlloModel model(AlloConfig{}, 10);
  Rng rng(4);
  Vec obs(model.config().image_pixels());
  for (double& v : obs) v = rng.uniform();
  const LocalPose pose{1, -2, sim::Heading::E};
  GaussianBelief z = model.encode(obs, pose);
  CHECK(z.mean.size() == 32);
  CHECK(z.std.size() == 32);
  for (double s : z.std) CHECK(s > 0.0);

  nn::NoGradGuard ng;
  CHECK(model.pose_embed_t(pose)->numel() == 9);

  // Pure function: identical inputs, identical belief.
  GaussianBelief z2 = model.encode(obs, pose);
  CHECK(z.mean == z2.mean);
  CHECK(z.std == z2.std);
}

TEST_CASE("allo: decoder output is a [0,1] image for any latent") {
  AlloModel model(AlloConfig{}, 11);
  Rng rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    Vec z(32);
    for (double& v : z) v = rng.uniform(-25.0, 25.0);
    const Vec img = model.decode(z, LocalPose{0, 0, sim::Heading::N});
    CHECK(img.size() == static_cast<size_t>(model.config().image_pixels()));
    for (double v : img) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("allo: prediction error of a self-prediction is zero") {
  AlloModel model(AlloConfig::tiny(), 12);
  GaussianBelief z;
  z.mean.assign(model.config().z_dim, 0.2);
  z.std.assign(model.config().z_dim, 0.5);
  const LocalPose pose{1, 0, sim::Heading::S};
  const Vec pred = model.decode(z.mean, pose);
  std::vector<uint8_t> mask(pred.size(), 1);
  CHECK(model.prediction_error(z, pred, mask, pose) == doctest::Approx(0.0).epsilon(1e-12));

  // Fully-masked observation carries no evidence.
  std::vector<uint8_t> none(pred.size(), 0);
  Vec junk(pred.size(), 0.9);
  CHECK(model.prediction_error(z, junk, none, pose) == 0.0);
}

TEST_CASE("allo: loss runs with prefix semantics and splits into parts") {
  AlloModel model(AlloConfig::tiny(), 13);
  const auto seq = random_sequence(model.config(), 6, 21, /*full_mask=*/false);
  Rng eps(3);
  const auto parts = model.loss_t(seq, /*prefix_len=*/4, eps);
  CHECK(std::isfinite(parts.total->val[0]));
  CHECK(parts.kl >= -1e-9);
  CHECK(parts.recon >= 0.0);
  CHECK(parts.total->val[0] == doctest::Approx(parts.kl + parts.recon).epsilon(1e-9));
}

TEST_CASE("allo: toy instantiation stays under 1e3 parameters") {
  AlloModel model(AlloConfig::tiny(), 1);
  CHECK(model.params().total_params() <= 1000);
}

TEST_CASE("allo: loss gradient matches central finite differences") {
  AlloModel model(AlloConfig::tiny(), 37);
  const auto seq = random_sequence(model.config(), 3, 43, /*full_mask=*/false);
  const uint64_t eps_seed = 777;

  auto eval = [&] {
    nn::NoGradGuard ng;
    Rng eps(eps_seed);
    return model.loss_t(seq, 2, eps).total->val[0];
  };
  auto bw = [&] {
    Rng eps(eps_seed);
    nn::backward(model.loss_t(seq, 2, eps).total);
  };
  const double rel = oracles::gradient_check(model.params(), eval, bw);
  CHECK(rel < 1e-4);
}

TEST_CASE("allo: pixel mask expansion marks whole tiles") {
  std::array<bool, 49> tiles{};
  tiles[0] = true;        // top-left tile
  tiles[6 * 7 + 3] = true;  // agent tile
  const auto mask = pixel_mask(tiles);
  CHECK(mask.size() == static_cast<size_t>(sim::kImagePixels));
  size_t on = 0;
  for (uint8_t m : mask) on += m;
  CHECK(on == 2u * 3u * 8u * 8u);
  CHECK(mask[0] == 1);
}
