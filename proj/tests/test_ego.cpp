#include <doctest.h>

#include <cmath>

#include "hainav/ego/model.hpp"
#include "oracles.hpp"

using namespace hainav;
using namespace hainav::ego;
using sim::Action;

namespace {

EgoSequence random_sequence(const EgoConfig& cfg, int T, uint64_t seed) {
  Rng rng(seed);
  EgoSequence seq;
  for (int t = 0; t < T; ++t) {
    Vec obs(cfg.image_pixels());
    for (double& v : obs) v = rng.uniform();
    seq.observations.push_back(std::move(obs));
    seq.actions.push_back(static_cast<Action>(rng.uniform_int(4)));
    seq.collisions.push_back(rng.uniform() < 0.2 ? 1.0 : 0.0);
  }
  return seq;
}

}  // namespace

TEST_CASE("ego: prior step emits a well-formed belief and is deterministic") {
  EgoModel model(EgoConfig{}, 1234);
  EgoState st = model.initial_state();
  CHECK(st.h.size() == 256);
  CHECK(st.s.mean.size() == 32);

  EgoState a = model.prior_step(st, Action::Forward);
  EgoState b = model.prior_step(st, Action::Forward);
  CHECK(a.h == b.h);
  CHECK(a.s.mean == b.s.mean);
  CHECK(a.s.mean.size() == 32);
  CHECK(a.s.std.size() == 32);
  for (double s : a.s.std) CHECK(s > 0.0);
  // Different action changes the belief.
  EgoState c = model.prior_step(st, Action::Left);
  CHECK(c.h != a.h);
}

TEST_CASE("ego: posterior emits 2x32 gaussian parameters, KL finite and nonnegative") {
  EgoModel model(EgoConfig{}, 99);
  Rng rng(5);
  Vec obs(model.config().image_pixels());
  for (double& v : obs) v = rng.uniform();
  EgoState st = model.prior_step(model.initial_state(), Action::Forward);
  GaussianBelief post = model.posterior_update(st.h, Action::Forward, obs);
  CHECK(post.mean.size() == 32);
  CHECK(post.std.size() == 32);
  for (double s : post.std) CHECK(s > 0.0);
  const double kl = gaussian_kl(post, st.s);
  CHECK(std::isfinite(kl));
  CHECK(kl >= 0.0);
}

TEST_CASE("ego: decoder output bounds hold for out-of-distribution latents") {
  EgoModel model(EgoConfig{}, 7);
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    Vec s(32);
    for (double& v : s) v = rng.uniform(-30.0, 30.0);
    const Decoded d = model.decode(s);
    CHECK(d.image.size() == static_cast<size_t>(model.config().image_pixels()));
    for (double v : d.image) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(d.collision_prob >= 0.0);
    CHECK(d.collision_prob <= 1.0);
  }
}

TEST_CASE("ego: imagine length matches the action sequence") {
  EgoModel model(EgoConfig::tiny(), 3);
  EgoState st = model.initial_state();
  CHECK(model.imagine(st, {}).empty());
  const auto out = model.imagine(st, {Action::Forward, Action::Left, Action::Forward,
                                      Action::StandBy, Action::Right});
  CHECK(out.size() == 5);
}

TEST_CASE("ego: fixed eps makes rollouts reproducible") {
  EgoModel model(EgoConfig::tiny(), 21);
  EgoState st = model.initial_state();
  Vec eps(model.config().s_dim, 0.37);
  EgoState a = model.prior_step(st, Action::Forward, &eps);
  EgoState b = model.prior_step(st, Action::Forward, &eps);
  CHECK(a.s_sample == b.s_sample);
  // eps shifts the sample away from the mean by std*eps.
  for (int i = 0; i < model.config().s_dim; ++i)
    CHECK(a.s_sample[i] == doctest::Approx(a.s.mean[i] + a.s.std[i] * 0.37));
}

TEST_CASE("ego: loss runs over a 20-step subsequence and splits into parts") {
  EgoModel model(EgoConfig::tiny(), 2);
  const auto seq = random_sequence(model.config(), 20, 77);
  Rng eps(123);
  const auto parts = model.loss_t(seq, eps);
  CHECK(std::isfinite(parts.total->val[0]));
  CHECK(parts.kl >= -1e-9);
  CHECK(parts.nll >= 0.0);
  CHECK(parts.bce >= 0.0);
  CHECK(parts.total->val[0] ==
        doctest::Approx(parts.kl + parts.nll + parts.bce).epsilon(1e-9));
}

TEST_CASE("ego: toy instantiation stays under 1e3 parameters") {
  EgoModel model(EgoConfig::tiny(), 1);
  CHECK(model.params().total_params() <= 1000);
}

TEST_CASE("ego: loss gradient matches central finite differences") {
  EgoModel model(EgoConfig::tiny(), 31);
  const auto seq = random_sequence(model.config(), 3, 41);
  const uint64_t eps_seed = 555;

  auto eval = [&] {
    nn::NoGradGuard ng;
    Rng eps(eps_seed);
    return model.loss_t(seq, eps).total->val[0];
  };
  auto bw = [&] {
    Rng eps(eps_seed);
    nn::backward(model.loss_t(seq, eps).total);
  };
  const double rel = oracles::gradient_check(model.params(), eval, bw);
  CHECK(rel < 1e-4);
}

TEST_CASE("ego: training on one tiny batch reduces the loss") {
  EgoModel model(EgoConfig::tiny(), 71);
  const auto seq = random_sequence(model.config(), 4, 17);
  nn::Adam opt(model.params().all(), 1e-3);
  Rng eps(9);
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 60; ++it) {
    opt.zero_grad();
    Rng eps_it(9);  // fixed noise so the objective is deterministic
    auto parts = model.loss_t(seq, eps_it);
    if (it == 0) first = parts.total->val[0];
    last = parts.total->val[0];
    nn::backward(parts.total);
    opt.step();
  }
  CHECK(last < first);
}
