#include <doctest.h>

#include "hainav/planner/efe.hpp"
#include "mock_models.hpp"
#include "oracles.hpp"

using namespace hainav;
using namespace hainav::planner;
using mocks::MockPlaceDecoder;
using mocks::MockWorld;
using sim::Action;
using sim::Heading;

TEST_CASE("efe_action: identical candidates tie, broken by fixed action order") {
  MockWorld world;  // every action leads to the same image, no collisions
  world.consistent_posterior = true;
  EfeConfig cfg;
  cfg.horizon = 2;
  cfg.mc_samples = 3;

  const auto st = world.make_state();
  const Preference none;
  const EFEScore a = efe_action(world, st, {Action::Left, Action::Left}, none, cfg, 9);
  const EFEScore b = efe_action(world, st, {Action::Right, Action::Forward}, none, cfg, 9);
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));

  StepGuidance guidance;  // no goal, no waypoints: all leaves equal
  const auto [act, score] = best_action(world, st, guidance, cfg, 9);
  CHECK(act == Action::Left);  // first action in the tie-break order
}

TEST_CASE("efe_action: predicted collisions make forward worse than left") {
  MockWorld world;
  world.forward_collision = 1.0;
  EfeConfig cfg;
  cfg.horizon = 1;
  cfg.mc_samples = 2;
  const auto st = world.make_state();
  const Preference none;
  const EFEScore fwd = efe_action(world, st, {Action::Forward}, none, cfg, 4);
  const EFEScore left = efe_action(world, st, {Action::Left}, none, cfg, 4);
  CHECK(fwd.total > left.total);
  CHECK(fwd.collision == doctest::Approx(cfg.collision_penalty));

  StepGuidance guidance;
  cfg.horizon = 3;
  const auto [act, score] = best_action(world, st, guidance, cfg, 4);
  CHECK(act != Action::Forward);
}

TEST_CASE("efe_action: revealing the preferred observation wins") {
  MockWorld world;
  world.forward_rgb = {1.0, 1.0, 1.0};  // forward shows the white view
  EfeConfig cfg;
  cfg.horizon = 1;
  cfg.mc_samples = 0;
  Preference pref;
  pref.patch_rgb = {{1.0, 1.0, 1.0}};
  const auto st = world.make_state();
  double best_total = 1e18;
  Action best = Action::StandBy;
  for (Action a : kActionOrder) {
    const EFEScore s = efe_action(world, st, {a}, pref, cfg, 2);
    if (s.total < best_total) {
      best_total = s.total;
      best = a;
    }
  }
  CHECK(best == Action::Forward);
  const EFEScore fwd = efe_action(world, st, {Action::Forward}, pref, cfg, 2);
  const EFEScore left = efe_action(world, st, {Action::Left}, pref, cfg, 2);
  CHECK(fwd.total < left.total);
  CHECK(fwd.pragmatic > left.pragmatic);
}

TEST_CASE("efe_action: epistemic term is zero for a degenerate, self-consistent model") {
  MockWorld world;
  world.consistent_posterior = true;  // posterior equals the prior predictive
  EfeConfig cfg;
  cfg.horizon = 2;
  cfg.mc_samples = 4;
  const EFEScore s =
      efe_action(world, world.make_state(), {Action::Forward, Action::Left}, {}, cfg, 7);
  CHECK(s.epistemic == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("efe_action: an informative model yields positive information gain") {
  MockWorld world;
  world.consistent_posterior = false;  // observations sharpen the posterior
  EfeConfig cfg;
  cfg.horizon = 2;
  cfg.mc_samples = 3;
  const EFEScore s =
      efe_action(world, world.make_state(), {Action::Forward, Action::Left}, {}, cfg, 7);
  CHECK(s.epistemic > 0.0);
  // And the total prefers it: higher information gain lowers EFE.
  MockWorld inert;
  inert.consistent_posterior = true;
  const EFEScore s0 =
      efe_action(inert, inert.make_state(), {Action::Forward, Action::Left}, {}, cfg, 7);
  CHECK(s.total < s0.total);
}

TEST_CASE("efe_action: deterministic for a fixed seed") {
  MockWorld world;
  world.consistent_posterior = false;
  EfeConfig cfg;
  const ActionPolicy pol{Action::Forward, Action::Right, Action::Forward};
  const EFEScore a = efe_action(world, world.make_state(), pol, {}, cfg, 1234);
  const EFEScore b = efe_action(world, world.make_state(), pol, {}, cfg, 1234);
  CHECK(a.total == b.total);
  CHECK(a.epistemic == b.epistemic);
}

TEST_CASE("efe_pose: uncertainty-facing pose ranks first; preference pose wins") {
  MockPlaceDecoder decoder;
  decoder.sample_sensitivity = 0.5;
  decoder.uncertain_pose = allo::LocalPose{2, 0, Heading::E};  // one unknown corner

  GaussianBelief place{{0.0, 0.0}, {1.0, 1.0}};
  std::vector<allo::LocalPose> candidates{
      {0, 1, Heading::N}, {2, 0, Heading::E}, {-1, 0, Heading::W}};
  EfeConfig cfg;
  cfg.mc_samples = 4;

  const auto ranked =
      efe_pose(decoder, place, candidates, {}, allo::LocalPose{0, 0, Heading::N}, cfg, 3);
  CHECK(ranked.front().first == allo::LocalPose{2, 0, Heading::E});
  CHECK(ranked.front().second.epistemic > ranked.back().second.epistemic);

  // With a preference and no uncertainty, the matching pose wins.
  MockPlaceDecoder flat;
  flat.special_pose = allo::LocalPose{-1, 0, Heading::W};
  flat.special_rgb = {1.0, 1.0, 1.0};
  Preference pref;
  pref.patch_rgb = {{1.0, 1.0, 1.0}};
  const auto ranked2 =
      efe_pose(flat, place, candidates, pref, allo::LocalPose{0, 0, Heading::N}, cfg, 3);
  CHECK(ranked2.front().first == allo::LocalPose{-1, 0, Heading::W});

  CHECK_THROWS_AS(efe_pose(flat, place, {}, pref, allo::LocalPose{}, cfg, 3),
                  std::invalid_argument);
}

TEST_CASE("efe_pose: near-uniform scores fall back to nearest-first") {
  MockPlaceDecoder flat;  // identical everywhere -> identical epistemic/pragmatic
  GaussianBelief place{{0.0, 0.0}, {0.3, 0.3}};
  std::vector<allo::LocalPose> candidates{
      {4, 4, Heading::N}, {1, 0, Heading::E}, {3, -2, Heading::S}};
  EfeConfig cfg;
  cfg.mc_samples = 2;
  const auto ranked =
      efe_pose(flat, place, candidates, {}, allo::LocalPose{0, 0, Heading::N}, cfg, 5);
  CHECK(ranked.front().first == allo::LocalPose{1, 0, Heading::E});
}

TEST_CASE("efe_location: single node with an open door targets that frontier") {
  cogmap::CognitiveGraph g;
  g.add_node(sim::Pose{0, 0, Heading::N}, GaussianBelief{{0.0}, {0.5}});
  std::vector<NodeGoalInfo> info(1);
  info[0].open_frontiers = 1;
  info[0].epistemic = 0.0;
  const auto pol = efe_location(g, info, 0, {}, EfeConfig{});
  CHECK(!pol.stand_by);
  CHECK(pol.node_path == std::vector<int>{0});
}

TEST_CASE("efe_location: preference routes along the BFS-shortest node path") {
  cogmap::CognitiveGraph g;
  GaussianBelief z{{0.0}, {0.5}};
  // Chain 0-1-2-3 plus shortcut 0-4-3.
  for (int i = 0; i < 5; ++i)
    g.add_node(sim::Pose{6 * i, 0, Heading::N}, z);
  g.add_edge(0, 1, {3, 0});
  g.add_edge(1, 2, {9, 0});
  g.add_edge(2, 3, {15, 0});
  g.add_edge(0, 4, {1, 0});
  g.add_edge(4, 3, {2, 0});
  std::vector<NodeGoalInfo> info(5);
  info[3].pref_match = 0.9;  // white seen in node 3
  Preference pref;
  pref.patch_rgb = {{1.0, 1.0, 1.0}};
  const auto pol = efe_location(g, info, 0, pref, EfeConfig{});
  REQUIRE(!pol.node_path.empty());
  CHECK(pol.node_path == std::vector<int>{0, 4, 3});  // BFS distance 2, not 3
}

TEST_CASE("efe_location: exhausted graph with no preference stands by") {
  cogmap::CognitiveGraph g;
  GaussianBelief z{{0.0}, {0.001}};
  g.add_node(sim::Pose{0, 0, Heading::N}, z);
  g.add_node(sim::Pose{6, 0, Heading::N}, z);
  g.add_edge(0, 1, {3, 0});
  std::vector<NodeGoalInfo> info(2);  // no frontiers, epistemic below floor
  const auto pol = efe_location(g, info, 0, {}, EfeConfig{});
  CHECK(pol.stand_by);
}

TEST_CASE("efe_location: distance discount prefers the closer frontier") {
  cogmap::CognitiveGraph g;
  GaussianBelief z{{0.0}, {0.3}};
  for (int i = 0; i < 4; ++i) g.add_node(sim::Pose{6 * i, 0, Heading::N}, z);
  g.add_edge(0, 1, {3, 0});
  g.add_edge(1, 2, {9, 0});
  g.add_edge(2, 3, {15, 0});
  std::vector<NodeGoalInfo> info(4);
  info[1].open_frontiers = 1;
  info[3].open_frontiers = 1;
  const auto pol = efe_location(g, info, 0, {}, EfeConfig{});
  CHECK(pol.node_path == std::vector<int>{0, 1});
}

TEST_CASE("argmax invariance: shifting every candidate EFE keeps the ranking") {
  MockWorld world;
  world.consistent_posterior = false;
  world.forward_collision = 0.6;
  EfeConfig cfg;
  cfg.horizon = 2;
  cfg.mc_samples = 2;
  Rng rng(99);
  const auto st = world.make_state();
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ActionPolicy> cands;
    for (int k = 0; k < 6; ++k) {
      ActionPolicy p;
      for (int d = 0; d < cfg.horizon; ++d)
        p.push_back(static_cast<Action>(rng.uniform_int(4)));
      cands.push_back(p);
    }
    std::vector<double> totals;
    for (const auto& c : cands) totals.push_back(efe_action(world, st, c, {}, cfg, trial).total);
    const size_t argmin =
        std::min_element(totals.begin(), totals.end()) - totals.begin();
    const double shift = rng.uniform(-50.0, 50.0);
    std::vector<double> shifted;
    for (double t : totals) shifted.push_back(t + shift);
    const size_t argmin2 =
        std::min_element(shifted.begin(), shifted.end()) - shifted.begin();
    CHECK(argmin == argmin2);
  }
}
