#include <doctest.h>

#include <cmath>

#include "hainav/cogmap/graph.hpp"
#include "hainav/cogmap/pose_can.hpp"
#include "hainav/cogmap/recognition.hpp"
#include "hainav/cogmap/stitch.hpp"
#include "oracles.hpp"

using namespace hainav;
using namespace hainav::cogmap;
using sim::Action;
using sim::Heading;
using sim::Pose;

namespace {

// Deterministic fake place decoder: the hidden world is a small set of colored
// tile grids, selected by round(z.mean[0]); a decoded view paints the tile in
// front of the query pose with that grid's color at the tile's offset.
class ColorGridDecoder : public PlaceDecoder {
 public:
  explicit ColorGridDecoder(std::vector<std::array<std::array<double, 3>, 25>> rooms)
      : rooms_(std::move(rooms)) {}

  std::vector<double> decode_mean(const GaussianBelief& z,
                                  const allo::LocalPose& pose) const override {
    std::vector<double> img(sim::kImagePixels, 0.0);
    const int room = std::max(
        0, std::min(static_cast<int>(rooms_.size()) - 1,
                    static_cast<int>(std::lround(z.mean.empty() ? 0.0 : z.mean[0]))));
    // Tile in front of the pose, in local coordinates.
    const int fx = pose.x + sim::heading_dx(pose.heading);
    const int fy = pose.y + sim::heading_dy(pose.heading);
    std::array<double, 3> rgb{0.0, 0.0, 0.0};
    if (fx >= -2 && fx <= 2 && fy >= -2 && fy <= 2) rgb = rooms_[room][(fy + 2) * 5 + (fx + 2)];
    // Whole view takes the front tile's color; crude but enough for scoring.
    for (int c = 0; c < 3; ++c)
      std::fill(img.begin() + static_cast<size_t>(c) * sim::kImageSize * sim::kImageSize,
                img.begin() + static_cast<size_t>(c + 1) * sim::kImageSize * sim::kImageSize,
                rgb[c]);
    return img;
  }

  GaussianBelief encode(const std::vector<double>&, const allo::LocalPose&) const override {
    return GaussianBelief::standard(1);
  }
  int image_pixels() const override { return sim::kImagePixels; }

 private:
  std::vector<std::array<std::array<double, 3>, 25>> rooms_;
};

std::array<std::array<double, 3>, 25> uniform_grid(std::array<double, 3> rgb) {
  std::array<std::array<double, 3>, 25> g;
  g.fill(rgb);
  return g;
}

Evidence make_evidence(const PlaceDecoder& dec, double room_code, const Pose& global,
                       const Pose& anchor) {
  Evidence ev;
  GaussianBelief z{{room_code}, {1.0}};
  ev.obs = dec.decode_mean(z, allo::LocalPose{global.x - anchor.x, global.y - anchor.y,
                                              global.heading});
  ev.pixmask.assign(ev.obs.size(), 1);
  ev.global_pose = global;
  return ev;
}

}  // namespace

TEST_CASE("pose attractor: stand_by keeps the decoded pose; left turns CCW") {
  PoseAttractor can;
  can.reset(Pose{3, -2, Heading::E});
  can.integrate(Action::StandBy, false);
  CHECK(can.decode() == Pose{3, -2, Heading::E});
  can.integrate(Action::Left, false);
  CHECK(can.decode().heading == Heading::N);
  can.integrate(Action::Left, false);
  CHECK(can.decode().heading == Heading::W);
}

TEST_CASE("pose attractor: square loop returns exactly to the start") {
  PoseAttractor can;
  can.reset(Pose{0, 0, Heading::N});
  oracles::DeadReckoner dr{Pose{0, 0, Heading::N}};
  for (int side = 0; side < 4; ++side) {
    for (int k = 0; k < 3; ++k) {
      can.integrate(Action::Forward, false);
      dr.apply(Action::Forward, false);
    }
    can.integrate(Action::Left, false);
    dr.apply(Action::Left, false);
  }
  CHECK(can.decode() == Pose{0, 0, Heading::N});
  CHECK(can.decode() == dr.pose);
  CHECK(can.activity_sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pose attractor: collision suppresses the translation") {
  PoseAttractor can;
  can.reset(Pose{0, 0, Heading::S});
  can.integrate(Action::Forward, /*collided=*/true);
  CHECK(can.decode() == Pose{0, 0, Heading::S});
  can.integrate(Action::Forward, false);
  CHECK(can.decode() == Pose{0, 1, Heading::S});
}

TEST_CASE("pose attractor: random walks match dead reckoning exactly") {
  PoseAttractor can(CanConfig{.radius = 60});
  hainav::Rng rng(2024);
  for (int traj = 0; traj < 20; ++traj) {
    can.reset(Pose{0, 0, Heading::N});
    oracles::DeadReckoner dr{Pose{0, 0, Heading::N}};
    for (int t = 0; t < 120; ++t) {
      // Keep the walk inside the lattice; all forwards are collision-free.
      Action a = static_cast<Action>("\0\1\2\2"[rng.uniform_int(4)]);
      if (a == Action::Forward &&
          (std::abs(dr.pose.x) > 25 || std::abs(dr.pose.y) > 25))
        a = Action::Left;
      can.integrate(a, false);
      dr.apply(a, false);
      REQUIRE(can.decode() == dr.pose);
    }
  }
}

TEST_CASE("transition detector: debounce semantics") {
  TransitionDetector det(0.05, 3);
  CHECK(!det.update(0.0));
  CHECK(!det.update(0.2));
  CHECK(!det.update(0.2));
  CHECK(det.update(0.2));  // third consecutive high error
  det.reset();
  CHECK(!det.update(0.2));
  CHECK(!det.update(0.01));  // dip resets the streak
  CHECK(!det.update(0.2));
  CHECK(!det.update(0.2));
  CHECK(det.update(0.2));
}

TEST_CASE("recognize: empty graph yields new-place probability 1") {
  CognitiveGraph graph;
  ColorGridDecoder dec({uniform_grid({0.45, 0.05, 0.05})});
  RecognitionConfig cfg;
  const auto hyp = recognize(graph, dec, Pose{0, 0, Heading::N}, {}, cfg);
  CHECK(hyp.size() == 1);
  CHECK(hyp.new_place_prob() == doctest::Approx(1.0));
  CHECK(hyp.argmax_node() == -1);
}

TEST_CASE("recognize: matching place wins; far anchors are gated out") {
  // Room 0 is red, room 1 is blue.
  ColorGridDecoder dec({uniform_grid({0.45, 0.05, 0.05}), uniform_grid({0.075, 0.1, 0.45})});
  CognitiveGraph graph;
  const Pose anchor_a{0, 0, Heading::N};
  const Pose anchor_far{40, 40, Heading::N};
  graph.add_node(anchor_a, GaussianBelief{{0.0}, {0.5}});   // red room
  graph.add_node(anchor_far, GaussianBelief{{1.0}, {0.5}});  // blue room, far away

  RecognitionConfig cfg;
  cfg.gating_radius = 9.0;
  cfg.newplace_mse = 0.002;

  // Evidence rendered from the red room at poses near anchor A.
  std::vector<Evidence> evidence;
  for (int k = 0; k < 3; ++k)
    evidence.push_back(make_evidence(dec, 0.0, Pose{k % 2, k / 2, Heading::N}, anchor_a));

  const auto hyp = recognize(graph, dec, Pose{0, 1, Heading::N}, evidence, cfg);
  double total = 0.0;
  for (const auto& h : hyp.hypotheses) total += h.prob;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hyp.argmax_node() == 0);
  // The far node was gated out entirely.
  CHECK(hyp.prob_of(1) == 0.0);
  // A new-place candidate is always present.
  bool has_new = false;
  for (const auto& h : hyp.hypotheses) has_new |= h.node_id == -1;
  CHECK(has_new);
}

TEST_CASE("recognize: unfamiliar evidence prefers a new place") {
  ColorGridDecoder dec({uniform_grid({0.45, 0.05, 0.05}), uniform_grid({0.075, 0.1, 0.45})});
  CognitiveGraph graph;
  const Pose anchor_a{0, 0, Heading::N};
  graph.add_node(anchor_a, GaussianBelief{{0.0}, {0.5}});  // red room

  RecognitionConfig cfg;
  cfg.newplace_mse = 0.002;
  // Evidence rendered from the blue room near the same anchor.
  std::vector<Evidence> evidence;
  for (int k = 0; k < 3; ++k)
    evidence.push_back(make_evidence(dec, 1.0, Pose{k, 0, Heading::N}, anchor_a));
  const auto hyp = recognize(graph, dec, Pose{0, 0, Heading::N}, evidence, cfg);
  CHECK(hyp.argmax_node() == -1);
  CHECK(hyp.new_place_prob() > 0.9);
}

TEST_CASE("update_graph: node and edge bookkeeping") {
  CognitiveGraph graph;
  ResolvedOutcome first;
  first.node_id = -1;
  first.anchor = Pose{0, 0, Heading::N};
  first.place = GaussianBelief{{0.0}, {1.0}};
  const int a = update_graph(graph, first);
  CHECK(graph.size() == 1);
  CHECK(graph.edges().empty());

  ResolvedOutcome second;
  second.node_id = -1;
  second.anchor = Pose{6, 0, Heading::E};
  second.place = GaussianBelief{{1.0}, {1.0}};
  second.prev_node = a;
  second.door_tile = {3, 0};
  const int b = update_graph(graph, second);
  CHECK(graph.size() == 2);
  CHECK(graph.has_edge(a, b));
  CHECK(graph.has_edge(b, a));

  // Returning to A re-recognizes instead of creating a node.
  ResolvedOutcome back;
  back.node_id = a;
  back.anchor = graph.node(a).anchor;
  back.place = GaussianBelief{{0.1}, {2.0}};
  back.prev_node = b;
  back.door_tile = {3, 0};
  const double std_before = graph.node(a).place.std[0];
  const int again = update_graph(graph, back);
  CHECK(again == a);
  CHECK(graph.size() == 2);               // growth is monotone, no duplicates
  CHECK(graph.edges().size() == 2);       // edges refreshed, not duplicated
  CHECK(graph.node(a).place.std[0] < std_before);  // fused, sharper

  // Edge transform matches the anchor difference.
  for (const auto& e : graph.edges())
    if (e.from == a && e.to == b) {
      CHECK(e.dx == 6);
      CHECK(e.dy == 0);
      CHECK(e.dheading == 1);
    }
}

TEST_CASE("graph: shortest path over traversals") {
  CognitiveGraph g;
  GaussianBelief z{{0.0}, {1.0}};
  const int a = g.add_node(Pose{0, 0, Heading::N}, z);
  const int b = g.add_node(Pose{6, 0, Heading::N}, z);
  const int c = g.add_node(Pose{12, 0, Heading::N}, z);
  const int d = g.add_node(Pose{6, 6, Heading::N}, z);
  g.add_edge(a, b, {3, 0});
  g.add_edge(b, c, {9, 0});
  g.add_edge(b, d, {6, 3});
  const auto path = g.shortest_path(a, d);
  CHECK(path == std::vector<int>{a, b, d});
  CHECK(g.shortest_path(a, a) == std::vector<int>{a});
  const int lonely = g.add_node(Pose{40, 40, Heading::N}, z);
  CHECK(g.shortest_path(a, lonely).empty());
}

TEST_CASE("stitch: single node canvas reproduces its raster") {
  auto grid = uniform_grid({0.05, 0.4, 0.075});  // green room everywhere
  grid[2 * 5 + 2] = {1.0, 1.0, 1.0};             // white tile at the centre
  ColorGridDecoder dec({grid});
  CognitiveGraph graph;
  graph.add_node(Pose{10, 5, Heading::N}, GaussianBelief{{0.0}, {0.3}});

  const auto map = stitch_map(graph, dec, 2);
  CHECK(map.tiles_w == 5);
  CHECK(map.tiles_h == 5);
  const TileGuess* centre = map.guess_at(10, 5);
  REQUIRE(centre != nullptr);
  CHECK(centre->cls == TileClass::White);
  const TileGuess* side = map.guess_at(9, 5);
  REQUIRE(side != nullptr);
  CHECK(side->cls == TileClass::Floor);
  CHECK(side->color == sim::RoomColor::Green);

  const RoomRaster raster = decode_room_raster(dec, graph.node(0).place, 2);
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      CHECK(raster.at(dx, dy).cls == map.guess_at(10 + dx, 5 + dy)->cls);
}

TEST_CASE("stitch: sharper place beliefs win overlapping tiles") {
  ColorGridDecoder dec({uniform_grid({0.45, 0.05, 0.05}), uniform_grid({0.075, 0.1, 0.45})});
  CognitiveGraph graph;
  graph.add_node(Pose{0, 0, Heading::N}, GaussianBelief{{0.0}, {1.0}});  // vague red
  graph.add_node(Pose{1, 0, Heading::N}, GaussianBelief{{1.0}, {0.2}});  // sharp blue
  const auto map = stitch_map(graph, dec, 2);
  // Overlap tiles belong to the sharper node (id 1).
  CHECK(map.winner[(0 + 2) * map.tiles_w + (1 + 2)] == 1);
  const TileGuess* g = map.guess_at(1, 0);
  REQUIRE(g != nullptr);
  CHECK(g->color == sim::RoomColor::Blue);
}

TEST_CASE("tile classification maps renderer colors back to classes") {
  CHECK(classify_patch_rgb(sim::kWallRgb).cls == TileClass::Wall);
  CHECK(classify_patch_rgb(sim::kCorridorRgb).cls == TileClass::Corridor);
  CHECK(classify_patch_rgb(sim::kDoorRgb).cls == TileClass::Door);
  CHECK(classify_patch_rgb(sim::kWhiteRgb).cls == TileClass::White);
  CHECK(classify_patch_rgb({0.0, 0.0, 0.0}).cls == TileClass::Unknown);
  const auto red = classify_patch_rgb({0.45, 0.05, 0.05});
  CHECK(red.cls == TileClass::Floor);
  CHECK(red.color == sim::RoomColor::Red);
}
