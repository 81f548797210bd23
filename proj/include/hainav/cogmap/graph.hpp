#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hainav/core/gaussian.hpp"
#include "hainav/sim/maze.hpp"

namespace hainav::cogmap {

struct LocationNode {
  int experience_id = -1;
  GaussianBelief place;   // room code belief
  sim::Pose anchor;       // global pose at first entry
  int color_tag = -1;     // diagnostic only
};

struct GraphEdge {
  int from = -1, to = -1;
  int dx = 0, dy = 0, dheading = 0;     // anchor_to - anchor_from
  int door_x = 0, door_y = 0;           // where the traversal was detected
};

// Topological map of experienced places. Nodes are never deleted; edges are
// unique per ordered pair and refreshed on re-traversal.
class CognitiveGraph {
 public:
  int add_node(const sim::Pose& anchor, GaussianBelief place, int color_tag = -1);
  void fuse_into_node(int id, const GaussianBelief& evidence);

  void add_edge(int from, int to, std::pair<int, int> door_tile);

  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  const LocationNode& node(int id) const { return nodes_.at(id); }
  LocationNode& node(int id) { return nodes_.at(id); }
  const std::vector<LocationNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  std::vector<int> neighbors(int id) const;
  bool has_edge(int from, int to) const;
  // Unweighted shortest node path (inclusive of both ends); empty if none.
  std::vector<int> shortest_path(int from, int to) const;

  std::string export_text() const;

 private:
  std::vector<LocationNode> nodes_;
  std::vector<GraphEdge> edges_;
};

}  // namespace hainav::cogmap
