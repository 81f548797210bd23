#include "hainav/cogmap/graph.hpp"

#include <deque>
#include <sstream>

namespace hainav::cogmap {

int CognitiveGraph::add_node(const sim::Pose& anchor, GaussianBelief place, int color_tag) {
  LocationNode n;
  n.experience_id = static_cast<int>(nodes_.size());
  n.place = std::move(place);
  n.anchor = anchor;
  n.color_tag = color_tag;
  nodes_.push_back(std::move(n));
  return nodes_.back().experience_id;
}

void CognitiveGraph::fuse_into_node(int id, const GaussianBelief& evidence) {
  LocationNode& n = nodes_.at(id);
  n.place = fuse({n.place, evidence});
}

void CognitiveGraph::add_edge(int from, int to, std::pair<int, int> door_tile) {
  if (from == to) return;
  const sim::Pose& a = nodes_.at(from).anchor;
  const sim::Pose& b = nodes_.at(to).anchor;
  GraphEdge e;
  e.from = from;
  e.to = to;
  e.dx = b.x - a.x;
  e.dy = b.y - a.y;
  e.dheading = (static_cast<int>(b.heading) - static_cast<int>(a.heading) + 4) % 4;
  e.door_x = door_tile.first;
  e.door_y = door_tile.second;
  for (GraphEdge& existing : edges_)
    if (existing.from == from && existing.to == to) {
      existing = e;  // refresh
      return;
    }
  edges_.push_back(e);
}

std::vector<int> CognitiveGraph::neighbors(int id) const {
  std::vector<int> out;
  for (const GraphEdge& e : edges_) {
    if (e.from == id) out.push_back(e.to);
    if (e.to == id) out.push_back(e.from);
  }
  return out;
}

bool CognitiveGraph::has_edge(int from, int to) const {
  for (const GraphEdge& e : edges_)
    if (e.from == from && e.to == to) return true;
  return false;
}

std::vector<int> CognitiveGraph::shortest_path(int from, int to) const {
  if (from == to) return {from};
  std::vector<int> prev(nodes_.size(), -2);
  std::deque<int> q{from};
  prev[from] = -1;
  while (!q.empty()) {
    const int cur = q.front();
    q.pop_front();
    for (int nb : neighbors(cur)) {
      if (prev[nb] != -2) continue;
      prev[nb] = cur;
      if (nb == to) {
        std::vector<int> path{to};
        for (int p = cur; p != -1; p = prev[p]) path.push_back(p);
        std::reverse(path.begin(), path.end());
        return path;
      }
      q.push_back(nb);
    }
  }
  return {};
}

std::string CognitiveGraph::export_text() const {
  std::ostringstream out;
  out << "hainav-graph 1\n";
  out << nodes_.size() << ' ' << edges_.size() << '\n';
  for (const LocationNode& n : nodes_) {
    out << "node " << n.experience_id << ' ' << n.anchor.x << ' ' << n.anchor.y << ' '
        << static_cast<int>(n.anchor.heading);
    for (double v : n.place.mean) out << ' ' << v;
    for (double v : n.place.std) out << ' ' << v;
    out << '\n';
  }
  for (const GraphEdge& e : edges_)
    out << "edge " << e.from << ' ' << e.to << ' ' << e.dx << ' ' << e.dy << ' ' << e.dheading
        << '\n';
  return out.str();
}

}  // namespace hainav::cogmap
