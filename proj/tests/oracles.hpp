#pragma once

// Independent reference implementations used only by tests. These deliberately
// avoid sharing code with the library paths they check.

#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <vector>

#include "hainav/nn/module.hpp"
#include "hainav/sim/maze.hpp"
#include "hainav/sim/render.hpp"

namespace oracles {

using hainav::sim::Action;
using hainav::sim::Heading;
using hainav::sim::Maze;
using hainav::sim::Pose;

// Fixed-point flood visibility: starting from the agent cell, a see-through
// visible cell makes its sideways and forward (incl. diagonal) neighbours
// visible; iterate until stable.
inline std::array<bool, 49> visibility_fixed_point(const Maze& maze, const Pose& pose) {
  namespace sim = hainav::sim;
  std::array<bool, 49> vis{};
  std::array<bool, 49> through{};
  for (int wr = 0; wr < 7; ++wr)
    for (int wc = 0; wc < 7; ++wc) {
      const auto [x, y] = sim::window_tile(pose, wr, wc);
      through[wr * 7 + wc] = maze.in_bounds(x, y) && !maze.blocks_sight(x, y);
    }
  vis[6 * 7 + 3] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int wr = 0; wr < 7; ++wr)
      for (int wc = 0; wc < 7; ++wc) {
        if (!vis[wr * 7 + wc] || !through[wr * 7 + wc]) continue;
        auto mark = [&](int r, int c) {
          if (r < 0 || c < 0 || r >= 7 || c >= 7) return;
          if (!vis[r * 7 + c]) {
            vis[r * 7 + c] = true;
            changed = true;
          }
        };
        mark(wr, wc - 1);
        mark(wr, wc + 1);
        mark(wr - 1, wc - 1);
        mark(wr - 1, wc);
        mark(wr - 1, wc + 1);
      }
  }
  return vis;
}

// Breadth-first search over (x, y, heading) with unit-cost actions; returns the
// minimal number of actions to stand on the goal tile, or -1 if unreachable.
inline int bfs_action_distance(const Maze& maze, const Pose& start, int gx, int gy) {
  namespace sim = hainav::sim;
  const int W = maze.width(), H = maze.height();
  auto idx = [&](int x, int y, int h) { return (y * W + x) * 4 + h; };
  std::vector<int> dist(static_cast<size_t>(W) * H * 4, -1);
  std::deque<int> q;
  const int s0 = idx(start.x, start.y, static_cast<int>(start.heading));
  dist[s0] = 0;
  q.push_back(s0);
  while (!q.empty()) {
    const int s = q.front();
    q.pop_front();
    const int h = s % 4, x = (s / 4) % W, y = s / 4 / W;
    if (x == gx && y == gy) return dist[s];
    auto push = [&](int ns) {
      if (dist[ns] < 0) {
        dist[ns] = dist[s] + 1;
        q.push_back(ns);
      }
    };
    push(idx(x, y, (h + 1) % 4));
    push(idx(x, y, (h + 3) % 4));
    const int nx = x + sim::heading_dx(static_cast<Heading>(h));
    const int ny = y + sim::heading_dy(static_cast<Heading>(h));
    if (maze.is_walkable(nx, ny)) push(idx(nx, ny, h));
  }
  return -1;
}

// Connectivity of the room graph induced by the generated aisles.
inline bool rooms_connected(const Maze& maze) {
  const int n = maze.num_rooms();
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : maze.aisle_pairs()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::deque<int> q{0};
  seen[0] = true;
  int count = 1;
  while (!q.empty()) {
    const int r = q.front();
    q.pop_front();
    for (int m : adj[r])
      if (!seen[m]) {
        seen[m] = true;
        ++count;
        q.push_back(m);
      }
  }
  return count == n;
}

// Exact dead-reckoning pose integrator (the reference for the attractor network).
struct DeadReckoner {
  Pose pose;
  void apply(Action a, bool collided) {
    namespace sim = hainav::sim;
    switch (a) {
      case Action::Left: pose.heading = sim::turn_left(pose.heading); break;
      case Action::Right: pose.heading = sim::turn_right(pose.heading); break;
      case Action::Forward:
        if (!collided) {
          pose.x += sim::heading_dx(pose.heading);
          pose.y += sim::heading_dy(pose.heading);
        }
        break;
      case Action::StandBy: break;
    }
  }
};

// Central finite differences of a scalar function over every parameter element,
// compared against the autograd gradient. Returns the norm-wise relative error.
inline double gradient_check(hainav::nn::ParamStore& params,
                             const std::function<double()>& eval_loss,
                             const std::function<void()>& backward_pass,
                             double h_scale = 1e-5) {
  params.zero_grads();
  backward_pass();

  double num = 0.0, den_ad = 0.0, den_fd = 0.0;
  for (const auto& [name, p] : params.named()) {
    for (size_t i = 0; i < p->val.size(); ++i) {
      const double x0 = p->val[i];
      const double h = h_scale * std::max(1.0, std::abs(x0));
      p->val[i] = x0 + h;
      const double fp = eval_loss();
      p->val[i] = x0 - h;
      const double fm = eval_loss();
      p->val[i] = x0;
      const double g_fd = (fp - fm) / (2.0 * h);
      const double g_ad = p->grad.empty() ? 0.0 : p->grad[i];
      num += (g_fd - g_ad) * (g_fd - g_ad);
      den_fd += g_fd * g_fd;
      den_ad += g_ad * g_ad;
    }
  }
  const double denom = std::max({std::sqrt(den_fd), std::sqrt(den_ad), 1e-12});
  return std::sqrt(num) / denom;
}

}  // namespace oracles
