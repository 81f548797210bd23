#pragma once

#include <vector>

#include "hainav/sim/maze.hpp"

namespace hainav::cogmap {

struct CanConfig {
  int radius = 80;             // lattice spans [-radius, radius]^2 around the reset pose
  double excite_sigma = 0.6;   // spatial excitation kernel width (cells)
  double inhibit = 0.02;       // uniform inhibition, fraction of the peak
  double activity_floor = 1e-12;
};

// Continuous attractor over a discretized (x, y, heading) lattice. The packet
// is shifted by the motion model, locally excited, globally inhibited and
// renormalized every update; the decoded pose is the activity centroid.
class PoseAttractor {
 public:
  explicit PoseAttractor(CanConfig cfg = {});

  void reset(const sim::Pose& pose);
  // Forward translates one tile along the packet's heading layer unless the
  // step collided; left/right rotate the heading layers.
  void integrate(sim::Action action, bool collided);
  sim::Pose decode() const;
  // Recenters the packet on a corrected pose (used after place recognition).
  void snap(const sim::Pose& pose);

  double activity_sum() const;
  double activity(int x, int y, int heading) const;  // global coordinates
  const CanConfig& config() const { return cfg_; }

 private:
  int side() const { return 2 * cfg_.radius + 1; }
  size_t idx(int h, int iy, int ix) const {
    return (static_cast<size_t>(h) * side() + iy) * side() + ix;
  }
  void excite_inhibit_normalize();

  CanConfig cfg_;
  std::vector<double> act_;
  int origin_x_ = 0, origin_y_ = 0;  // lattice centre in global coordinates
  // Active bounding box (inclusive), per update; keeps updates local.
  int lo_x_ = 0, hi_x_ = 0, lo_y_ = 0, hi_y_ = 0;
};

}  // namespace hainav::cogmap
