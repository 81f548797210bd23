#include "hainav/cogmap/pose_can.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hainav::cogmap {

PoseAttractor::PoseAttractor(CanConfig cfg) : cfg_(cfg) {
  act_.assign(static_cast<size_t>(4) * side() * side(), 0.0);
  reset(sim::Pose{0, 0, sim::Heading::N});
}

void PoseAttractor::reset(const sim::Pose& pose) {
  std::fill(act_.begin(), act_.end(), 0.0);
  origin_x_ = pose.x;
  origin_y_ = pose.y;
  const int c = cfg_.radius;
  act_[idx(static_cast<int>(pose.heading), c, c)] = 1.0;
  lo_x_ = hi_x_ = lo_y_ = hi_y_ = c;
}

void PoseAttractor::snap(const sim::Pose& pose) { reset(pose); }

void PoseAttractor::integrate(sim::Action action, bool collided) {
  const int c2 = side();
  switch (action) {
    case sim::Action::Left:
    case sim::Action::Right: {
      // Rotate: permute heading layers in place.
      const int shift = action == sim::Action::Left ? 3 : 1;  // +3 == -1 mod 4
      std::vector<double> rotated(act_.size(), 0.0);
      for (int h = 0; h < 4; ++h) {
        const int nh = (h + shift) % 4;
        std::copy(act_.begin() + idx(h, 0, 0), act_.begin() + idx(h, 0, 0) + c2 * c2,
                  rotated.begin() + idx(nh, 0, 0));
      }
      act_.swap(rotated);
      break;
    }
    case sim::Action::Forward: {
      if (collided) break;
      // Each heading layer shifts one cell along its own direction.
      std::vector<double> shifted(act_.size(), 0.0);
      for (int h = 0; h < 4; ++h) {
        const int dx = sim::heading_dx(static_cast<sim::Heading>(h));
        const int dy = sim::heading_dy(static_cast<sim::Heading>(h));
        for (int iy = std::max(0, lo_y_ - 1); iy <= std::min(c2 - 1, hi_y_ + 1); ++iy)
          for (int ix = std::max(0, lo_x_ - 1); ix <= std::min(c2 - 1, hi_x_ + 1); ++ix) {
            const int sy = iy - dy, sx = ix - dx;
            if (sy < 0 || sx < 0 || sy >= c2 || sx >= c2) continue;
            shifted[idx(h, iy, ix)] = act_[idx(h, sy, sx)];
          }
      }
      act_.swap(shifted);
      lo_x_ = std::max(0, lo_x_ - 1);
      hi_x_ = std::min(c2 - 1, hi_x_ + 1);
      lo_y_ = std::max(0, lo_y_ - 1);
      hi_y_ = std::min(c2 - 1, hi_y_ + 1);
      break;
    }
    case sim::Action::StandBy: break;
  }
  excite_inhibit_normalize();
}

void PoseAttractor::excite_inhibit_normalize() {
  const int c2 = side();
  // 3x3 spatial Gaussian, applied per heading layer.
  double k[3][3];
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      k[dy + 1][dx + 1] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * cfg_.excite_sigma * cfg_.excite_sigma));

  const int blo_x = std::max(0, lo_x_ - 1), bhi_x = std::min(c2 - 1, hi_x_ + 1);
  const int blo_y = std::max(0, lo_y_ - 1), bhi_y = std::min(c2 - 1, hi_y_ + 1);

  std::vector<double> next(act_.size(), 0.0);
  double peak = 0.0;
  for (int h = 0; h < 4; ++h)
    for (int iy = blo_y; iy <= bhi_y; ++iy)
      for (int ix = blo_x; ix <= bhi_x; ++ix) {
        double v = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int sy = iy + dy, sx = ix + dx;
            if (sy < 0 || sx < 0 || sy >= c2 || sx >= c2) continue;
            v += k[dy + 1][dx + 1] * act_[idx(h, sy, sx)];
          }
        next[idx(h, iy, ix)] = v;
        peak = std::max(peak, v);
      }

  // Global inhibition with clamp at zero, then renormalize.
  const double cut = cfg_.inhibit * peak;
  double total = 0.0;
  int nlo_x = c2, nhi_x = -1, nlo_y = c2, nhi_y = -1;
  for (int h = 0; h < 4; ++h)
    for (int iy = blo_y; iy <= bhi_y; ++iy)
      for (int ix = blo_x; ix <= bhi_x; ++ix) {
        double v = next[idx(h, iy, ix)] - cut;
        if (v < cfg_.activity_floor) v = 0.0;
        next[idx(h, iy, ix)] = v;
        if (v > 0.0) {
          total += v;
          nlo_x = std::min(nlo_x, ix);
          nhi_x = std::max(nhi_x, ix);
          nlo_y = std::min(nlo_y, iy);
          nhi_y = std::max(nhi_y, iy);
        }
      }
  if (total <= 0.0 || nhi_x < 0) throw std::runtime_error("pose attractor: packet vanished");
  for (int h = 0; h < 4; ++h)
    for (int iy = nlo_y; iy <= nhi_y; ++iy)
      for (int ix = nlo_x; ix <= nhi_x; ++ix) next[idx(h, iy, ix)] /= total;
  act_.swap(next);
  lo_x_ = nlo_x;
  hi_x_ = nhi_x;
  lo_y_ = nlo_y;
  hi_y_ = nhi_y;
}

sim::Pose PoseAttractor::decode() const {
  // Heading: the layer holding the most activity. Position: centroid.
  double layer_mass[4] = {0, 0, 0, 0};
  double cx = 0.0, cy = 0.0, total = 0.0;
  for (int h = 0; h < 4; ++h)
    for (int iy = lo_y_; iy <= hi_y_; ++iy)
      for (int ix = lo_x_; ix <= hi_x_; ++ix) {
        const double v = act_[idx(h, iy, ix)];
        if (v <= 0.0) continue;
        layer_mass[h] += v;
        cx += v * ix;
        cy += v * iy;
        total += v;
      }
  int best_h = 0;
  for (int h = 1; h < 4; ++h)
    if (layer_mass[h] > layer_mass[best_h]) best_h = h;
  sim::Pose p;
  p.x = static_cast<int>(std::lround(cx / total)) - cfg_.radius + origin_x_;
  p.y = static_cast<int>(std::lround(cy / total)) - cfg_.radius + origin_y_;
  p.heading = static_cast<sim::Heading>(best_h);
  return p;
}

double PoseAttractor::activity_sum() const {
  double s = 0.0;
  for (double v : act_) s += v;
  return s;
}

double PoseAttractor::activity(int x, int y, int heading) const {
  const int ix = x - origin_x_ + cfg_.radius;
  const int iy = y - origin_y_ + cfg_.radius;
  if (ix < 0 || iy < 0 || ix >= side() || iy >= side()) return 0.0;
  return act_[idx(heading, iy, ix)];
}

}  // namespace hainav::cogmap
