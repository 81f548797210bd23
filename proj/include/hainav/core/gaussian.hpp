#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hainav/core/rng.hpp"

namespace hainav {

// Diagonal Gaussian belief.
struct GaussianBelief {
  std::vector<double> mean;
  std::vector<double> std;

  size_t dim() const { return mean.size(); }

  static GaussianBelief standard(size_t dim) {
    return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  std::vector<double> sample(Rng& rng) const {
    std::vector<double> s(mean.size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = mean[i] + std[i] * rng.normal();
    return s;
  }
};

// Product of diagonal Gaussians: precisions add, means combine precision-weighted.
inline GaussianBelief fuse(const std::vector<GaussianBelief>& beliefs) {
  if (beliefs.empty()) throw std::invalid_argument("fuse: empty belief list");
  const size_t dim = beliefs[0].dim();
  std::vector<double> precision(dim, 0.0), weighted(dim, 0.0);
  for (const auto& b : beliefs) {
    if (b.dim() != dim) throw std::invalid_argument("fuse: dimension mismatch");
    for (size_t i = 0; i < dim; ++i) {
      const double p = 1.0 / (b.std[i] * b.std[i]);
      precision[i] += p;
      weighted[i] += p * b.mean[i];
    }
  }
  GaussianBelief out;
  out.mean.resize(dim);
  out.std.resize(dim);
  for (size_t i = 0; i < dim; ++i) {
    out.mean[i] = weighted[i] / precision[i];
    // Round the variance once, then take the square root; keeps k-fold fusion
    // of identical beliefs bit-exact for representable variances.
    out.std[i] = std::sqrt(1.0 / precision[i]);
  }
  return out;
}

// Incremental form of the same product.
inline void fuse_into(GaussianBelief& acc, const GaussianBelief& b) {
  acc = fuse({acc, b});
}

// KL(q || p) between diagonal Gaussians, in nats.
inline double gaussian_kl(const GaussianBelief& q, const GaussianBelief& p) {
  if (q.dim() != p.dim()) throw std::invalid_argument("gaussian_kl: dimension mismatch");
  double kl = 0.0;
  for (size_t i = 0; i < q.dim(); ++i) {
    const double vq = q.std[i] * q.std[i];
    const double vp = p.std[i] * p.std[i];
    const double dm = q.mean[i] - p.mean[i];
    kl += std::log(p.std[i] / q.std[i]) + (vq + dm * dm) / (2.0 * vp) - 0.5;
  }
  return kl;
}

}  // namespace hainav
