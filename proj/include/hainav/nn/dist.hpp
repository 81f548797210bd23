#pragma once

#include "hainav/core/gaussian.hpp"
#include "hainav/nn/tensor.hpp"

namespace hainav::nn {

// Splits a 2*dim head output into (mean, std); std through softplus plus a floor.
inline std::pair<Tensor, Tensor> gaussian_head(const Tensor& raw, int dim, double std_floor) {
  Tensor mean = slice(raw, 0, dim);
  Tensor std = add_scalar(softplus(slice(raw, dim, dim)), std_floor);
  return {mean, std};
}

// KL(q || p) between diagonal Gaussians as a graph node (scalar).
inline Tensor gaussian_kl_t(const Tensor& mq, const Tensor& sq, const Tensor& mp,
                            const Tensor& sp) {
  Tensor var_ratio = div(square(sq), square(sp));
  Tensor mean_term = div(square(sub(mq, mp)), square(sp));
  Tensor log_ratio = sub(log_(sp), log_(sq));
  Tensor per_dim = add(log_ratio,
                       add_scalar(mul_scalar(add(var_ratio, mean_term), 0.5), -0.5));
  return sum(per_dim);
}

inline Tensor reparam_sample(const Tensor& mean, const Tensor& std, const Vec& eps) {
  return add(mean, mul(std, make_tensor(Vec(eps))));
}

inline GaussianBelief to_belief(const Tensor& mean, const Tensor& std) {
  return {mean->val, std->val};
}

}  // namespace hainav::nn
