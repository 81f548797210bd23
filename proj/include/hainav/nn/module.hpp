#pragma once

#include <map>
#include <string>
#include <vector>

#include "hainav/core/rng.hpp"
#include "hainav/nn/tensor.hpp"

namespace hainav::nn {

// Named parameter set; the checkpoint format is the (name -> tensor) map.
class ParamStore {
 public:
  // Uniform(-scale, scale) initialization.
  Tensor create(const std::string& name, std::vector<int> shape, double scale, Rng& rng);
  Tensor create_zeros(const std::string& name, std::vector<int> shape);

  Tensor get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }

  // Deterministic (name-sorted) parameter order.
  std::vector<Tensor> all() const;
  std::vector<std::pair<std::string, Tensor>> named() const;

  void copy_values_from(const ParamStore& other);
  void accumulate_grads_from(const ParamStore& other);
  void zero_grads();

  size_t total_params() const;

 private:
  std::map<std::string, Tensor> params_;
};

// Kaiming-style bound for a layer with the given fan-in.
inline double init_scale(int fan_in) { return std::sqrt(3.0) / std::sqrt(static_cast<double>(fan_in)); }

class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad();
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  std::vector<Tensor> params_;
  std::vector<Vec> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace hainav::nn
