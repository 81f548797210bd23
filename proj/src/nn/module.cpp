#include "hainav/nn/module.hpp"

#include <cmath>
#include <stdexcept>

namespace hainav::nn {

Tensor ParamStore::create(const std::string& name, std::vector<int> shape, double scale,
                          Rng& rng) {
  int n = 1;
  for (int d : shape) n *= d;
  Vec v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(-scale, scale);
  auto t = make_tensor(std::move(v), std::move(shape), /*requires_grad=*/true);
  t->requires_grad = true;  // params stay trainable even under NoGradGuard at creation
  if (!params_.emplace(name, t).second) throw std::invalid_argument("duplicate param " + name);
  return t;
}

Tensor ParamStore::create_zeros(const std::string& name, std::vector<int> shape) {
  int n = 1;
  for (int d : shape) n *= d;
  auto t = make_tensor(Vec(static_cast<size_t>(n), 0.0), std::move(shape), true);
  t->requires_grad = true;
  if (!params_.emplace(name, t).second) throw std::invalid_argument("duplicate param " + name);
  return t;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("missing param " + name);
  return it->second;
}

std::vector<Tensor> ParamStore::all() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [_, t] : params_) out.push_back(t);
  return out;
}

std::vector<std::pair<std::string, Tensor>> ParamStore::named() const {
  return {params_.begin(), params_.end()};
}

void ParamStore::copy_values_from(const ParamStore& other) {
  for (auto& [name, t] : params_) t->val = other.get(name)->val;
}

void ParamStore::accumulate_grads_from(const ParamStore& other) {
  for (auto& [name, t] : params_) {
    const Tensor& src = other.get(name);
    if (src->grad.empty()) continue;
    t->ensure_grad();
    for (size_t i = 0; i < t->grad.size(); ++i) t->grad[i] += src->grad[i];
  }
}

void ParamStore::zero_grads() {
  for (auto& [_, t] : params_) {
    if (!t->grad.empty()) std::fill(t->grad.begin(), t->grad.end(), 0.0);
  }
}

size_t ParamStore::total_params() const {
  size_t n = 0;
  for (const auto& [_, t] : params_) n += t->val.size();
  return n;
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p->val.size(), 0.0);
    v_.emplace_back(p->val.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Node& p = *params_[k];
    if (p.grad.empty()) continue;
    for (size_t i = 0; i < p.val.size(); ++i) {
      const double g = p.grad[i];
      m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
      v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
      p.val[i] -= lr_ * (m_[k][i] / bc1) / (std::sqrt(v_[k][i] / bc2) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_)
    if (!p->grad.empty()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

}  // namespace hainav::nn
