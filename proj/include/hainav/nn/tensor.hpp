#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hainav::nn {

using Vec = std::vector<double>;

struct Node;
using Tensor = std::shared_ptr<Node>;

// One value in a dynamically built computation graph. Gradients accumulate
// into `grad` when backward() runs from a scalar loss.
struct Node {
  Vec val;
  Vec grad;
  std::vector<int> shape;
  std::vector<Tensor> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;

  int numel() const { return static_cast<int>(val.size()); }
  Vec& ensure_grad() {
    if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
    return grad;
  }
};

// While a guard is alive on this thread, ops produce plain values with no
// graph edges; evaluation-only code paths use this to skip bookkeeping.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};
bool grad_enabled();

Tensor make_tensor(Vec val, std::vector<int> shape, bool requires_grad = false);
Tensor make_tensor(Vec val, bool requires_grad = false);
Tensor zeros(int n, bool requires_grad = false);

// Accumulates d(loss)/d(node) into every reachable node's grad, then releases
// the graph (parents and closures) so deep chains never unwind recursively.
void backward(const Tensor& loss);

// --- elementwise ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor square(const Tensor& a);
Tensor sqrt_(const Tensor& a);
Tensor exp_(const Tensor& a);
Tensor log_(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh_(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.01);

// --- shape ---
Tensor concat(const std::vector<Tensor>& parts);
Tensor slice(const Tensor& a, int start, int len);
Tensor reshape(const Tensor& a, std::vector<int> shape);

// --- reductions / losses ---
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// sum((a - target)^2); target is a constant.
Tensor sum_sq_diff(const Tensor& a, const Vec& target);
// Same, restricted to elements where mask != 0.
Tensor sum_sq_diff_masked(const Tensor& a, const Vec& target, const std::vector<uint8_t>& mask);
// sum over elements of BCE(sigmoid(logit), target), numerically stable.
Tensor bce_with_logits(const Tensor& logits, const Vec& targets);

// --- linear algebra ---
// W: [m, n], x: [n] -> [m]
Tensor matvec(const Tensor& w, const Tensor& x);
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// --- spatial (CHW layout) ---
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int kernel, int stride, int pad);
Tensor upsample_nearest(const Tensor& x, int out_h, int out_w);

}  // namespace hainav::nn
