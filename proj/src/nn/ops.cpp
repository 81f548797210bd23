#include "hainav/nn/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace hainav::nn {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::VectorXd;

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor make_tensor(Vec val, std::vector<int> shape, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->shape = std::move(shape);
  n->requires_grad = requires_grad && g_grad_enabled;
  return n;
}

Tensor make_tensor(Vec val, bool requires_grad) {
  const int n = static_cast<int>(val.size());
  return make_tensor(std::move(val), std::vector<int>{n}, requires_grad);
}

Tensor zeros(int n, bool requires_grad) {
  return make_tensor(Vec(static_cast<size_t>(n), 0.0), requires_grad);
}

namespace {

bool any_requires_grad(const std::vector<Tensor>& parents) {
  for (const auto& p : parents)
    if (p->requires_grad) return true;
  return false;
}

Tensor make_op(Vec val, std::vector<int> shape, std::vector<Tensor> parents,
               std::function<void(Node&)> bw) {
  auto out = std::make_shared<Node>();
  out->val = std::move(val);
  out->shape = std::move(shape);
  if (g_grad_enabled && any_requires_grad(parents)) {
    out->requires_grad = true;
    out->parents = std::move(parents);
    out->backward_fn = std::move(bw);
  }
  return out;
}

}  // namespace

void backward(const Tensor& loss) {
  if (loss->numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
  // Post-order DFS: inputs first, loss last.
  std::vector<Tensor> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Tensor, size_t>> stack;
  if (loss->requires_grad) stack.push_back({loss, 0});
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Tensor child = node->parents[next++];
      if (child->requires_grad && seen.insert(child.get()).second) stack.push_back({child, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->ensure_grad()[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& node = **it;
    if (node.backward_fn) {
      node.ensure_grad();
      for (auto& p : node.parents)
        if (p->requires_grad) p->ensure_grad();
      node.backward_fn(node);
    }
  }
  // Dismantle edges iteratively; chained shared_ptr destruction stays shallow.
  for (auto& node : order) {
    node->parents.clear();
    node->backward_fn = nullptr;
  }
}

// --- elementwise -------------------------------------------------------------

namespace {

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& a, Fwd fwd, Bwd bwd) {
  Vec v(a->val.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = fwd(a->val[i]);
  return make_op(std::move(v), a->shape, {a}, [bwd](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (size_t i = 0; i < out.val.size(); ++i)
      pa.grad[i] += out.grad[i] * bwd(pa.val[i], out.val[i]);
  });
}

void check_same_size(const Tensor& a, const Tensor& b, const char* op) {
  if (a->val.size() != b->val.size())
    throw std::invalid_argument(std::string(op) + ": size mismatch");
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_size(a, b, "add");
  Vec v(a->val.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a->val[i] + b->val[i];
  return make_op(std::move(v), a->shape, {a, b}, [](Node& out) {
    for (int k = 0; k < 2; ++k) {
      Node& p = *out.parents[k];
      if (!p.requires_grad) continue;
      for (size_t i = 0; i < out.val.size(); ++i) p.grad[i] += out.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_size(a, b, "sub");
  Vec v(a->val.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a->val[i] - b->val[i];
  return make_op(std::move(v), a->shape, {a, b}, [](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    for (size_t i = 0; i < out.val.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += out.grad[i];
      if (pb.requires_grad) pb.grad[i] -= out.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_size(a, b, "mul");
  Vec v(a->val.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a->val[i] * b->val[i];
  return make_op(std::move(v), a->shape, {a, b}, [](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    for (size_t i = 0; i < out.val.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += out.grad[i] * pb.val[i];
      if (pb.requires_grad) pb.grad[i] += out.grad[i] * pa.val[i];
    }
  });
}

Tensor div(const Tensor& a, const Tensor& b) {
  check_same_size(a, b, "div");
  Vec v(a->val.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a->val[i] / b->val[i];
  return make_op(std::move(v), a->shape, {a, b}, [](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    for (size_t i = 0; i < out.val.size(); ++i) {
      const double inv = 1.0 / pb.val[i];
      if (pa.requires_grad) pa.grad[i] += out.grad[i] * inv;
      if (pb.requires_grad) pb.grad[i] -= out.grad[i] * pa.val[i] * inv * inv;
    }
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary_op(
      a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  return unary_op(
      a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor square(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sqrt_(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Tensor exp_(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log_(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor softplus(const Tensor& a) {
  return unary_op(
      a,
      [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_op(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

// --- shape ---------------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: empty");
  size_t total = 0;
  for (const auto& p : parts) total += p->val.size();
  Vec v;
  v.reserve(total);
  for (const auto& p : parts) v.insert(v.end(), p->val.begin(), p->val.end());
  return make_op(std::move(v), {static_cast<int>(total)}, parts, [](Node& out) {
    size_t off = 0;
    for (auto& p : out.parents) {
      if (p->requires_grad)
        for (size_t i = 0; i < p->val.size(); ++i) p->grad[i] += out.grad[off + i];
      off += p->val.size();
    }
  });
}

Tensor slice(const Tensor& a, int start, int len) {
  if (start < 0 || start + len > a->numel()) throw std::invalid_argument("slice: out of range");
  Vec v(a->val.begin() + start, a->val.begin() + start + len);
  return make_op(std::move(v), {len}, {a}, [start](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (size_t i = 0; i < out.val.size(); ++i) pa.grad[start + i] += out.grad[i];
  });
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  int n = 1;
  for (int d : shape) n *= d;
  if (n != a->numel()) throw std::invalid_argument("reshape: size mismatch");
  return make_op(Vec(a->val), std::move(shape), {a}, [](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (size_t i = 0; i < out.val.size(); ++i) pa.grad[i] += out.grad[i];
  });
}

// --- reductions / losses ---------------------------------------------------------

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a->val) s += x;
  return make_op({s}, {1}, {a}, [](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (auto& g : pa.grad) g += out.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  return mul_scalar(sum(a), 1.0 / a->numel());
}

Tensor sum_sq_diff(const Tensor& a, const Vec& target) {
  if (a->val.size() != target.size()) throw std::invalid_argument("sum_sq_diff: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    const double d = a->val[i] - target[i];
    s += d * d;
  }
  return make_op({s}, {1}, {a}, [target](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (size_t i = 0; i < target.size(); ++i)
      pa.grad[i] += out.grad[0] * 2.0 * (pa.val[i] - target[i]);
  });
}

Tensor sum_sq_diff_masked(const Tensor& a, const Vec& target, const std::vector<uint8_t>& mask) {
  if (a->val.size() != target.size() || a->val.size() != mask.size())
    throw std::invalid_argument("sum_sq_diff_masked: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    if (!mask[i]) continue;
    const double d = a->val[i] - target[i];
    s += d * d;
  }
  return make_op({s}, {1}, {a}, [target, mask](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (size_t i = 0; i < target.size(); ++i)
      if (mask[i]) pa.grad[i] += out.grad[0] * 2.0 * (pa.val[i] - target[i]);
  });
}

Tensor bce_with_logits(const Tensor& logits, const Vec& targets) {
  if (logits->val.size() != targets.size())
    throw std::invalid_argument("bce_with_logits: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    const double x = logits->val[i], t = targets[i];
    s += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  return make_op({s}, {1}, {logits}, [targets](Node& out) {
    Node& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (size_t i = 0; i < targets.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-pa.val[i]));
      pa.grad[i] += out.grad[0] * (p - targets[i]);
    }
  });
}

// --- linear algebra ---------------------------------------------------------------

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w->shape.size() != 2 || w->shape[1] != x->numel())
    throw std::invalid_argument("matvec: shape mismatch");
  const int m = w->shape[0], n = w->shape[1];
  Vec v(static_cast<size_t>(m));
  Eigen::Map<const MatRM> W(w->val.data(), m, n);
  Eigen::Map<const VectorXd> X(x->val.data(), n);
  Eigen::Map<VectorXd>(v.data(), m) = W * X;
  return make_op(std::move(v), {m}, {w, x}, [m, n](Node& out) {
    Node& pw = *out.parents[0];
    Node& px = *out.parents[1];
    Eigen::Map<const VectorXd> G(out.grad.data(), m);
    if (pw.requires_grad) {
      Eigen::Map<MatRM> dW(pw.grad.data(), m, n);
      Eigen::Map<const VectorXd> X(px.val.data(), n);
      dW.noalias() += G * X.transpose();
    }
    if (px.requires_grad) {
      Eigen::Map<const MatRM> W(pw.val.data(), m, n);
      Eigen::Map<VectorXd> dX(px.grad.data(), n);
      dX.noalias() += W.transpose() * G;
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add(matvec(w, x), b);
}

// --- spatial ------------------------------------------------------------------------

namespace {

struct ConvDims {
  int cin, h, w, cout, k, stride, pad, ho, wo;
};

void im2col(const Vec& x, const ConvDims& d, Vec& col) {
  const int patch = d.cin * d.k * d.k;
  const int n = d.ho * d.wo;
  col.assign(static_cast<size_t>(patch) * n, 0.0);
  for (int ci = 0; ci < d.cin; ++ci)
    for (int ky = 0; ky < d.k; ++ky)
      for (int kx = 0; kx < d.k; ++kx) {
        const int row = (ci * d.k + ky) * d.k + kx;
        double* dst = &col[static_cast<size_t>(row) * n];
        for (int oy = 0; oy < d.ho; ++oy) {
          const int iy = oy * d.stride - d.pad + ky;
          if (iy < 0 || iy >= d.h) continue;
          const double* src = &x[(static_cast<size_t>(ci) * d.h + iy) * d.w];
          for (int ox = 0; ox < d.wo; ++ox) {
            const int ix = ox * d.stride - d.pad + kx;
            if (ix >= 0 && ix < d.w) dst[oy * d.wo + ox] = src[ix];
          }
        }
      }
}

void col2im_add(const Vec& col, const ConvDims& d, Vec& dx) {
  const int n = d.ho * d.wo;
  for (int ci = 0; ci < d.cin; ++ci)
    for (int ky = 0; ky < d.k; ++ky)
      for (int kx = 0; kx < d.k; ++kx) {
        const int row = (ci * d.k + ky) * d.k + kx;
        const double* src = &col[static_cast<size_t>(row) * n];
        for (int oy = 0; oy < d.ho; ++oy) {
          const int iy = oy * d.stride - d.pad + ky;
          if (iy < 0 || iy >= d.h) continue;
          double* dst = &dx[(static_cast<size_t>(ci) * d.h + iy) * d.w];
          for (int ox = 0; ox < d.wo; ++ox) {
            const int ix = ox * d.stride - d.pad + kx;
            if (ix >= 0 && ix < d.w) dst[ix] += src[oy * d.wo + ox];
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int kernel, int stride, int pad) {
  if (x->shape.size() != 3) throw std::invalid_argument("conv2d: input must be CHW");
  ConvDims d;
  d.cin = x->shape[0];
  d.h = x->shape[1];
  d.w = x->shape[2];
  d.k = kernel;
  d.stride = stride;
  d.pad = pad;
  d.cout = w->shape[0];
  if (w->shape.size() != 2 || w->shape[1] != d.cin * d.k * d.k || b->numel() != d.cout)
    throw std::invalid_argument("conv2d: weight shape mismatch");
  d.ho = (d.h + 2 * pad - kernel) / stride + 1;
  d.wo = (d.w + 2 * pad - kernel) / stride + 1;

  const int patch = d.cin * d.k * d.k;
  const int n = d.ho * d.wo;
  Vec col;
  im2col(x->val, d, col);

  Vec v(static_cast<size_t>(d.cout) * n);
  {
    Eigen::Map<const MatRM> W(w->val.data(), d.cout, patch);
    Eigen::Map<const MatRM> C(col.data(), patch, n);
    Eigen::Map<MatRM> Y(v.data(), d.cout, n);
    Y.noalias() = W * C;
    for (int co = 0; co < d.cout; ++co) Y.row(co).array() += b->val[co];
  }

  return make_op(std::move(v), {d.cout, d.ho, d.wo}, {x, w, b}, [d](Node& out) {
    Node& px = *out.parents[0];
    Node& pw = *out.parents[1];
    Node& pb = *out.parents[2];
    const int patch = d.cin * d.k * d.k;
    const int n = d.ho * d.wo;
    Eigen::Map<const MatRM> dY(out.grad.data(), d.cout, n);
    if (pb.requires_grad)
      for (int co = 0; co < d.cout; ++co) pb.grad[co] += dY.row(co).sum();
    if (pw.requires_grad) {
      Vec col;
      im2col(px.val, d, col);  // recomputed; cheaper than keeping it alive
      Eigen::Map<const MatRM> C(col.data(), patch, n);
      Eigen::Map<MatRM> dW(pw.grad.data(), d.cout, patch);
      dW.noalias() += dY * C.transpose();
    }
    if (px.requires_grad) {
      Vec dcol(static_cast<size_t>(patch) * n);
      Eigen::Map<const MatRM> W(pw.val.data(), d.cout, patch);
      Eigen::Map<MatRM> dC(dcol.data(), patch, n);
      dC.noalias() = W.transpose() * dY;
      col2im_add(dcol, d, px.grad);
    }
  });
}

Tensor upsample_nearest(const Tensor& x, int out_h, int out_w) {
  if (x->shape.size() != 3) throw std::invalid_argument("upsample: input must be CHW");
  const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
  Vec v(static_cast<size_t>(c) * out_h * out_w);
  for (int ci = 0; ci < c; ++ci)
    for (int oy = 0; oy < out_h; ++oy) {
      const int iy = oy * h / out_h;
      const double* src = &x->val[(static_cast<size_t>(ci) * h + iy) * w];
      double* dst = &v[(static_cast<size_t>(ci) * out_h + oy) * out_w];
      for (int ox = 0; ox < out_w; ++ox) dst[ox] = src[ox * w / out_w];
    }
  return make_op(std::move(v), {c, out_h, out_w}, {x}, [c, h, w, out_h, out_w](Node& out) {
    Node& px = *out.parents[0];
    if (!px.requires_grad) return;
    for (int ci = 0; ci < c; ++ci)
      for (int oy = 0; oy < out_h; ++oy) {
        const int iy = oy * h / out_h;
        double* dst = &px.grad[(static_cast<size_t>(ci) * h + iy) * w];
        const double* g = &out.grad[(static_cast<size_t>(ci) * out_h + oy) * out_w];
        for (int ox = 0; ox < out_w; ++ox) dst[ox * w / out_w] += g[ox];
      }
  });
}

}  // namespace hainav::nn
