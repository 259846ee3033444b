// Copyright 2026 The w2n Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "w2n/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <Eigen/Dense>

#include "w2n/errors.hpp"

namespace w2n::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

thread_local bool g_grad_enabled = true;

bool needs_history(std::initializer_list<const Var*> inputs) {
  if (!g_grad_enabled) return false;
  for (const Var* v : inputs) {
    if (*v && (*v)->requires_grad) return true;
  }
  return false;
}

Var make_result(Shape shape, std::vector<double> value,
                std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto out = std::make_shared<Node>();
  out->shape = std::move(shape);
  out->value = std::move(value);
  if (!fn) return out;
  out->requires_grad = true;
  out->parents = std::move(parents);
  out->backward_fn = std::move(fn);
  return out;
}

void require_rank(const Var& x, std::size_t rank, const char* op) {
  if (!x || x->shape.size() != rank) {
    throw ArgumentError(std::string(op) + ": expected rank " +
                        std::to_string(rank) + " tensor, got " +
                        (x ? shape_string(x->shape) : std::string("null")));
  }
}

}  // namespace

std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1},
                         [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

std::string shape_string(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

void Node::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
}

Var constant(Shape shape, std::vector<double> values) {
  if (numel(shape) != values.size()) {
    throw ArgumentError("constant: shape " + shape_string(shape) +
                        " does not match " + std::to_string(values.size()) +
                        " values");
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  return n;
}

Var constant(Shape shape, double fill) {
  const std::size_t n = numel(shape);
  return constant(std::move(shape), std::vector<double>(n, fill));
}

Var parameter(Shape shape, std::vector<double> values) {
  auto n = constant(std::move(shape), std::move(values));
  n->requires_grad = true;
  n->ensure_grad();
  return n;
}

Var detach(const Var& x) { return constant(x->shape, x->value); }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var conv2d(const Var& x, const Var& weight, const Var& bias,
           const Conv2dOptions& opt) {
  require_rank(x, 3, "conv2d");
  require_rank(weight, 4, "conv2d weight");
  const int cin = x->shape[0], h = x->shape[1], w = x->shape[2];
  const int cout = weight->shape[0], kh = weight->shape[2], kw = weight->shape[3];
  if (weight->shape[1] != cin) {
    throw ArgumentError("conv2d: input has " + std::to_string(cin) +
                        " channels, weight expects " +
                        std::to_string(weight->shape[1]));
  }
  if (bias && (bias->shape.size() != 1 || bias->shape[0] != cout)) {
    throw ArgumentError("conv2d: bias shape mismatch");
  }
  const int sh = opt.stride_h, sw = opt.stride_w, ph = opt.pad_h, pw = opt.pad_w;
  const int ho = (h + 2 * ph - kh) / sh + 1;
  const int wo = (w + 2 * pw - kw) / sw + 1;
  if (ho < 1 || wo < 1) {
    throw ArgumentError("conv2d: kernel larger than padded input " +
                        shape_string(x->shape));
  }
  const int k = cin * kh * kw;
  const int cols_n = ho * wo;

  auto cols = std::make_shared<std::vector<double>>(static_cast<std::size_t>(k) * cols_n, 0.0);
  {
    const double* xv = x->value.data();
    double* cv = cols->data();
    for (int c = 0; c < cin; ++c) {
      for (int i = 0; i < kh; ++i) {
        for (int j = 0; j < kw; ++j) {
          double* row = cv + static_cast<std::size_t>((c * kh + i) * kw + j) * cols_n;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * sh - ph + i;
            if (iy < 0 || iy >= h) continue;
            const double* xrow = xv + (static_cast<std::size_t>(c) * h + iy) * w;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * sw - pw + j;
              if (ix >= 0 && ix < w) row[oy * wo + ox] = xrow[ix];
            }
          }
        }
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(cout) * cols_n);
  {
    ConstMapMat wm(weight->value.data(), cout, k);
    ConstMapMat cm(cols->data(), k, cols_n);
    MapMat om(out.data(), cout, cols_n);
    om.noalias() = wm * cm;
    if (bias) {
      for (int c = 0; c < cout; ++c) om.row(c).array() += bias->value[c];
    }
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x, &weight, &bias})) {
    fn = [x, weight, bias, cols, cin, h, w, cout, kh, kw, sh, sw, ph, pw, ho, wo,
          k, cols_n](Node& self) {
      ConstMapMat dout(self.grad.data(), cout, cols_n);
      if (weight->requires_grad) {
        weight->ensure_grad();
        MapMat dw(weight->grad.data(), cout, k);
        ConstMapMat cm(cols->data(), k, cols_n);
        dw.noalias() += dout * cm.transpose();
      }
      if (bias && bias->requires_grad) {
        bias->ensure_grad();
        for (int c = 0; c < cout; ++c) bias->grad[c] += dout.row(c).sum();
      }
      if (x->requires_grad) {
        x->ensure_grad();
        ConstMapMat wm(weight->value.data(), cout, k);
        RowMat dcols = wm.transpose() * dout;
        double* dx = x->grad.data();
        for (int c = 0; c < cin; ++c) {
          for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
              const double* row = dcols.data() + static_cast<std::size_t>((c * kh + i) * kw + j) * cols_n;
              for (int oy = 0; oy < ho; ++oy) {
                const int iy = oy * sh - ph + i;
                if (iy < 0 || iy >= h) continue;
                double* xrow = dx + (static_cast<std::size_t>(c) * h + iy) * w;
                for (int ox = 0; ox < wo; ++ox) {
                  const int ix = ox * sw - pw + j;
                  if (ix >= 0 && ix < w) xrow[ix] += row[oy * wo + ox];
                }
              }
            }
          }
        }
      }
    };
  }
  return make_result({cout, ho, wo}, std::move(out), {x, weight, bias}, std::move(fn));
}

Var instance_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_rank(x, 3, "instance_norm");
  const int c = x->shape[0];
  const std::size_t n = static_cast<std::size_t>(x->shape[1]) * x->shape[2];
  if (gamma->size() != static_cast<std::size_t>(c) ||
      beta->size() != static_cast<std::size_t>(c)) {
    throw ArgumentError("instance_norm: affine parameter size mismatch");
  }
  auto xhat = std::make_shared<std::vector<double>>(x->size());
  auto inv_std = std::make_shared<std::vector<double>>(c);
  std::vector<double> out(x->size());
  for (int ch = 0; ch < c; ++ch) {
    const double* xv = x->value.data() + ch * n;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += xv[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (xv[i] - mean) * (xv[i] - mean);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[ch] = is;
    for (std::size_t i = 0; i < n; ++i) {
      const double xh = (xv[i] - mean) * is;
      (*xhat)[ch * n + i] = xh;
      out[ch * n + i] = gamma->value[ch] * xh + beta->value[ch];
    }
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x, &gamma, &beta})) {
    fn = [x, gamma, beta, xhat, inv_std, c, n](Node& self) {
      if (gamma->requires_grad) gamma->ensure_grad();
      if (beta->requires_grad) beta->ensure_grad();
      if (x->requires_grad) x->ensure_grad();
      const double nd = static_cast<double>(n);
      for (int ch = 0; ch < c; ++ch) {
        const double* dy = self.grad.data() + ch * n;
        const double* xh = xhat->data() + ch * n;
        double sum_dy = 0.0, sum_dy_xh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          sum_dy += dy[i];
          sum_dy_xh += dy[i] * xh[i];
        }
        if (gamma->requires_grad) gamma->grad[ch] += sum_dy_xh;
        if (beta->requires_grad) beta->grad[ch] += sum_dy;
        if (x->requires_grad) {
          const double g = gamma->value[ch];
          const double k = g * (*inv_std)[ch] / nd;
          double* dx = x->grad.data() + ch * n;
          for (std::size_t i = 0; i < n; ++i) {
            dx[i] += k * (nd * dy[i] - sum_dy - xh[i] * sum_dy_xh);
          }
        }
      }
    };
  }
  return make_result(x->shape, std::move(out), {x, gamma, beta}, std::move(fn));
}

Var glu(const Var& x) {
  require_rank(x, 3, "glu");
  if (x->shape[0] % 2 != 0) throw ArgumentError("glu: odd channel count");
  const int half = x->shape[0] / 2;
  const std::size_t n = static_cast<std::size_t>(half) * x->shape[1] * x->shape[2];
  auto gate = std::make_shared<std::vector<double>>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    (*gate)[i] = sigmoid(x->value[n + i]);
    out[i] = x->value[i] * (*gate)[i];
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x})) {
    fn = [x, gate, n](Node& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double g = (*gate)[i];
        x->grad[i] += self.grad[i] * g;
        x->grad[n + i] += self.grad[i] * x->value[i] * g * (1.0 - g);
      }
    };
  }
  return make_result({half, x->shape[1], x->shape[2]}, std::move(out), {x}, std::move(fn));
}

Var pixel_shuffle(const Var& x, int r) {
  require_rank(x, 3, "pixel_shuffle");
  if (r < 1 || x->shape[0] % (r * r) != 0) {
    throw ArgumentError("pixel_shuffle: channels not divisible by r^2");
  }
  const int c = x->shape[0] / (r * r), h = x->shape[1], w = x->shape[2];
  const int oh = h * r, ow = w * r;
  // out index -> in index
  auto map = std::make_shared<std::vector<std::size_t>>(x->size());
  std::vector<double> out(x->size());
  for (int ch = 0; ch < c; ++ch) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const int in_c = ch * r * r + i * r + j;
        for (int y = 0; y < h; ++y) {
          for (int xx = 0; xx < w; ++xx) {
            const std::size_t src = (static_cast<std::size_t>(in_c) * h + y) * w + xx;
            const std::size_t dst =
                (static_cast<std::size_t>(ch) * oh + y * r + i) * ow + xx * r + j;
            (*map)[dst] = src;
            out[dst] = x->value[src];
          }
        }
      }
    }
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x})) {
    fn = [x, map](Node& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < map->size(); ++i) x->grad[(*map)[i]] += self.grad[i];
    };
  }
  return make_result({c, oh, ow}, std::move(out), {x}, std::move(fn));
}

Var reshape(const Var& x, Shape shape) {
  if (numel(shape) != x->size()) {
    throw ArgumentError("reshape: " + shape_string(x->shape) + " -> " +
                        shape_string(shape));
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x})) {
    fn = [x](Node& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) x->grad[i] += self.grad[i];
    };
  }
  return make_result(std::move(shape), x->value, {x}, std::move(fn));
}

Var add(const Var& a, const Var& b) {
  if (a->shape != b->shape) {
    throw ArgumentError("add: " + shape_string(a->shape) + " vs " +
                        shape_string(b->shape));
  }
  std::vector<double> out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  std::function<void(Node&)> fn;
  if (needs_history({&a, &b})) {
    fn = [a, b](Node& self) {
      for (const Var* v : {&a, &b}) {
        if (!(*v)->requires_grad) continue;
        (*v)->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*v)->grad[i] += self.grad[i];
      }
    };
  }
  return make_result(a->shape, std::move(out), {a, b}, std::move(fn));
}

Var scale(const Var& a, double s) {
  std::vector<double> out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * s;
  std::function<void(Node&)> fn;
  if (needs_history({&a})) {
    fn = [a, s](Node& self) {
      a->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) a->grad[i] += s * self.grad[i];
    };
  }
  return make_result(a->shape, std::move(out), {a}, std::move(fn));
}

Var concat_channels(const Var& a, const Var& b) {
  require_rank(a, 3, "concat_channels");
  require_rank(b, 3, "concat_channels");
  if (a->shape[1] != b->shape[1] || a->shape[2] != b->shape[2]) {
    throw ArgumentError("concat_channels: spatial mismatch");
  }
  std::vector<double> out(a->value);
  out.insert(out.end(), b->value.begin(), b->value.end());
  std::function<void(Node&)> fn;
  if (needs_history({&a, &b})) {
    fn = [a, b](Node& self) {
      const std::size_t na = a->size();
      if (a->requires_grad) {
        a->ensure_grad();
        for (std::size_t i = 0; i < na; ++i) a->grad[i] += self.grad[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (std::size_t i = 0; i < b->size(); ++i) b->grad[i] += self.grad[na + i];
      }
    };
  }
  return make_result({a->shape[0] + b->shape[0], a->shape[1], a->shape[2]},
                     std::move(out), {a, b}, std::move(fn));
}

Var pad_to(const Var& x, int h, int w) {
  require_rank(x, 3, "pad_to");
  const int c = x->shape[0], ih = x->shape[1], iw = x->shape[2];
  if (h < ih || w < iw) throw ArgumentError("pad_to: target smaller than input");
  if (h == ih && w == iw) return x;
  std::vector<double> out(static_cast<std::size_t>(c) * h * w, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < ih; ++y) {
      std::copy_n(x->value.data() + (static_cast<std::size_t>(ch) * ih + y) * iw, iw,
                  out.data() + (static_cast<std::size_t>(ch) * h + y) * w);
    }
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x})) {
    fn = [x, c, ih, iw, h, w](Node& self) {
      x->ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < ih; ++y) {
          const double* src = self.grad.data() + (static_cast<std::size_t>(ch) * h + y) * w;
          double* dst = x->grad.data() + (static_cast<std::size_t>(ch) * ih + y) * iw;
          for (int i = 0; i < iw; ++i) dst[i] += src[i];
        }
      }
    };
  }
  return make_result({c, h, w}, std::move(out), {x}, std::move(fn));
}

Var crop_to(const Var& x, int h, int w) {
  require_rank(x, 3, "crop_to");
  const int c = x->shape[0], ih = x->shape[1], iw = x->shape[2];
  if (h > ih || w > iw || h < 1 || w < 1) throw ArgumentError("crop_to: bad target");
  if (h == ih && w == iw) return x;
  std::vector<double> out(static_cast<std::size_t>(c) * h * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      std::copy_n(x->value.data() + (static_cast<std::size_t>(ch) * ih + y) * iw, w,
                  out.data() + (static_cast<std::size_t>(ch) * h + y) * w);
    }
  }
  std::function<void(Node&)> fn;
  if (needs_history({&x})) {
    fn = [x, c, ih, iw, h, w](Node& self) {
      x->ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
          const double* src = self.grad.data() + (static_cast<std::size_t>(ch) * h + y) * w;
          double* dst = x->grad.data() + (static_cast<std::size_t>(ch) * ih + y) * iw;
          for (int i = 0; i < w; ++i) dst[i] += src[i];
        }
      }
    };
  }
  return make_result({c, h, w}, std::move(out), {x}, std::move(fn));
}

Var mean_squared_to(const Var& x, double target) {
  const double n = static_cast<double>(x->size());
  double acc = 0.0;
  for (double v : x->value) acc += (v - target) * (v - target);
  std::function<void(Node&)> fn;
  if (needs_history({&x})) {
    fn = [x, target, n](Node& self) {
      x->ensure_grad();
      const double g = self.grad[0] * 2.0 / n;
      for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += g * (x->value[i] - target);
    };
  }
  return make_result({1}, {acc / n}, {x}, std::move(fn));
}

Var mean_abs_diff(const Var& a, const Var& b) {
  if (a->size() != b->size()) throw ArgumentError("mean_abs_diff: size mismatch");
  const double n = static_cast<double>(a->size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) acc += std::abs(a->value[i] - b->value[i]);
  std::function<void(Node&)> fn;
  if (needs_history({&a, &b})) {
    fn = [a, b, n](Node& self) {
      const double g = self.grad[0] / n;
      if (a->requires_grad) a->ensure_grad();
      if (b->requires_grad) b->ensure_grad();
      for (std::size_t i = 0; i < a->size(); ++i) {
        const double d = a->value[i] - b->value[i];
        const double s = d > 0 ? g : (d < 0 ? -g : 0.0);
        if (a->requires_grad) a->grad[i] += s;
        if (b->requires_grad) b->grad[i] -= s;
      }
    };
  }
  return make_result({1}, {acc / n}, {a, b}, std::move(fn));
}

void backward(const Var& root) {
  if (!root || root->size() != 1) throw ArgumentError("backward: root must be scalar");
  if (!root->requires_grad) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p && p->requires_grad && p->backward_fn && seen.insert(p).second) {
        stack.emplace_back(p, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  for (Node* n : order) {
    if (n != root.get()) n->grad.assign(n->value.size(), 0.0);
  }
  root->grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    (*it)->backward_fn(**it);
  }
}

}  // namespace w2n::nn
