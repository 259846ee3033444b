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

#ifndef W2N_NN_HPP_
#define W2N_NN_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

// Minimal reverse-mode autodiff over dense double tensors, sized for the
// convolutional GAN. Tensors carry no batch axis: activations are (C, H, W),
// convolution weights (Cout, Cin, kh, kw).
namespace w2n::nn {

using Shape = std::vector<int>;

std::size_t numel(const Shape& s);
std::string shape_string(const Shape& s);

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<Var> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  std::size_t size() const { return value.size(); }
  void zero_grad();
  void ensure_grad();
};

Var constant(Shape shape, std::vector<double> values);
Var constant(Shape shape, double fill = 0.0);
Var parameter(Shape shape, std::vector<double> values);
// Copy of the value with no history.
Var detach(const Var& x);

// While alive, ops on this thread record no history.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

struct Conv2dOptions {
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;
};

// x: (Cin, H, W); weight: (Cout, Cin, kh, kw); bias: (Cout) or null.
Var conv2d(const Var& x, const Var& weight, const Var& bias,
           const Conv2dOptions& opt);
// Per-channel normalization over (H, W) with affine gamma/beta of shape (C).
Var instance_norm(const Var& x, const Var& gamma, const Var& beta,
                  double eps = 1e-5);
// Splits channels in half: first * sigmoid(second).
Var glu(const Var& x);
// (C * r * r, H, W) -> (C, H * r, W * r).
Var pixel_shuffle(const Var& x, int r);
Var reshape(const Var& x, Shape shape);
Var add(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var concat_channels(const Var& a, const Var& b);
// Zero-pads (C, H, W) at the bottom and right up to (C, h, w).
Var pad_to(const Var& x, int h, int w);
// Keeps the top-left (C, h, w) block.
Var crop_to(const Var& x, int h, int w);

// mean((x - target)^2) -> scalar
Var mean_squared_to(const Var& x, double target);
// mean(|a - b|) -> scalar
Var mean_abs_diff(const Var& a, const Var& b);

// Accumulates d(root)/d(node) into every reachable node's grad.
// root must hold a single element.
void backward(const Var& root);

double sigmoid(double x);

}  // namespace w2n::nn

#endif  // W2N_NN_HPP_
