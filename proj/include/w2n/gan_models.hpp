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

#ifndef W2N_GAN_MODELS_HPP_
#define W2N_GAN_MODELS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "w2n/masking.hpp"
#include "w2n/nn.hpp"

namespace w2n {

// Named parameters of one network, in registration order.
class ParamSet {
 public:
  void add(std::string name, nn::Var v) { params_.emplace_back(std::move(name), std::move(v)); }
  const std::vector<std::pair<std::string, nn::Var>>& items() const { return params_; }
  std::size_t count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, nn::Var>> params_;
};

// Conv weights/bias drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : rng_(seed) {}
  nn::Var uniform(const nn::Shape& shape, double bound);
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

struct Conv {
  nn::Var weight;
  nn::Var bias;
  nn::Conv2dOptions options;

  static Conv make(ParamSet& ps, ParamInit& init, const std::string& name,
                   int cin, int cout, int kh, int kw, nn::Conv2dOptions opt);
  nn::Var operator()(const nn::Var& x) const;
};

struct InstanceNorm {
  nn::Var gamma;
  nn::Var beta;

  static InstanceNorm make(ParamSet& ps, const std::string& name, int channels);
  nn::Var operator()(const nn::Var& x) const;
};

// 2 input channels (spectrogram, mask) -> 1 output channel.
struct GeneratorSpec {
  int bins = 80;
  int window_frames = 128;
  // Width of the 2-D trunk after downsampling; the first layer uses half.
  int channels = 256;
  int residual_blocks = 6;
  int edge_kernel_h = 5;
  int edge_kernel_w = 15;
  int sample_kernel = 5;
  int residual_kernel = 3;

  static constexpr int kDownsampling = 4;
  void validate() const;
};

struct DiscriminatorSpec {
  int bins = 80;
  int window_frames = 128;
  // First-layer width; doubled by each of the three strided stages.
  int channels = 128;

  void validate() const;
  // Patch grid (rows, cols) produced for the configured input.
  std::pair<int, int> output_grid() const;
};

void to_json(nlohmann::json& j, const GeneratorSpec& s);
void from_json(const nlohmann::json& j, GeneratorSpec& s);
void to_json(nlohmann::json& j, const DiscriminatorSpec& s);
void from_json(const nlohmann::json& j, DiscriminatorSpec& s);

// 2-D downsampling, 1-D residual bottleneck, 2-D upsampling.
class Generator {
 public:
  Generator(const GeneratorSpec& spec, std::uint64_t seed);

  // spectrogram and mask are (1, H, W); returns (1, H, W). H must equal
  // spec.bins; any W >= kDownsampling is accepted.
  nn::Var forward(const nn::Var& spectrogram, const nn::Var& mask) const;
  // Convenience: masks the window, runs the network, returns the matrix.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& window, const FrameMask& mask) const;

  const GeneratorSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  struct ResidualBlock {
    Conv expand;
    InstanceNorm expand_norm;
    Conv project;
    InstanceNorm project_norm;
  };

  GeneratorSpec spec_;
  ParamSet params_;
  Conv input_conv_;
  Conv down1_, down2_;
  InstanceNorm down1_norm_, down2_norm_;
  Conv to_1d_;
  InstanceNorm to_1d_norm_;
  std::vector<ResidualBlock> blocks_;
  Conv to_2d_;
  InstanceNorm to_2d_norm_;
  Conv up1_, up2_;
  InstanceNorm up1_norm_, up2_norm_;
  Conv output_conv_;
};

// PatchGAN: a grid of real/fake scores over local patches.
class Discriminator {
 public:
  Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

  // x is (1, H, W); returns (1, gh, gw) unbounded scores.
  nn::Var forward(const nn::Var& x) const;

  const DiscriminatorSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  DiscriminatorSpec spec_;
  ParamSet params_;
  Conv input_conv_;
  Conv down_[3];
  InstanceNorm down_norm_[3];
  Conv wide_;
  InstanceNorm wide_norm_;
  Conv output_conv_;
};

nn::Var matrix_to_var(const Eigen::MatrixXd& m);
Eigen::MatrixXd var_to_matrix(const nn::Var& v);

}  // namespace w2n

#endif  // W2N_GAN_MODELS_HPP_
