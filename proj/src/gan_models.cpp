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

#include "w2n/gan_models.hpp"

#include <cmath>

#include "w2n/errors.hpp"

namespace w2n {

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : params_) n += v->size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [name, v] : params_) v->ensure_grad(), v->zero_grad();
}

nn::Var ParamInit::uniform(const nn::Shape& shape, double bound) {
  std::vector<double> values(nn::numel(shape));
  for (double& v : values) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * bound;
  }
  return nn::parameter(shape, std::move(values));
}

Conv Conv::make(ParamSet& ps, ParamInit& init, const std::string& name, int cin,
                int cout, int kh, int kw, nn::Conv2dOptions opt) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin * kh * kw));
  Conv c;
  c.weight = init.uniform({cout, cin, kh, kw}, bound);
  c.bias = init.uniform({cout}, bound);
  c.options = opt;
  ps.add(name + ".weight", c.weight);
  ps.add(name + ".bias", c.bias);
  return c;
}

nn::Var Conv::operator()(const nn::Var& x) const {
  return nn::conv2d(x, weight, bias, options);
}

InstanceNorm InstanceNorm::make(ParamSet& ps, const std::string& name, int channels) {
  InstanceNorm n;
  n.gamma = nn::parameter({channels}, std::vector<double>(channels, 1.0));
  n.beta = nn::parameter({channels}, std::vector<double>(channels, 0.0));
  ps.add(name + ".gamma", n.gamma);
  ps.add(name + ".beta", n.beta);
  return n;
}

nn::Var InstanceNorm::operator()(const nn::Var& x) const {
  return nn::instance_norm(x, gamma, beta);
}

void GeneratorSpec::validate() const {
  if (bins < kDownsampling) {
    throw SpecError("generator: bins (" + std::to_string(bins) +
                    ") smaller than the downsampling factor " +
                    std::to_string(kDownsampling));
  }
  if (window_frames < kDownsampling) {
    throw SpecError("generator: window_frames (" + std::to_string(window_frames) +
                    ") smaller than the downsampling factor " +
                    std::to_string(kDownsampling));
  }
  if (channels < 2 || channels % 2 != 0) {
    throw SpecError("generator: channels must be even and >= 2");
  }
  if (residual_blocks < 0) throw SpecError("generator: negative residual_blocks");
  for (int k : {edge_kernel_h, edge_kernel_w, sample_kernel, residual_kernel}) {
    if (k < 1 || k % 2 == 0) throw SpecError("generator: kernels must be odd");
  }
}

void DiscriminatorSpec::validate() const {
  if (bins < 1 || window_frames < 1) throw SpecError("discriminator: empty input");
  if (channels < 1) throw SpecError("discriminator: channels must be >= 1");
}

std::pair<int, int> DiscriminatorSpec::output_grid() const {
  auto stage = [](int n) { return (n + 2 - 3) / 2 + 1; };
  int h = bins, w = window_frames;
  for (int i = 0; i < 3; ++i) h = stage(h), w = stage(w);
  return {h, w};
}

void to_json(nlohmann::json& j, const GeneratorSpec& s) {
  j = nlohmann::json{{"bins", s.bins},
                     {"window_frames", s.window_frames},
                     {"channels", s.channels},
                     {"residual_blocks", s.residual_blocks},
                     {"edge_kernel_h", s.edge_kernel_h},
                     {"edge_kernel_w", s.edge_kernel_w},
                     {"sample_kernel", s.sample_kernel},
                     {"residual_kernel", s.residual_kernel}};
}

void from_json(const nlohmann::json& j, GeneratorSpec& s) {
  GeneratorSpec d;
  s.bins = j.value("bins", d.bins);
  s.window_frames = j.value("window_frames", d.window_frames);
  s.channels = j.value("channels", d.channels);
  s.residual_blocks = j.value("residual_blocks", d.residual_blocks);
  s.edge_kernel_h = j.value("edge_kernel_h", d.edge_kernel_h);
  s.edge_kernel_w = j.value("edge_kernel_w", d.edge_kernel_w);
  s.sample_kernel = j.value("sample_kernel", d.sample_kernel);
  s.residual_kernel = j.value("residual_kernel", d.residual_kernel);
}

void to_json(nlohmann::json& j, const DiscriminatorSpec& s) {
  j = nlohmann::json{{"bins", s.bins},
                     {"window_frames", s.window_frames},
                     {"channels", s.channels}};
}

void from_json(const nlohmann::json& j, DiscriminatorSpec& s) {
  DiscriminatorSpec d;
  s.bins = j.value("bins", d.bins);
  s.window_frames = j.value("window_frames", d.window_frames);
  s.channels = j.value("channels", d.channels);
}

Generator::Generator(const GeneratorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  ParamInit init(seed);
  const int r = spec_.channels;
  const int half = r / 2;
  const int flat = r * ((spec_.bins + 3) / 4);
  const int ek_h = spec_.edge_kernel_h, ek_w = spec_.edge_kernel_w;
  const int sk = spec_.sample_kernel, rk = spec_.residual_kernel;
  const nn::Conv2dOptions edge{1, 1, ek_h / 2, ek_w / 2};
  const nn::Conv2dOptions down{2, 2, sk / 2, sk / 2};
  const nn::Conv2dOptions same{1, 1, sk / 2, sk / 2};
  const nn::Conv2dOptions pointwise{};
  const nn::Conv2dOptions temporal{1, 1, 0, rk / 2};

  input_conv_ = Conv::make(params_, init, "input", 2, 2 * half, ek_h, ek_w, edge);
  down1_ = Conv::make(params_, init, "down1", half, 2 * r, sk, sk, down);
  down1_norm_ = InstanceNorm::make(params_, "down1.norm", 2 * r);
  down2_ = Conv::make(params_, init, "down2", r, 2 * r, sk, sk, down);
  down2_norm_ = InstanceNorm::make(params_, "down2.norm", 2 * r);
  to_1d_ = Conv::make(params_, init, "to1d", flat, r, 1, 1, pointwise);
  to_1d_norm_ = InstanceNorm::make(params_, "to1d.norm", r);
  for (int b = 0; b < spec_.residual_blocks; ++b) {
    const std::string name = "res" + std::to_string(b);
    ResidualBlock blk;
    blk.expand = Conv::make(params_, init, name + ".expand", r, 4 * r, 1, rk, temporal);
    blk.expand_norm = InstanceNorm::make(params_, name + ".expand.norm", 4 * r);
    blk.project = Conv::make(params_, init, name + ".project", 2 * r, r, 1, rk, temporal);
    blk.project_norm = InstanceNorm::make(params_, name + ".project.norm", r);
    blocks_.push_back(blk);
  }
  to_2d_ = Conv::make(params_, init, "to2d", r, flat, 1, 1, pointwise);
  to_2d_norm_ = InstanceNorm::make(params_, "to2d.norm", flat);
  up1_ = Conv::make(params_, init, "up1", r, 8 * r, sk, sk, same);
  up1_norm_ = InstanceNorm::make(params_, "up1.norm", 2 * r);
  up2_ = Conv::make(params_, init, "up2", r, 4 * r, sk, sk, same);
  up2_norm_ = InstanceNorm::make(params_, "up2.norm", r);
  output_conv_ = Conv::make(params_, init, "output", half, 1, ek_h, ek_w, edge);
}

nn::Var Generator::forward(const nn::Var& spectrogram, const nn::Var& mask) const {
  const int h = spectrogram->shape.at(1);
  const int w = spectrogram->shape.at(2);
  if (h != spec_.bins) {
    throw SpecError("generator built for " + std::to_string(spec_.bins) +
                    " bins, got " + std::to_string(h));
  }
  if (w < GeneratorSpec::kDownsampling) {
    throw SpecError("generator input of " + std::to_string(w) +
                    " frames is below the downsampling factor");
  }
  const int ph = (h + 3) / 4 * 4;
  const int pw = (w + 3) / 4 * 4;
  nn::Var x = nn::pad_to(nn::concat_channels(spectrogram, mask), ph, pw);
  x = nn::glu(input_conv_(x));
  x = nn::glu(down1_norm_(down1_(x)));
  x = nn::glu(down2_norm_(down2_(x)));
  const int r = spec_.channels;
  const int qh = ph / 4, qw = pw / 4;
  x = nn::reshape(x, {r * qh, 1, qw});
  x = to_1d_norm_(to_1d_(x));
  for (const auto& blk : blocks_) {
    nn::Var y = nn::glu(blk.expand_norm(blk.expand(x)));
    y = blk.project_norm(blk.project(y));
    x = nn::add(x, y);
  }
  x = to_2d_norm_(to_2d_(x));
  x = nn::reshape(x, {r, qh, qw});
  x = nn::glu(up1_norm_(nn::pixel_shuffle(up1_(x), 2)));
  x = nn::glu(up2_norm_(nn::pixel_shuffle(up2_(x), 2)));
  x = output_conv_(x);
  return nn::crop_to(x, h, w);
}

nn::Var matrix_to_var(const Eigen::MatrixXd& m) {
  std::vector<double> v(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
  }
  return nn::constant({1, static_cast<int>(m.rows()), static_cast<int>(m.cols())},
                      std::move(v));
}

Eigen::MatrixXd var_to_matrix(const nn::Var& v) {
  const int rows = v->shape.at(v->shape.size() - 2);
  const int cols = v->shape.back();
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = v->value[static_cast<std::size_t>(r) * cols + c];
  }
  return m;
}

Eigen::MatrixXd Generator::apply(const Eigen::MatrixXd& window,
                                 const FrameMask& mask) const {
  nn::NoGradGuard no_grad;
  const MaskedWindow mw = apply_mask(window, mask);
  return var_to_matrix(forward(matrix_to_var(mw.masked_input),
                               matrix_to_var(mw.mask_channel)));
}

Discriminator::Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed)
    : spec_(spec) {
  spec_.validate();
  ParamInit init(seed);
  const int d = spec_.channels;
  input_conv_ = Conv::make(params_, init, "input", 1, 2 * d, 3, 3, {1, 1, 1, 1});
  int cin = d;
  for (int i = 0; i < 3; ++i) {
    const int cout = cin * 2;
    const std::string name = "down" + std::to_string(i + 1);
    down_[i] = Conv::make(params_, init, name, cin, 2 * cout, 3, 3, {2, 2, 1, 1});
    down_norm_[i] = InstanceNorm::make(params_, name + ".norm", 2 * cout);
    cin = cout;
  }
  wide_ = Conv::make(params_, init, "wide", cin, 2 * cin, 1, 5, {1, 1, 0, 2});
  wide_norm_ = InstanceNorm::make(params_, "wide.norm", 2 * cin);
  output_conv_ = Conv::make(params_, init, "output", cin, 1, 1, 3, {1, 1, 0, 1});
}

nn::Var Discriminator::forward(const nn::Var& x) const {
  nn::Var h = nn::glu(input_conv_(x));
  for (int i = 0; i < 3; ++i) h = nn::glu(down_norm_[i](down_[i](h)));
  h = nn::glu(wide_norm_(wide_(h)));
  return output_conv_(h);
}

}  // namespace w2n
