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

#include "w2n/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "w2n/errors.hpp"

namespace w2n {

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw ArgumentError("uniform_index: empty range");
  if (n == 1) return 0;
  // floor(2^64 / n) without overflow; draws past n * bucket are rejected.
  const std::uint64_t bucket = (Rng::max() - n + 1) / n + 1;
  for (;;) {
    const std::uint64_t v = rng();
    const std::uint64_t q = v / bucket;
    if (q < n) return q;
  }
}

std::string to_string(MaskScatter s) {
  return s == MaskScatter::kSubsequent ? "subsequent" : "non_subsequent";
}

MaskScatter parse_mask_scatter(const std::string& s) {
  if (s == "non_subsequent") return MaskScatter::kNonSubsequent;
  if (s == "subsequent") return MaskScatter::kSubsequent;
  throw ArgumentError("unknown mask scatter '" + s + "'");
}

int MaskConfig::masked_count() const {
  return static_cast<int>(std::lround(mask_fraction * window_frames));
}

void MaskConfig::validate() const {
  if (window_frames < 1) throw ArgumentError("window_frames must be >= 1");
  if (!(mask_fraction >= 0.0 && mask_fraction <= 1.0)) {
    throw ArgumentError("mask_fraction must lie in [0, 1]");
  }
}

MaskConfig MaskConfig::baseline() {
  MaskConfig c;
  c.window_frames = 64;
  c.mask_fraction = 0.25;
  return c;
}

MaskConfig MaskConfig::proposed() {
  MaskConfig c;
  c.window_frames = 128;
  c.mask_fraction = 0.5;
  return c;
}

void to_json(nlohmann::json& j, const MaskConfig& c) {
  j = nlohmann::json{{"window_frames", c.window_frames},
                     {"mask_fraction", c.mask_fraction},
                     {"scatter", to_string(c.scatter)},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, MaskConfig& c) {
  MaskConfig d;
  c.window_frames = j.value("window_frames", d.window_frames);
  c.mask_fraction = j.value("mask_fraction", d.mask_fraction);
  c.scatter = parse_mask_scatter(j.value("scatter", to_string(d.scatter)));
  c.seed = j.value("seed", d.seed);
}

int FrameMask::zeros() const {
  return static_cast<int>(std::count(values.begin(), values.end(), 0));
}

SpecWindow sample_window(const Eigen::MatrixXd& spec, int window_frames,
                         const Eigen::VectorXd& pad_column, Rng& rng) {
  if (spec.cols() == 0 || spec.rows() == 0) {
    throw ArgumentError("sample_window: empty spectrogram");
  }
  if (window_frames < 1) throw ArgumentError("sample_window: window_frames < 1");
  if (pad_column.size() != spec.rows()) {
    throw ArgumentError("sample_window: pad column size mismatch");
  }
  const int frames = static_cast<int>(spec.cols());
  SpecWindow out;
  if (frames >= window_frames) {
    out.start = static_cast<int>(uniform_index(rng, frames - window_frames + 1));
    out.values = spec.middleCols(out.start, window_frames);
    out.real_frames = window_frames;
    return out;
  }
  out.values.resize(spec.rows(), window_frames);
  out.values.leftCols(frames) = spec;
  out.values.rightCols(window_frames - frames) =
      pad_column.replicate(1, window_frames - frames);
  out.real_frames = frames;
  out.padded = true;
  return out;
}

SpecWindow sample_window(const MelSpectrogram& spec, const MaskConfig& cfg,
                         Rng& rng) {
  cfg.validate();
  const Eigen::VectorXd pad =
      Eigen::VectorXd::Constant(spec.bins(), spec.config.log_floor_value());
  return sample_window(spec.values, cfg.window_frames, pad, rng);
}

FrameMask generate_mask(const MaskConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = cfg.window_frames;
  const int k = cfg.masked_count();
  FrameMask m;
  m.values.assign(n, 1);
  if (k == 0) return m;
  if (cfg.scatter == MaskScatter::kSubsequent) {
    const int start = static_cast<int>(uniform_index(rng, n - k + 1));
    std::fill_n(m.values.begin() + start, k, 0);
    return m;
  }
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(uniform_index(rng, n - i));
    std::swap(idx[i], idx[j]);
    m.values[idx[i]] = 0;
  }
  return m;
}

FrameMask test_mask(int window_frames) {
  if (window_frames < 1) throw ArgumentError("test_mask: window_frames < 1");
  FrameMask m;
  m.values.assign(window_frames, 1);
  return m;
}

MaskedWindow apply_mask(const Eigen::MatrixXd& window, const FrameMask& mask,
                        double fill) {
  if (window.cols() != mask.size()) {
    throw ArgumentError("apply_mask: mask length " + std::to_string(mask.size()) +
                        " != window frames " + std::to_string(window.cols()));
  }
  MaskedWindow out;
  out.spectrogram_window = window;
  out.mask = mask;
  out.masked_input = window;
  out.mask_channel.resize(window.rows(), window.cols());
  for (int t = 0; t < mask.size(); ++t) {
    const bool keep = mask.values[t] != 0;
    if (!keep) out.masked_input.col(t).setConstant(fill);
    out.mask_channel.col(t).setConstant(keep ? 1.0 : 0.0);
  }
  return out;
}

}  // namespace w2n
