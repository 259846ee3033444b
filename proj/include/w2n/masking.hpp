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

#ifndef W2N_MASKING_HPP_
#define W2N_MASKING_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "w2n/dsp.hpp"

namespace w2n {

using Rng = std::mt19937_64;

// Uniform integer in [0, n) by rejection; identical across standard
// libraries, unlike std::uniform_int_distribution.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

enum class MaskScatter { kNonSubsequent, kSubsequent };

std::string to_string(MaskScatter s);
MaskScatter parse_mask_scatter(const std::string& s);

struct MaskConfig {
  int window_frames = 128;
  double mask_fraction = 0.5;
  MaskScatter scatter = MaskScatter::kNonSubsequent;
  std::uint64_t seed = 0;

  // round(mask_fraction * window_frames)
  int masked_count() const;
  void validate() const;

  // 64 frames, 25 % masked.
  static MaskConfig baseline();
  // 128 frames, 50 % masked.
  static MaskConfig proposed();
};

void to_json(nlohmann::json& j, const MaskConfig& c);
void from_json(const nlohmann::json& j, MaskConfig& c);

// 1 keeps a frame, 0 masks it.
struct FrameMask {
  std::vector<std::uint8_t> values;

  int size() const { return static_cast<int>(values.size()); }
  int zeros() const;
  bool operator==(const FrameMask&) const = default;
};

struct SpecWindow {
  Eigen::MatrixXd values;  // bins x window_frames
  int start = 0;
  int real_frames = 0;
  bool padded = false;
};

// Contiguous crop at a uniformly random start. Inputs shorter than the window
// are right-padded with pad_column.
SpecWindow sample_window(const Eigen::MatrixXd& spec, int window_frames,
                         const Eigen::VectorXd& pad_column, Rng& rng);
// Pads with the silence floor log(log_floor).
SpecWindow sample_window(const MelSpectrogram& spec, const MaskConfig& cfg,
                         Rng& rng);

FrameMask generate_mask(const MaskConfig& cfg, Rng& rng);
FrameMask test_mask(int window_frames);

struct MaskedWindow {
  Eigen::MatrixXd spectrogram_window;
  FrameMask mask;
  Eigen::MatrixXd masked_input;
  Eigen::MatrixXd mask_channel;
};

inline constexpr double kMaskFillValue = 0.0;

MaskedWindow apply_mask(const Eigen::MatrixXd& window, const FrameMask& mask,
                        double fill = kMaskFillValue);

}  // namespace w2n

#endif  // W2N_MASKING_HPP_
