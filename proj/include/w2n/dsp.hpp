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

#ifndef W2N_DSP_HPP_
#define W2N_DSP_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "w2n/wav.hpp"

namespace w2n {

inline constexpr int kPipelineSampleRate = 22050;
inline constexpr int kImageSize = 224;
// Peaks below this are treated as silence and never rescaled.
inline constexpr float kSilencePeak = 1e-4f;

// Short-time analysis settings shared by the mel front end and the VAD.
struct AnalysisConfig {
  int sample_rate = kPipelineSampleRate;
  double frame_ms = 20.0;
  double shift_ms = 5.0;
  int fft_size = 512;
  int mel_bins = 80;
  double fmin = 0.0;
  double fmax = 11025.0;
  double log_floor = 1e-5;

  int frame_length() const;
  int shift_length() const;
  double log_floor_value() const;
  // Throws ArgumentError when any invariant is violated.
  void validate() const;
  // Stable 64-bit fingerprint of every field; used in file headers.
  std::uint64_t hash() const;
  std::string hash_hex() const;

  bool operator==(const AnalysisConfig&) const = default;
};

void to_json(nlohmann::json& j, const AnalysisConfig& c);
void from_json(const nlohmann::json& j, AnalysisConfig& c);

// 1 + floor((num_samples - frame_len) / shift) for num_samples >= frame_len,
// otherwise 0.
int frame_count(std::size_t num_samples, int frame_len, int shift);

// Per-row (mel bin) mean and standard deviation.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  bool empty() const { return mean.size() == 0; }
};

void to_json(nlohmann::json& j, const NormStats& s);
void from_json(const nlohmann::json& j, NormStats& s);

NormStats compute_norm_stats(std::span<const Eigen::MatrixXd> features);
Eigen::MatrixXd normalize(const Eigen::MatrixXd& m, const NormStats& s);
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& m, const NormStats& s);

struct MelSpectrogram {
  Eigen::MatrixXd values;  // mel_bins x num_frames, natural-log amplitude
  AnalysisConfig config;
  std::optional<NormStats> stats;

  int bins() const { return static_cast<int>(values.rows()); }
  int frames() const { return static_cast<int>(values.cols()); }
};

struct SpecImage {
  Eigen::MatrixXd values;  // kImageSize x kImageSize
  int source_bins = 0;
  int source_frames = 0;
  AnalysisConfig config;
  std::optional<NormStats> normalization;
};

// Audio I/O and conditioning.
Waveform to_mono(const WavData& wav);
Waveform resample(const Waveform& w, int target_rate);
// Scales to unit peak; leaves signals whose peak is below kSilencePeak as is.
void peak_normalize(Waveform& w);
// Mono, resampled to target_rate, peak-normalized.
Waveform load_audio(const std::filesystem::path& path,
                    int target_rate = kPipelineSampleRate);

// Periodic Hann window.
std::vector<double> hann_window(int length);
// Slaney-scale triangular filters with area normalization,
// mel_bins x (fft_size / 2 + 1).
Eigen::MatrixXd mel_filterbank(const AnalysisConfig& cfg);
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// |STFT| magnitudes, (fft_size / 2 + 1) x num_frames, no centering.
Eigen::MatrixXd stft_magnitude(const Waveform& w, const AnalysisConfig& cfg);

// Throws TooShortError for signals shorter than one frame.
MelSpectrogram mel_spectrogram(const Waveform& w, const AnalysisConfig& cfg);

// Bilinear resampling of a matrix with corner-aligned grids.
Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& m, int rows, int cols);
SpecImage resize_to_image(const MelSpectrogram& spec,
                          int size = kImageSize);
MelSpectrogram resize_from_image(const SpecImage& img);

// Mel pseudo-inverse to linear magnitude followed by Griffin-Lim phase
// recovery. Returns (frames - 1) * shift + frame_len samples, unnormalized.
Waveform griffin_lim(const MelSpectrogram& spec, int iterations,
                     std::uint64_t seed = 0);

// Mean absolute difference between log-mel matrices over their common frames.
double mel_l1_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace w2n

#endif  // W2N_DSP_HPP_
