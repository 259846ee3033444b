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

#ifndef W2N_VAD_HPP_
#define W2N_VAD_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "w2n/dsp.hpp"
#include "w2n/wav.hpp"

namespace w2n {

enum class SpeechStyle { kNormal, kWhisper };

std::string to_string(SpeechStyle s);
SpeechStyle parse_speech_style(const std::string& s);

enum class Voicing : char { kVoiced = 'v', kUnvoiced = 'u', kNonspeech = 'n' };

struct VadConfig {
  double band_low = 300.0;
  double band_high = 3400.0;
  double ratio_threshold_normal = 0.6;
  double ratio_threshold_whisper = 0.2;
  // Zero crossings per 10 ms of clean voiced and unvoiced speech.
  double zcr_voiced_ref = 12.0;
  double zcr_unvoiced_ref = 50.0;
  double median_window_s = 0.5;
  double epsilon = 1e-12;
  // Frame size and rate are shared with the spectrogram front end.
  AnalysisConfig analysis;

  double threshold(SpeechStyle style) const;
  // Midpoint between the voiced and unvoiced references.
  double zcr_boundary() const;
  // round(median_window_s / shift), bumped to the next odd number.
  int median_window_frames() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const VadConfig& c);
void from_json(const nlohmann::json& j, VadConfig& c);

struct VadLabels {
  std::vector<bool> speech;
  std::vector<Voicing> voicing;
  // Per-frame ZCR cue (true when at or below the boundary), kept for every
  // frame so smoothing can assign a sublabel to frames it turns into speech.
  std::vector<bool> low_zcr;
  VadConfig config;

  std::size_t size() const { return speech.size(); }
  // One character per frame: 'v', 'u' or 'n'.
  std::string to_string() const;
  static VadLabels from_string(const std::string& s, const VadConfig& cfg);
};

// Adjacent sign changes, zero counted as positive. Requires >= 2 samples.
int zero_crossings(std::span<const float> frame);
double zero_crossings_per_10ms(std::span<const float> frame, int sample_rate);

// In-band spectral energy over total energy (+ epsilon); 0 for silence.
double band_energy_ratio(std::span<const float> frame, const VadConfig& cfg);

struct FrameFeatures {
  std::vector<double> energy_ratio;
  std::vector<double> zcr_per_10ms;
};

// Frames the waveform exactly like mel_spectrogram does.
FrameFeatures analyze_frames(const Waveform& w, const VadConfig& cfg);

// Raw (unsmoothed) decisions at an explicit ratio threshold.
VadLabels label_frames(const FrameFeatures& f, double ratio_threshold,
                       const VadConfig& cfg);

// Energy-ratio speech decision with ZCR voicing sublabels, median smoothed.
// Throws TooShortError when the waveform is shorter than one frame.
VadLabels classify(const Waveform& w, SpeechStyle style, const VadConfig& cfg);

// One centered-window majority pass; window must be odd. Near the edges the
// window shrinks symmetrically.
std::vector<bool> median_filter_pass(const std::vector<bool>& x, int window);

// Repeats median_filter_pass until the sequence stops changing, which makes
// the result a fixed point of the filter.
VadLabels median_smooth(const VadLabels& labels);

struct TrimResult {
  Waveform waveform;
  std::size_t begin_sample = 0;
  std::size_t end_sample = 0;
  // Set when no frame is labeled speech; the waveform is returned unchanged.
  bool no_speech = false;
};

TrimResult trim_silence(const Waveform& w, const VadLabels& labels);

}  // namespace w2n

#endif  // W2N_VAD_HPP_
