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

#include "w2n/vad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "w2n/errors.hpp"
#include "w2n/fft.hpp"

namespace w2n {

std::string to_string(SpeechStyle s) {
  return s == SpeechStyle::kWhisper ? "whisper" : "normal";
}

SpeechStyle parse_speech_style(const std::string& s) {
  if (s == "whisper") return SpeechStyle::kWhisper;
  if (s == "normal") return SpeechStyle::kNormal;
  throw ArgumentError("unknown speech style '" + s + "'");
}

double VadConfig::threshold(SpeechStyle style) const {
  return style == SpeechStyle::kWhisper ? ratio_threshold_whisper
                                        : ratio_threshold_normal;
}

double VadConfig::zcr_boundary() const {
  return 0.5 * (zcr_voiced_ref + zcr_unvoiced_ref);
}

int VadConfig::median_window_frames() const {
  int w = static_cast<int>(std::lround(median_window_s * 1000.0 / analysis.shift_ms));
  if (w < 1) w = 1;
  if (w % 2 == 0) ++w;
  return w;
}

void VadConfig::validate() const {
  analysis.validate();
  auto in_unit = [](double t) { return t > 0.0 && t < 1.0; };
  if (!in_unit(ratio_threshold_normal) || !in_unit(ratio_threshold_whisper)) {
    throw ArgumentError("VAD ratio thresholds must lie in (0, 1)");
  }
  if (!(band_low >= 0.0 && band_low < band_high &&
        band_high <= analysis.sample_rate / 2.0)) {
    throw ArgumentError("VAD band must satisfy 0 <= low < high <= Nyquist");
  }
  if (!(median_window_s > 0.0)) throw ArgumentError("median window must be positive");
}

void to_json(nlohmann::json& j, const VadConfig& c) {
  j = nlohmann::json{{"band_low", c.band_low},
                     {"band_high", c.band_high},
                     {"ratio_threshold_normal", c.ratio_threshold_normal},
                     {"ratio_threshold_whisper", c.ratio_threshold_whisper},
                     {"zcr_voiced_ref", c.zcr_voiced_ref},
                     {"zcr_unvoiced_ref", c.zcr_unvoiced_ref},
                     {"median_window_s", c.median_window_s},
                     {"epsilon", c.epsilon}};
}

void from_json(const nlohmann::json& j, VadConfig& c) {
  VadConfig d;
  c.band_low = j.value("band_low", d.band_low);
  c.band_high = j.value("band_high", d.band_high);
  c.ratio_threshold_normal = j.value("ratio_threshold_normal", d.ratio_threshold_normal);
  c.ratio_threshold_whisper = j.value("ratio_threshold_whisper", d.ratio_threshold_whisper);
  c.zcr_voiced_ref = j.value("zcr_voiced_ref", d.zcr_voiced_ref);
  c.zcr_unvoiced_ref = j.value("zcr_unvoiced_ref", d.zcr_unvoiced_ref);
  c.median_window_s = j.value("median_window_s", d.median_window_s);
  c.epsilon = j.value("epsilon", d.epsilon);
}

std::string VadLabels::to_string() const {
  std::string s(voicing.size(), 'n');
  for (std::size_t i = 0; i < voicing.size(); ++i) s[i] = static_cast<char>(voicing[i]);
  return s;
}

VadLabels VadLabels::from_string(const std::string& s, const VadConfig& cfg) {
  VadLabels l;
  l.config = cfg;
  l.speech.resize(s.size());
  l.voicing.resize(s.size());
  l.low_zcr.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    switch (s[i]) {
      case 'v': l.voicing[i] = Voicing::kVoiced; break;
      case 'u': l.voicing[i] = Voicing::kUnvoiced; break;
      case 'n': l.voicing[i] = Voicing::kNonspeech; break;
      default: throw ArgumentError(std::string("bad label character '") + s[i] + "'");
    }
    l.speech[i] = l.voicing[i] != Voicing::kNonspeech;
    l.low_zcr[i] = l.voicing[i] == Voicing::kVoiced;
  }
  return l;
}

int zero_crossings(std::span<const float> frame) {
  if (frame.size() < 2) throw ArgumentError("zero_crossings: frame needs >= 2 samples");
  int count = 0;
  bool prev = frame[0] >= 0.f;
  for (std::size_t i = 1; i < frame.size(); ++i) {
    const bool cur = frame[i] >= 0.f;
    if (cur != prev) ++count;
    prev = cur;
  }
  return count;
}

double zero_crossings_per_10ms(std::span<const float> frame, int sample_rate) {
  const int count = zero_crossings(frame);
  const double frame_ms = 1000.0 * static_cast<double>(frame.size()) / sample_rate;
  return count * 10.0 / frame_ms;
}

namespace {

int fft_size_for(int frame_len, int preferred) {
  int n = std::max(2, preferred);
  while (n < frame_len) n *= 2;
  return n;
}

class BandRatio {
 public:
  BandRatio(int frame_len, const VadConfig& cfg)
      : cfg_(cfg),
        fft_(fft_size_for(frame_len, cfg.analysis.fft_size)),
        window_(hann_window(frame_len)),
        buf_(frame_len) {}

  double operator()(std::span<const float> frame) {
    for (std::size_t i = 0; i < frame.size(); ++i) buf_[i] = frame[i] * window_[i];
    fft_.forward(buf_, spec_);
    const double bin_hz = static_cast<double>(cfg_.analysis.sample_rate) / fft_.size();
    double band = 0.0, total = 0.0;
    for (int k = 0; k < fft_.num_bins(); ++k) {
      const double p = std::norm(spec_[k]);
      total += p;
      const double f = k * bin_hz;
      if (f >= cfg_.band_low && f <= cfg_.band_high) band += p;
    }
    if (total <= 0.0) return 0.0;
    return band / (total + cfg_.epsilon);
  }

 private:
  const VadConfig& cfg_;
  RealFft fft_;
  std::vector<double> window_;
  std::vector<double> buf_;
  std::vector<std::complex<double>> spec_;
};

}  // namespace

double band_energy_ratio(std::span<const float> frame, const VadConfig& cfg) {
  if (frame.size() < 2) throw ArgumentError("band_energy_ratio: frame needs >= 2 samples");
  BandRatio ratio(static_cast<int>(frame.size()), cfg);
  return ratio(frame);
}

FrameFeatures analyze_frames(const Waveform& w, const VadConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.analysis.sample_rate) {
    throw ArgumentError("VAD: waveform rate " + std::to_string(w.sample_rate) +
                        " differs from analysis rate " +
                        std::to_string(cfg.analysis.sample_rate));
  }
  const int frame_len = cfg.analysis.frame_length();
  const int shift = cfg.analysis.shift_length();
  const int frames = frame_count(w.samples.size(), frame_len, shift);
  if (frames == 0) {
    throw TooShortError("VAD: " + std::to_string(w.samples.size()) +
                        " samples is shorter than one frame");
  }
  FrameFeatures f;
  f.energy_ratio.resize(frames);
  f.zcr_per_10ms.resize(frames);
  BandRatio ratio(frame_len, cfg);
  for (int t = 0; t < frames; ++t) {
    std::span<const float> frame(w.samples.data() + static_cast<std::size_t>(t) * shift,
                                 frame_len);
    f.energy_ratio[t] = ratio(frame);
    f.zcr_per_10ms[t] = zero_crossings_per_10ms(frame, w.sample_rate);
  }
  return f;
}

VadLabels label_frames(const FrameFeatures& f, double ratio_threshold,
                       const VadConfig& cfg) {
  const std::size_t n = f.energy_ratio.size();
  VadLabels l;
  l.config = cfg;
  l.speech.resize(n);
  l.voicing.resize(n);
  l.low_zcr.resize(n);
  const double boundary = cfg.zcr_boundary();
  for (std::size_t i = 0; i < n; ++i) {
    l.speech[i] = f.energy_ratio[i] > ratio_threshold;
    l.low_zcr[i] = f.zcr_per_10ms[i] <= boundary;
    l.voicing[i] = !l.speech[i] ? Voicing::kNonspeech
                   : l.low_zcr[i] ? Voicing::kVoiced
                                  : Voicing::kUnvoiced;
  }
  return l;
}

VadLabels classify(const Waveform& w, SpeechStyle style, const VadConfig& cfg) {
  return median_smooth(label_frames(analyze_frames(w, cfg), cfg.threshold(style), cfg));
}

std::vector<bool> median_filter_pass(const std::vector<bool>& x, int window) {
  if (window < 1 || window % 2 == 0) {
    throw ArgumentError("median_filter_pass: window must be odd and positive");
  }
  const int n = static_cast<int>(x.size());
  const int half = window / 2;
  std::vector<int> prefix(n + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (x[i] ? 1 : 0);
  std::vector<bool> out(n);
  for (int i = 0; i < n; ++i) {
    const int r = std::min({half, i, n - 1 - i});
    const int ones = prefix[i + r + 1] - prefix[i - r];
    out[i] = 2 * ones > 2 * r + 1;
  }
  return out;
}

VadLabels median_smooth(const VadLabels& labels) {
  if (labels.speech.empty()) throw ArgumentError("median_smooth: empty labels");
  const int window = labels.config.median_window_frames();
  std::vector<bool> cur = labels.speech;
  // Repeated median filtering of a finite sequence reaches a root; the
  // pass bound only guards against a broken filter.
  const std::size_t max_passes = labels.speech.size() + 1;
  for (std::size_t pass = 0;; ++pass) {
    if (pass > max_passes) throw Error("median_smooth: no convergence");
    auto next = median_filter_pass(cur, window);
    if (next == cur) break;
    cur = std::move(next);
  }
  VadLabels out = labels;
  out.speech = cur;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const bool low = i < labels.low_zcr.size() ? labels.low_zcr[i]
                     : labels.voicing[i] == Voicing::kVoiced;
    out.voicing[i] = !cur[i] ? Voicing::kNonspeech
                     : low   ? Voicing::kVoiced
                             : Voicing::kUnvoiced;
  }
  return out;
}

TrimResult trim_silence(const Waveform& w, const VadLabels& labels) {
  const auto& a = labels.config.analysis;
  const int frame_len = a.frame_length();
  const int shift = a.shift_length();
  const int frames = frame_count(w.samples.size(), frame_len, shift);
  if (static_cast<int>(labels.size()) != frames) {
    throw ArgumentError("trim_silence: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(frames) + " frames");
  }
  TrimResult r;
  const auto first = std::find(labels.speech.begin(), labels.speech.end(), true);
  if (first == labels.speech.end()) {
    r.waveform = w;
    r.end_sample = w.samples.size();
    r.no_speech = true;
    return r;
  }
  const auto last = std::find(labels.speech.rbegin(), labels.speech.rend(), true);
  const auto i0 = static_cast<std::size_t>(first - labels.speech.begin());
  const auto i1 = labels.speech.size() - 1 -
                  static_cast<std::size_t>(last - labels.speech.rbegin());
  r.begin_sample = i0 * shift;
  // Samples past the last full frame belong to it when it is speech.
  r.end_sample = i1 + 1 == labels.size() ? w.samples.size()
                                         : std::min(w.samples.size(), i1 * shift + frame_len);
  r.waveform.sample_rate = w.sample_rate;
  r.waveform.samples.assign(w.samples.begin() + r.begin_sample,
                            w.samples.begin() + r.end_sample);
  return r;
}

}  // namespace w2n
