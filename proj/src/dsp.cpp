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

#include "w2n/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "w2n/errors.hpp"
#include "w2n/fft.hpp"

namespace w2n {

namespace {

constexpr int kResampleZeroCrossings = 32;
constexpr double kKaiserBeta = 8.6;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

int AnalysisConfig::frame_length() const {
  return static_cast<int>(std::lround(frame_ms * sample_rate / 1000.0));
}

int AnalysisConfig::shift_length() const {
  return static_cast<int>(std::lround(shift_ms * sample_rate / 1000.0));
}

double AnalysisConfig::log_floor_value() const { return std::log(log_floor); }

void AnalysisConfig::validate() const {
  if (sample_rate <= 0) throw ArgumentError("sample_rate must be positive");
  if (frame_length() < 2) throw ArgumentError("frame length below 2 samples");
  if (shift_length() < 1) throw ArgumentError("shift below 1 sample");
  if (fft_size < frame_length()) {
    throw ArgumentError("fft_size " + std::to_string(fft_size) +
                        " is shorter than the frame (" +
                        std::to_string(frame_length()) + " samples)");
  }
  if (mel_bins < 1) throw ArgumentError("mel_bins must be >= 1");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw ArgumentError("require 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(log_floor > 0.0)) throw ArgumentError("log_floor must be positive");
}

std::uint64_t AnalysisConfig::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "sr=%d;frame_ms=%.9g;shift_ms=%.9g;fft=%d;mels=%d;fmin=%.9g;"
                "fmax=%.9g;floor=%.9g",
                sample_rate, frame_ms, shift_ms, fft_size, mel_bins, fmin,
                fmax, log_floor);
  return fnv1a(buf);
}

std::string AnalysisConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash()));
  return buf;
}

void to_json(nlohmann::json& j, const AnalysisConfig& c) {
  j = nlohmann::json{{"sample_rate", c.sample_rate}, {"frame_ms", c.frame_ms},
                     {"shift_ms", c.shift_ms},       {"fft_size", c.fft_size},
                     {"mel_bins", c.mel_bins},       {"fmin", c.fmin},
                     {"fmax", c.fmax},               {"log_floor", c.log_floor}};
}

void from_json(const nlohmann::json& j, AnalysisConfig& c) {
  AnalysisConfig d;
  c.sample_rate = j.value("sample_rate", d.sample_rate);
  c.frame_ms = j.value("frame_ms", d.frame_ms);
  c.shift_ms = j.value("shift_ms", d.shift_ms);
  c.fft_size = j.value("fft_size", d.fft_size);
  c.mel_bins = j.value("mel_bins", d.mel_bins);
  c.fmin = j.value("fmin", d.fmin);
  c.fmax = j.value("fmax", d.fmax);
  c.log_floor = j.value("log_floor", d.log_floor);
}

int frame_count(std::size_t num_samples, int frame_len, int shift) {
  if (frame_len <= 0 || shift <= 0) {
    throw ArgumentError("frame_count: non-positive frame or shift");
  }
  if (num_samples < static_cast<std::size_t>(frame_len)) return 0;
  return 1 + static_cast<int>((num_samples - frame_len) / shift);
}

void to_json(nlohmann::json& j, const NormStats& s) {
  j = nlohmann::json{
      {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
      {"stddev", std::vector<double>(s.stddev.data(),
                                     s.stddev.data() + s.stddev.size())}};
}

void from_json(const nlohmann::json& j, NormStats& s) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("stddev").get<std::vector<double>>();
  if (mean.size() != sd.size()) throw ArgumentError("NormStats size mismatch");
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  s.stddev = Eigen::Map<const Eigen::VectorXd>(sd.data(), sd.size());
}

NormStats compute_norm_stats(std::span<const Eigen::MatrixXd> features) {
  if (features.empty()) throw ArgumentError("compute_norm_stats: no input");
  const auto rows = features.front().rows();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(rows);
  double n = 0;
  for (const auto& f : features) {
    if (f.rows() != rows) throw ArgumentError("compute_norm_stats: row mismatch");
    sum += f.rowwise().sum();
    sq += f.array().square().matrix().rowwise().sum();
    n += static_cast<double>(f.cols());
  }
  if (n == 0) throw ArgumentError("compute_norm_stats: no frames");
  NormStats s;
  s.mean = sum / n;
  s.stddev = (sq / n - s.mean.array().square().matrix())
                 .array()
                 .max(0.0)
                 .sqrt()
                 .max(1e-8)
                 .matrix();
  return s;
}

Eigen::MatrixXd normalize(const Eigen::MatrixXd& m, const NormStats& s) {
  if (s.mean.size() != m.rows()) throw ArgumentError("normalize: row mismatch");
  return ((m.colwise() - s.mean).array().colwise() / s.stddev.array()).matrix();
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& m, const NormStats& s) {
  if (s.mean.size() != m.rows()) throw ArgumentError("denormalize: row mismatch");
  return ((m.array().colwise() * s.stddev.array()).matrix().colwise() + s.mean);
}

Waveform to_mono(const WavData& wav) {
  Waveform w;
  w.sample_rate = wav.sample_rate;
  const std::size_t frames = wav.num_frames();
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < wav.channels; ++c) {
      acc += wav.interleaved[i * wav.channels + c];
    }
    w.samples[i] = static_cast<float>(acc / wav.channels);
  }
  return w;
}

Waveform resample(const Waveform& w, int target_rate) {
  if (w.sample_rate <= 0 || target_rate <= 0) {
    throw ArgumentError("resample: rates must be positive");
  }
  if (w.sample_rate == target_rate || w.samples.empty()) {
    Waveform out = w;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kResampleZeroCrossings / cutoff;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) * ratio));
  // Kaiser window tabulated over |r| in [0, 1].
  constexpr int kTable = 4096;
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  std::vector<double> kaiser(kTable + 2);
  for (int i = 0; i <= kTable + 1; ++i) {
    const double r = std::min(1.0, static_cast<double>(i) / kTable);
    kaiser[i] = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
  }
  const auto n = static_cast<long long>(w.samples.size());

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  for (std::size_t j = 0; j < out_len; ++j) {
    const double t = static_cast<double>(j) / ratio;
    const auto lo = std::max<long long>(0, static_cast<long long>(std::ceil(t - half_width)));
    const auto hi = std::min<long long>(n - 1, static_cast<long long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long long k = lo; k <= hi; ++k) {
      const double d = t - static_cast<double>(k);
      const double x = cutoff * d;
      const double sinc =
          x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double pos = std::abs(d) / half_width * kTable;
      const int idx = static_cast<int>(pos);
      if (idx >= kTable) continue;
      const double frac = pos - idx;
      const double win = kaiser[idx] + frac * (kaiser[idx + 1] - kaiser[idx]);
      acc += w.samples[k] * cutoff * sinc * win;
    }
    out.samples[j] = static_cast<float>(acc);
  }
  return out;
}

void peak_normalize(Waveform& w) {
  float peak = 0.f;
  for (float s : w.samples) peak = std::max(peak, std::abs(s));
  if (peak < kSilencePeak || !std::isfinite(peak)) return;
  const float g = 1.f / peak;
  for (float& s : w.samples) s *= g;
}

Waveform load_audio(const std::filesystem::path& path, int target_rate) {
  Waveform w;
  try {
    w = resample(to_mono(read_wav(path)), target_rate);
  } catch (const LoadError&) {
    throw;
  } catch (const Error& e) {
    throw LoadError(path.string(), e.what());
  }
  peak_normalize(w);
  return w;
}

std::vector<double> hann_window(int length) {
  std::vector<double> win(length);
  for (int i = 0; i < length; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return win;
}

double hz_to_mel(double hz) {
  // Slaney: linear below 1 kHz, logarithmic above.
  constexpr double kFSp = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  const double min_log_mel = kMinLogHz / kFSp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < kMinLogHz) return hz / kFSp;
  return min_log_mel + std::log(hz / kMinLogHz) / logstep;
}

double mel_to_hz(double mel) {
  constexpr double kFSp = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  const double min_log_mel = kMinLogHz / kFSp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * kFSp;
  return kMinLogHz * std::exp(logstep * (mel - min_log_mel));
}

Eigen::MatrixXd mel_filterbank(const AnalysisConfig& cfg) {
  cfg.validate();
  const int num_bins = cfg.fft_size / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.mel_bins, num_bins);
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(cfg.mel_bins + 2);
  for (int i = 0; i < cfg.mel_bins + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.mel_bins + 1));
  }
  for (int m = 0; m < cfg.mel_bins; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    const double area_norm = 2.0 / (hi - lo);
    for (int k = 0; k < num_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      fb(m, k) = std::max(0.0, std::min(up, down)) * area_norm;
    }
  }
  return fb;
}

Eigen::MatrixXd stft_magnitude(const Waveform& w, const AnalysisConfig& cfg) {
  cfg.validate();
  const int frame_len = cfg.frame_length();
  const int shift = cfg.shift_length();
  const int frames = frame_count(w.samples.size(), frame_len, shift);
  RealFft fft(cfg.fft_size);
  const auto window = hann_window(frame_len);
  Eigen::MatrixXd mag(fft.num_bins(), frames);
  std::vector<double> buf(frame_len);
  std::vector<std::complex<double>> spec;
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * shift;
    for (int i = 0; i < frame_len; ++i) {
      buf[i] = w.samples[start + i] * window[i];
    }
    fft.forward(buf, spec);
    for (int k = 0; k < fft.num_bins(); ++k) mag(k, t) = std::abs(spec[k]);
  }
  return mag;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const AnalysisConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw ArgumentError("mel_spectrogram: waveform rate " +
                        std::to_string(w.sample_rate) +
                        " differs from analysis rate " +
                        std::to_string(cfg.sample_rate));
  }
  if (w.samples.size() < static_cast<std::size_t>(cfg.frame_length())) {
    throw TooShortError("mel_spectrogram: " + std::to_string(w.samples.size()) +
                        " samples is shorter than one frame (" +
                        std::to_string(cfg.frame_length()) + ")");
  }
  MelSpectrogram out;
  out.config = cfg;
  out.values = (mel_filterbank(cfg) * stft_magnitude(w, cfg))
                   .array()
                   .max(cfg.log_floor)
                   .log()
                   .matrix();
  return out;
}

Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& m, int rows, int cols) {
  if (m.size() == 0) throw ArgumentError("resize_bilinear: empty input");
  if (rows < 1 || cols < 1) throw ArgumentError("resize_bilinear: bad target");
  if (m.rows() == rows && m.cols() == cols) return m;
  const double sr = rows > 1 ? double(m.rows() - 1) / (rows - 1) : 0.0;
  const double sc = cols > 1 ? double(m.cols() - 1) / (cols - 1) : 0.0;
  Eigen::MatrixXd out(rows, cols);
  for (int c = 0; c < cols; ++c) {
    const double x = c * sc;
    const int c0 = std::min<int>(static_cast<int>(x), m.cols() - 1);
    const int c1 = std::min<int>(c0 + 1, m.cols() - 1);
    const double fx = x - c0;
    for (int r = 0; r < rows; ++r) {
      const double y = r * sr;
      const int r0 = std::min<int>(static_cast<int>(y), m.rows() - 1);
      const int r1 = std::min<int>(r0 + 1, m.rows() - 1);
      const double fy = y - r0;
      const double top = m(r0, c0) + fx * (m(r0, c1) - m(r0, c0));
      const double bot = m(r1, c0) + fx * (m(r1, c1) - m(r1, c0));
      out(r, c) = top + fy * (bot - top);
    }
  }
  return out;
}

SpecImage resize_to_image(const MelSpectrogram& spec, int size) {
  if (spec.values.size() == 0) throw ArgumentError("resize_to_image: empty");
  SpecImage img;
  img.values = resize_bilinear(spec.values, size, size);
  img.source_bins = spec.bins();
  img.source_frames = spec.frames();
  img.config = spec.config;
  img.normalization = spec.stats;
  return img;
}

MelSpectrogram resize_from_image(const SpecImage& img) {
  if (img.values.size() == 0) throw ArgumentError("resize_from_image: empty");
  MelSpectrogram spec;
  spec.values = resize_bilinear(img.values, img.source_bins, img.source_frames);
  spec.config = img.config;
  spec.stats = img.normalization;
  return spec;
}

Waveform griffin_lim(const MelSpectrogram& spec, int iterations,
                     std::uint64_t seed) {
  if (iterations < 1) throw ArgumentError("griffin_lim: iterations must be >= 1");
  if (spec.values.size() == 0) throw ArgumentError("griffin_lim: empty spectrogram");
  const AnalysisConfig& cfg = spec.config;
  cfg.validate();
  if (spec.bins() != cfg.mel_bins) {
    throw ArgumentError("griffin_lim: spectrogram has " +
                        std::to_string(spec.bins()) + " bins, config says " +
                        std::to_string(cfg.mel_bins));
  }
  const int frame_len = cfg.frame_length();
  const int shift = cfg.shift_length();
  const int frames = spec.frames();
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  const Eigen::MatrixXd pinv = fb.completeOrthogonalDecomposition().pseudoInverse();
  // Values at the analysis floor carry no energy.
  const Eigen::MatrixXd mel =
      (spec.values.array().exp() - cfg.log_floor).max(0.0).matrix();
  const Eigen::MatrixXd target = (pinv * mel).array().max(0.0).matrix();

  RealFft fft(cfg.fft_size);
  const int num_bins = fft.num_bins();
  const auto window = hann_window(frame_len);
  const std::size_t out_len =
      static_cast<std::size_t>(frames - 1) * shift + frame_len;
  std::vector<double> wsum(out_len, 0.0);
  for (int t = 0; t < frames; ++t) {
    for (int i = 0; i < frame_len; ++i) {
      wsum[static_cast<std::size_t>(t) * shift + i] += window[i] * window[i];
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(-std::numbers::pi,
                                                    std::numbers::pi);
  std::vector<std::vector<std::complex<double>>> phase(
      frames, std::vector<std::complex<double>>(num_bins));
  for (auto& col : phase) {
    for (auto& p : col) p = std::polar(1.0, phase_dist(rng));
  }

  std::vector<double> signal(out_len);
  std::vector<std::complex<double>> bins(num_bins);
  std::vector<double> frame;
  auto synthesize = [&]() {
    std::fill(signal.begin(), signal.end(), 0.0);
    for (int t = 0; t < frames; ++t) {
      for (int k = 0; k < num_bins; ++k) bins[k] = target(k, t) * phase[t][k];
      fft.inverse(bins, frame);
      const std::size_t start = static_cast<std::size_t>(t) * shift;
      for (int i = 0; i < frame_len; ++i) {
        signal[start + i] += frame[i] / cfg.fft_size * window[i];
      }
    }
    for (std::size_t i = 0; i < out_len; ++i) {
      if (wsum[i] > 1e-8) signal[i] /= wsum[i];
    }
  };

  std::vector<double> buf(frame_len);
  std::vector<std::complex<double>> analyzed;
  for (int it = 0; it < iterations; ++it) {
    synthesize();
    for (int t = 0; t < frames; ++t) {
      const std::size_t start = static_cast<std::size_t>(t) * shift;
      for (int i = 0; i < frame_len; ++i) buf[i] = signal[start + i] * window[i];
      fft.forward(buf, analyzed);
      for (int k = 0; k < num_bins; ++k) {
        const double mag = std::abs(analyzed[k]);
        phase[t][k] = mag > 1e-12 ? analyzed[k] / mag : std::complex<double>(1.0, 0.0);
      }
    }
  }
  synthesize();

  Waveform out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out.samples[i] = static_cast<float>(signal[i]);
  }
  return out;
}

double mel_l1_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw ArgumentError("mel_l1_distance: bin mismatch");
  const auto n = std::min(a.cols(), b.cols());
  if (n == 0) throw ArgumentError("mel_l1_distance: no common frames");
  return (a.leftCols(n) - b.leftCols(n)).cwiseAbs().mean();
}

}  // namespace w2n
