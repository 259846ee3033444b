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

#ifndef W2N_TESTS_HELPERS_HPP_
#define W2N_TESTS_HELPERS_HPP_

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "w2n/dsp.hpp"
#include "w2n/wav.hpp"

namespace w2n::testing {

inline Waveform sine(double hz, double seconds, int rate = kPipelineSampleRate,
                     double amp = 0.5, double phase = 0.0) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(
        amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase));
  }
  return w;
}

inline Waveform silence(double seconds, int rate = kPipelineSampleRate) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.assign(static_cast<std::size_t>(std::llround(seconds * rate)), 0.0f);
  return w;
}

inline Waveform white_noise(double seconds, std::uint64_t seed, int rate = kPipelineSampleRate,
                            double amp = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (auto& s : w.samples) s = static_cast<float>(u(rng));
  return w;
}

inline Waveform concat(const std::vector<Waveform>& parts) {
  Waveform w;
  w.sample_rate = parts.front().sample_rate;
  for (const auto& p : parts) w.samples.insert(w.samples.end(), p.samples.begin(), p.samples.end());
  return w;
}

// Harmonic source through a few fixed resonances: a crude voiced vowel.
// With noise_excitation the same resonances are driven by white noise, a
// crude whisper.
inline Waveform synthetic_vowel(double seconds, double f0, bool noise_excitation,
                                std::uint64_t seed, int rate = kPipelineSampleRate) {
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> src(n, 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (noise_excitation) {
      src[i] = g(rng) * 0.3;
    } else {
      const double t = static_cast<double>(i) / rate;
      for (int h = 1; h * f0 < 4000.0; ++h) src[i] += std::sin(2 * std::numbers::pi * h * f0 * t) / h;
      src[i] *= 0.3;
    }
  }
  const double formants[] = {700.0, 1200.0, 2600.0};
  const double bandwidths[] = {110.0, 120.0, 160.0};
  std::vector<double> out(n, 0.0);
  for (int k = 0; k < 3; ++k) {
    const double r = std::exp(-std::numbers::pi * bandwidths[k] / rate);
    const double c = 2 * r * std::cos(2 * std::numbers::pi * formants[k] / rate);
    double y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = (1 - r) * src[i] + c * y1 - r * r * y2;
      out[i] += y;
      y2 = y1;
      y1 = y;
    }
  }
  double peak = 0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = static_cast<float>(0.8 * out[i] / peak);
  return w;
}

// Parallel-style utterance: syllables of different vowels under a rising
// and falling f0, each with an attack/decay envelope. The timing and
// resonances depend only on `seconds`, so a voiced and a noise-excited call
// form an aligned pair.
inline Waveform synthetic_utterance(double seconds, bool noise_excitation, std::uint64_t seed,
                                    int rate = kPipelineSampleRate) {
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * rate));
  const double vowels[][3] = {{730, 1090, 2440}, {270, 2290, 3010}, {570, 840, 2410},
                              {300, 870, 2240}, {530, 1840, 2480}};
  const double syllable = 0.18;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> out(n, 0.0);
  double phase = 0.0;
  double y[3][2] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const int syl = static_cast<int>(t / syllable);
    const double pos = t / syllable - syl;
    const double env = std::sin(std::numbers::pi * pos) * (pos < 0.85 ? 1.0 : (1.0 - pos) / 0.15);
    const double f0 = 110.0 + 40.0 * std::sin(std::numbers::pi * t / seconds);
    double src = 0.0;
    if (noise_excitation) {
      src = 0.3 * g(rng);
    } else {
      phase += 2 * std::numbers::pi * f0 / rate;
      for (int h = 1; h * f0 < 4000.0; ++h) src += std::sin(h * phase) / h;
      src *= 0.3;
    }
    src *= env;
    const auto& fm = vowels[syl % 5];
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double r = std::exp(-std::numbers::pi * (90.0 + 40.0 * k) / rate);
      const double c = 2 * r * std::cos(2 * std::numbers::pi * fm[k] / rate);
      const double v = (1 - r) * src + c * y[k][0] - r * r * y[k][1];
      y[k][1] = y[k][0];
      y[k][0] = v;
      acc += v;
    }
    out[i] = acc;
  }
  double peak = 1e-12;
  for (double v : out) peak = std::max(peak, std::abs(v));
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = static_cast<float>(0.8 * out[i] / peak);
  return w;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "w2n_test") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Runs a shell command, returns exit status; stdout/stderr go to out_file.
inline int run_command(const std::string& cmd, const std::filesystem::path& out_file) {
  const std::string full = cmd + " >" + out_file.string() + " 2>&1";
  const int rc = std::system(full.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace w2n::testing

#endif  // W2N_TESTS_HELPERS_HPP_
