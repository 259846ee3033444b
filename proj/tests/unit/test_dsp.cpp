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

#include <doctest.h>

#include <complex>
#include <cstring>
#include <fstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "w2n/dsp.hpp"
#include "w2n/errors.hpp"

using namespace w2n;
namespace wt = w2n::testing;

namespace {

// Straight O(N^2) DFT magnitude of a Hann-windowed, zero-padded frame.
std::vector<double> naive_magnitude(const std::vector<float>& x, std::size_t start, int len,
                                    int nfft) {
  std::vector<double> mag(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) {
    std::complex<double> acc = 0;
    for (int i = 0; i < len; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / len);
      acc += w * x[start + i] * std::polar(1.0, -2 * std::numbers::pi * k * i / nfft);
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

double slaney_mel(double hz) {
  const double f_sp = 200.0 / 3.0;
  if (hz < 1000.0) return hz / f_sp;
  return 1000.0 / f_sp + std::log(hz / 1000.0) / (std::log(6.4) / 27.0);
}

}  // namespace

TEST_SUITE("dsp") {
  TEST_CASE("analysis config lengths and validation") {
    AnalysisConfig c;
    CHECK(c.frame_length() == 441);
    CHECK(c.shift_length() == 110);
    c.sample_rate = 16000;
    c.fmax = 8000;
    CHECK(c.frame_length() == 320);
    CHECK(c.shift_length() == 80);
    AnalysisConfig bad;
    bad.fmax = 20000;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    bad = AnalysisConfig{};
    bad.mel_bins = 0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    CHECK(AnalysisConfig{}.hash() == AnalysisConfig{}.hash());
    AnalysisConfig other;
    other.mel_bins = 64;
    CHECK(other.hash() != AnalysisConfig{}.hash());
  }

  TEST_CASE("frame count matches brute-force enumeration") {
    std::mt19937_64 rng(7);
    const int rates[] = {8000, 16000, 22050, 44100, 48000};
    for (int t = 0; t < 1000; ++t) {
      AnalysisConfig c;
      c.sample_rate = rates[rng() % 5];
      const std::size_t n = rng() % (2 * c.sample_rate);
      CHECK(frame_count(n, c.frame_length(), c.shift_length()) ==
            wt::brute_frame_count(n, c.frame_length(), c.shift_length()));
    }
    CHECK(frame_count(22050, 441, 110) == 197);
  }

  TEST_CASE("slaney mel scale") {
    for (double hz : {0.0, 250.0, 999.0, 1000.0, 4000.0, 11025.0}) {
      CHECK(hz_to_mel(hz) == doctest::Approx(slaney_mel(hz)).epsilon(1e-12));
      CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
    }
  }

  TEST_CASE("filterbank is nonnegative with every filter populated") {
    const auto fb = mel_filterbank(AnalysisConfig{});
    CHECK(fb.rows() == 80);
    CHECK(fb.cols() == 257);
    CHECK(fb.minCoeff() >= 0.0);
    for (int m = 0; m < fb.rows(); ++m) CHECK(fb.row(m).maxCoeff() > 0.0);
  }

  TEST_CASE("stft magnitude equals a direct DFT") {
    const auto w = wt::white_noise(0.05, 3);
    AnalysisConfig c;
    const auto mag = stft_magnitude(w, c);
    CHECK(mag.cols() == frame_count(w.samples.size(), 441, 110));
    for (int t : {0, 3}) {
      const auto ref = naive_magnitude(w.samples, t * 110, 441, 512);
      for (int k = 0; k < 257; ++k) CHECK(mag(k, t) == doctest::Approx(ref[k]).epsilon(1e-9));
    }
  }

  TEST_CASE("one second gives 197 frames") {
    const auto m = mel_spectrogram(wt::sine(440, 1.0), AnalysisConfig{});
    CHECK(m.bins() == 80);
    CHECK(m.frames() == 197);
  }

  TEST_CASE("silence sits exactly on the floor") {
    const auto m = mel_spectrogram(wt::silence(0.2), AnalysisConfig{});
    CHECK(m.values.minCoeff() == std::log(1e-5));
    CHECK(m.values.maxCoeff() == std::log(1e-5));
  }

  TEST_CASE("values never fall below the floor") {
    const auto m = mel_spectrogram(wt::white_noise(0.3, 5, kPipelineSampleRate, 1e-6), AnalysisConfig{});
    CHECK(m.values.minCoeff() >= std::log(1e-5));
  }

  TEST_CASE("too-short input is an explicit error") {
    CHECK_THROWS_AS(mel_spectrogram(wt::silence(0.01), AnalysisConfig{}), TooShortError);
  }

  TEST_CASE("1 kHz tone is stationary and peaks at the 1 kHz mel bin") {
    AnalysisConfig c;
    const auto m = mel_spectrogram(wt::sine(1000, 0.5), c);
    Eigen::Index peak_bin = 0;
    m.values.col(10).maxCoeff(&peak_bin);
    // Independent centre frequencies: bins are evenly spaced on the mel axis.
    const double step = (slaney_mel(c.fmax) - slaney_mel(c.fmin)) / (c.mel_bins + 1);
    int expected = 0;
    double best = 1e9;
    for (int b = 0; b < c.mel_bins; ++b) {
      const double centre_mel = slaney_mel(c.fmin) + (b + 1) * step;
      const double d = std::abs(centre_mel - slaney_mel(1000.0));
      if (d < best) best = d, expected = b;
    }
    CHECK(std::abs(static_cast<int>(peak_bin) - expected) <= 1);
    for (int t = 1; t < m.frames(); ++t) {
      CHECK(std::abs(m.values(peak_bin, t) - m.values(peak_bin, 0)) < 0.05);
    }
  }

  TEST_CASE("prepending one shift of silence adds one leading frame") {
    AnalysisConfig c;
    const auto w = wt::white_noise(0.25, 11);
    Waveform shifted = w;
    shifted.samples.insert(shifted.samples.begin(), c.shift_length(), 0.0f);
    const auto a = mel_spectrogram(w, c);
    const auto b = mel_spectrogram(shifted, c);
    REQUIRE(b.frames() == a.frames() + 1);
    CHECK((b.values.rightCols(a.frames()) - a.values).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(b.values.col(0).sum() < a.values.col(0).sum());
  }

  TEST_CASE("resample length and tone preservation") {
    const auto w = wt::sine(440, 1.0, 8000);
    const auto r = resample(w, kPipelineSampleRate);
    CHECK(r.sample_rate == kPipelineSampleRate);
    CHECK(std::abs(static_cast<long>(r.samples.size()) - 22050) <= 1);
    // Zero-crossing count of a 440 Hz tone over 1 s is about 880 either way.
    int zc = 0;
    for (std::size_t i = 1; i < r.samples.size(); ++i) zc += (r.samples[i - 1] >= 0) != (r.samples[i] >= 0);
    CHECK(std::abs(zc - 880) <= 2);
    CHECK(resample(w, 8000).samples == w.samples);
  }

  TEST_CASE("load_audio: stereo 44.1 kHz becomes mono, resampled, unit peak") {
    wt::TempDir dir;
    // Build a stereo file by hand: left tone, right silent.
    auto tone = wt::sine(300, 0.5, 44100, 0.4);
    Waveform inter{{}, 44100};
    for (float s : tone.samples) {
      inter.samples.push_back(s);
      inter.samples.push_back(0.0f);
    }
    // write_wav emits mono, so encode channels through a 2x-rate mono file
    // and re-tag the header.
    auto bytes = encode_wav(inter);
    bytes[22] = 2;  // channels
    const std::uint32_t rate = 44100, byte_rate = 44100 * 4;
    std::memcpy(&bytes[24], &rate, 4);
    std::memcpy(&bytes[28], &byte_rate, 4);
    bytes[32] = 4;  // block align
    std::ofstream(dir / "s.wav", std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    const auto w = load_audio(dir / "s.wav");
    CHECK(w.sample_rate == kPipelineSampleRate);
    CHECK(std::abs(static_cast<long>(w.samples.size()) - 11025) <= 1);
    float peak = 0;
    for (float s : w.samples) peak = std::max(peak, std::abs(s));
    CHECK(peak == doctest::Approx(1.0f));

    write_wav(dir / "z.wav", wt::silence(0.1, 16000));
    const auto z = load_audio(dir / "z.wav");
    for (float s : z.samples) CHECK(s == 0.0f);
    CHECK_THROWS_AS(load_audio(dir / "missing.wav"), LoadError);
  }

  TEST_CASE("resize: identity, constants and round-trip shape") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Random(224, 224);
    CHECK(resize_bilinear(id, 224, 224) == id);
    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(80, 197, -3.25);
    const auto img = resize_bilinear(c, 224, 224);
    CHECK((img.array() + 3.25).abs().maxCoeff() < 1e-12);

    MelSpectrogram m;
    m.values.resize(80, 197);
    for (int r = 0; r < 80; ++r) {
      for (int t = 0; t < 197; ++t) m.values(r, t) = std::sin(r / 13.0) * std::cos(t / 29.0);
    }
    const SpecImage si = resize_to_image(m);
    CHECK(si.values.rows() == kImageSize);
    CHECK(si.values.cols() == kImageSize);
    CHECK(si.source_bins == 80);
    CHECK(si.source_frames == 197);
    const auto back = resize_from_image(si);
    CHECK(back.bins() == 80);
    CHECK(back.frames() == 197);
    CHECK((back.values - m.values).cwiseAbs().maxCoeff() < 1e-2);

    for (int rows : {1, 3, 80}) {
      for (int cols : {1, 2, 500}) {
        MelSpectrogram q;
        q.values = Eigen::MatrixXd::Random(rows, cols);
        const auto rt = resize_from_image(resize_to_image(q));
        CHECK(rt.bins() == rows);
        CHECK(rt.frames() == cols);
      }
    }
  }

  TEST_CASE("normalization round trip") {
    std::vector<Eigen::MatrixXd> feats = {Eigen::MatrixXd::Random(4, 10),
                                          Eigen::MatrixXd::Random(4, 7)};
    const auto s = compute_norm_stats(feats);
    Eigen::MatrixXd all(4, 17);
    all << feats[0], feats[1];
    for (int r = 0; r < 4; ++r) {
      const double mean = all.row(r).mean();
      const double var = (all.row(r).array() - mean).square().mean();
      CHECK(s.mean(r) == doctest::Approx(mean));
      CHECK(s.stddev(r) == doctest::Approx(std::sqrt(var)));
    }
    CHECK((denormalize(normalize(feats[0], s), s) - feats[0]).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("griffin-lim") {
    AnalysisConfig c;
    CHECK_THROWS_AS(griffin_lim(mel_spectrogram(wt::sine(500, 0.2), c), 0), ArgumentError);

    MelSpectrogram floor;
    floor.config = c;
    floor.values = Eigen::MatrixXd::Constant(80, 40, std::log(c.log_floor));
    const auto quiet = griffin_lim(floor, 10);
    double ss = 0;
    for (float s : quiet.samples) ss += s * s;
    CHECK(std::sqrt(ss / quiet.samples.size()) < 1e-3);

    const auto tone = mel_spectrogram(wt::sine(1000, 0.3), c);
    const auto rec = griffin_lim(tone, 30);
    CHECK(rec.samples.size() == static_cast<std::size_t>((tone.frames() - 1) * 110 + 441));
    const auto re = mel_spectrogram(rec, c);
    CHECK(re.frames() == tone.frames());
    Eigen::Index a = 0, b = 0;
    tone.values.col(tone.frames() / 2).maxCoeff(&a);
    re.values.col(re.frames() / 2).maxCoeff(&b);
    CHECK(a == b);

    const auto speech = mel_spectrogram(wt::synthetic_vowel(0.4, 120, false, 1), c);
    const double d10 = mel_l1_distance(mel_spectrogram(griffin_lim(speech, 10), c).values, speech.values);
    const double d60 = mel_l1_distance(mel_spectrogram(griffin_lim(speech, 60), c).values, speech.values);
    CHECK(d60 <= d10);
  }
}
