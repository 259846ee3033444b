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

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "w2n/errors.hpp"
#include "w2n/synthesis.hpp"

using namespace w2n;

namespace {

double rms(const Waveform& w) {
  double acc = 0;
  for (float s : w.samples) acc += static_cast<double>(s) * s;
  return w.samples.empty() ? 0.0 : std::sqrt(acc / w.samples.size());
}

void write_sidecar(const std::filesystem::path& model, int bins, int rate,
                   const std::string& hash, const std::string& command) {
  std::ofstream(model) << "weights";
  nlohmann::json j{{"mel_bins", bins}, {"sample_rate", rate}, {"config_hash", hash},
                   {"command", command}};
  std::ofstream(model.string() + ".json") << j.dump();
}

}  // namespace

TEST_SUITE("synthesis") {
  TEST_CASE("griffin-lim output length follows the frame count") {
    const AnalysisConfig cfg;
    const MelSpectrogram m = mel_spectrogram(testing::synthetic_vowel(1.0, 140.0, false, 1), cfg);
    REQUIRE(m.frames() == 197);
    const Waveform w = vocode(m, VocoderAdapter::griffin_lim(cfg, 8));
    CHECK(w.samples.size() == 197u * 110u);
    CHECK(w.sample_rate == 22050);
    float peak = 0;
    for (float s : w.samples) peak = std::max(peak, std::abs(s));
    CHECK(peak == doctest::Approx(1.0f));
  }

  TEST_CASE("floor-level spectrogram is near silent") {
    const AnalysisConfig cfg;
    MelSpectrogram m;
    m.config = cfg;
    m.values = Eigen::MatrixXd::Constant(80, 60, cfg.log_floor_value());
    const Waveform w = vocode(m, VocoderAdapter::griffin_lim(cfg, 8));
    CHECK(rms(w) < 1e-3);
  }

  TEST_CASE("adapter rejects a spectrogram from another analysis config") {
    AnalysisConfig other;
    other.mel_bins = 64;
    MelSpectrogram m;
    m.config = other;
    m.values = Eigen::MatrixXd::Zero(64, 10);
    CHECK_THROWS_AS(vocode(m, VocoderAdapter::griffin_lim(AnalysisConfig{}, 4)), ContractError);
  }

  TEST_CASE("pretrained adapter checks its metadata") {
    testing::TempDir dir;
    const AnalysisConfig cfg;
    const auto model = dir.path() / "voc.bin";
    write_sidecar(model, 80, 22050, cfg.hash_hex(), "true");
    CHECK_NOTHROW(VocoderAdapter::pretrained(model, cfg));

    write_sidecar(model, 64, 22050, cfg.hash_hex(), "true");
    CHECK_THROWS_AS(VocoderAdapter::pretrained(model, cfg), ContractError);
    write_sidecar(model, 80, 16000, cfg.hash_hex(), "true");
    CHECK_THROWS_AS(VocoderAdapter::pretrained(model, cfg), ContractError);
    write_sidecar(model, 80, 22050, "0000", "true");
    try {
      VocoderAdapter::pretrained(model, cfg);
      FAIL("expected ContractError");
    } catch (const ContractError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("0000") != std::string::npos);
      CHECK(msg.find(cfg.hash_hex()) != std::string::npos);
    }
    CHECK_THROWS_AS(VocoderAdapter::pretrained(dir.path() / "none.bin", cfg), LoadError);

    VocoderSettings s;
    s.backend = VocoderBackend::kPretrainedNeural;
    CHECK_THROWS_AS(make_vocoder(s, cfg), ArgumentError);
  }

  TEST_CASE("external vocoder command produces the waveform") {
    testing::TempDir dir;
    const AnalysisConfig cfg;
    const Waveform canned = testing::sine(330.0, 0.5, 22050, 0.25);
    const auto canned_path = dir.path() / "canned.wav";
    write_wav(canned_path, canned);
    const auto model = dir.path() / "voc.bin";
    write_sidecar(model, 80, 22050, cfg.hash_hex(),
                  "test -f {mel} && test -f {model} && cp '" + canned_path.string() + "' {wav}");
    MelSpectrogram m;
    m.config = cfg;
    m.values = Eigen::MatrixXd::Zero(80, 40);
    const Waveform w = vocode(m, VocoderAdapter::pretrained(model, cfg));
    CHECK(w.samples.size() == 40u * 110u);
    CHECK(rms(w) > 0.1);

    write_sidecar(model, 80, 22050, cfg.hash_hex(), "exit 1");
    CHECK_THROWS_AS(vocode(m, VocoderAdapter::pretrained(model, cfg)), Error);
  }

  TEST_CASE("vocoder settings parse") {
    VocoderSettings s;
    s.griffin_lim_iterations = 7;
    const VocoderSettings back = nlohmann::json(s).get<VocoderSettings>();
    CHECK(back.griffin_lim_iterations == 7);
    CHECK(back.backend == VocoderBackend::kGriffinLim);
    CHECK_THROWS_AS(parse_vocoder_backend("wavenet"), ArgumentError);
  }
}
