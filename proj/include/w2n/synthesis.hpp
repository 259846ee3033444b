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

#ifndef W2N_SYNTHESIS_HPP_
#define W2N_SYNTHESIS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "w2n/dsp.hpp"

namespace w2n {

enum class VocoderBackend { kGriffinLim, kPretrainedNeural };

std::string to_string(VocoderBackend b);
VocoderBackend parse_vocoder_backend(const std::string& s);

// Sidecar metadata stored next to a pretrained model as <model>.json.
// The command is run through the shell with {mel} and {wav} replaced by a
// mel tensor file path and the output WAV path.
struct VocoderMetadata {
  int mel_bins = 0;
  int sample_rate = 0;
  std::string config_hash;
  std::string command;

  static VocoderMetadata load(const std::filesystem::path& model_path);
};

struct VocoderAdapter {
  VocoderBackend backend = VocoderBackend::kGriffinLim;
  std::optional<std::filesystem::path> model_path;
  AnalysisConfig expected;
  int griffin_lim_iterations = 60;
  std::uint64_t seed = 0;
  std::optional<VocoderMetadata> metadata;

  static VocoderAdapter griffin_lim(const AnalysisConfig& cfg, int iterations = 60);
  // Loads and checks the sidecar; throws ContractError when it disagrees
  // with cfg.
  static VocoderAdapter pretrained(const std::filesystem::path& model,
                                   const AnalysisConfig& cfg);
};

struct VocoderSettings {
  VocoderBackend backend = VocoderBackend::kGriffinLim;
  std::string model_path;
  int griffin_lim_iterations = 60;
};

void to_json(nlohmann::json& j, const VocoderSettings& s);
void from_json(const nlohmann::json& j, VocoderSettings& s);

VocoderAdapter make_vocoder(const VocoderSettings& s, const AnalysisConfig& cfg);

// Returns exactly frames * shift samples, peak-normalized.
Waveform vocode(const MelSpectrogram& spec, const VocoderAdapter& adapter);

}  // namespace w2n

#endif  // W2N_SYNTHESIS_HPP_
