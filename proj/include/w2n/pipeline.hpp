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

#ifndef W2N_PIPELINE_HPP_
#define W2N_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "w2n/config.hpp"

namespace w2n {

struct PreparedAudio {
  Waveform waveform;
  // Present when the VAD ran.
  std::optional<VadLabels> labels;
  bool no_speech = false;
};

// Loads at the analysis rate; with trim set, classifies with the style's
// threshold and cuts leading and trailing non-speech.
PreparedAudio prepare_audio(const std::filesystem::path& path, SpeechStyle style,
                            bool trim, const VadConfig& vad);

// Mel spectrograms of one speaker's pairs in a partition.
SpeakerData load_speaker_data(const CorpusManifest& manifest,
                              const std::string& speaker_id, Partition partition,
                              const PipelineConfig& cfg);

}  // namespace w2n

#endif  // W2N_PIPELINE_HPP_
