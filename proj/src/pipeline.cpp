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

#include "w2n/pipeline.hpp"

#include "w2n/errors.hpp"

namespace w2n {

PreparedAudio prepare_audio(const std::filesystem::path& path, SpeechStyle style,
                            bool trim, const VadConfig& vad) {
  PreparedAudio out;
  out.waveform = load_audio(path, vad.analysis.sample_rate);
  if (!trim) return out;
  VadLabels labels = classify(out.waveform, style, vad);
  TrimResult t = trim_silence(out.waveform, labels);
  out.waveform = std::move(t.waveform);
  out.no_speech = t.no_speech;
  out.labels = std::move(labels);
  return out;
}

SpeakerData load_speaker_data(const CorpusManifest& manifest,
                              const std::string& speaker_id, Partition partition,
                              const PipelineConfig& cfg) {
  const CorpusManifest view = speaker_view(manifest, speaker_id);
  SpeakerData data;
  data.speaker_id = speaker_id;
  data.analysis = cfg.analysis;
  const bool trim = cfg.train.vad_enabled;
  for (const auto& p : view.pairs) {
    if (view.partition_of(p.utterance_id).value_or(Partition::kTrain) != partition) continue;
    const auto w = prepare_audio(p.whisper.audio_path, SpeechStyle::kWhisper, trim, cfg.vad);
    const auto n = prepare_audio(p.normal.audio_path, SpeechStyle::kNormal, trim, cfg.vad);
    try {
      data.whisper.push_back(mel_spectrogram(w.waveform, cfg.analysis).values);
      data.normal.push_back(mel_spectrogram(n.waveform, cfg.analysis).values);
    } catch (const TooShortError&) {
      if (data.whisper.size() > data.normal.size()) data.whisper.pop_back();
    }
  }
  if (data.whisper.empty()) {
    throw NotFoundError("speaker '" + speaker_id + "' has no usable " +
                        to_string(partition) + " pairs");
  }
  return data;
}

}  // namespace w2n
