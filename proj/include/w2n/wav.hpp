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

#ifndef W2N_WAV_HPP_
#define W2N_WAV_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace w2n {

// Mono audio with amplitudes nominally in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Raw decoded WAV contents before mixing to mono.
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::vector<float> interleaved;

  std::size_t num_frames() const {
    return channels > 0 ? interleaved.size() / channels : 0;
  }
};

// Lightweight header probe: format fields and sample-frame count.
struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t num_frames = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(num_frames) / sample_rate
                           : 0.0;
  }
};

// Parses RIFF/WAVE PCM (8/16/24/32-bit) or IEEE float32 data.
// Throws LoadError with the path on malformed input.
WavData read_wav(const std::filesystem::path& path);
WavData parse_wav(std::span<const std::uint8_t> bytes,
                  const std::string& origin = "<memory>");
WavInfo probe_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono; samples outside [-1, 1] are clipped.
void write_wav(const std::filesystem::path& path, const Waveform& w);
std::vector<std::uint8_t> encode_wav(const Waveform& w);

}  // namespace w2n

#endif  // W2N_WAV_HPP_
