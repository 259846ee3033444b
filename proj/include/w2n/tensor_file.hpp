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

#ifndef W2N_TENSOR_FILE_HPP_
#define W2N_TENSOR_FILE_HPP_

#include <cstdint>
#include <filesystem>

#include "w2n/dsp.hpp"

namespace w2n {

// Binary spectrogram container:
//   "W2NT" | u32 version | u32 dtype | u32 rows | u32 cols | u64 config hash
//   | u32 meta length | meta JSON (config, optional stats) | row-major data
// All integers little-endian. dtype 1 = float32, 2 = float64.
enum class TensorDtype : std::uint32_t { kFloat32 = 1, kFloat64 = 2 };

inline constexpr std::uint32_t kTensorFileVersion = 1;

void write_mel(const std::filesystem::path& path, const MelSpectrogram& spec,
               TensorDtype dtype = TensorDtype::kFloat32);
// Throws LoadError on bad magic, version, truncated data, or a config hash
// that does not match the embedded config.
MelSpectrogram read_mel(const std::filesystem::path& path);

}  // namespace w2n

#endif  // W2N_TENSOR_FILE_HPP_
