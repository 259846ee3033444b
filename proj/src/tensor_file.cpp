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

#include "w2n/tensor_file.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "w2n/errors.hpp"

namespace w2n {

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    b[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& buf, std::size_t& pos,
      const std::string& origin) {
  if (pos + sizeof(T) > buf.size()) throw LoadError(origin, "truncated header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace

void write_mel(const std::filesystem::path& path, const MelSpectrogram& spec,
               TensorDtype dtype) {
  nlohmann::json meta;
  meta["config"] = spec.config;
  if (spec.stats) meta["stats"] = *spec.stats;
  const std::string meta_str = meta.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write("W2NT", 4);
  put<std::uint32_t>(out, kTensorFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.values.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.values.cols()));
  put<std::uint64_t>(out, spec.config.hash());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta_str.size()));
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  for (Eigen::Index r = 0; r < spec.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < spec.values.cols(); ++c) {
      if (dtype == TensorDtype::kFloat32) {
        const float v = static_cast<float>(spec.values(r, c));
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put<std::uint32_t>(out, bits);
      } else {
        const double v = spec.values(r, c);
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put<std::uint64_t>(out, bits);
      }
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

MelSpectrogram read_mel(const std::filesystem::path& path) {
  const std::string origin = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(origin, "cannot open file");
  const std::vector<unsigned char> buf(std::istreambuf_iterator<char>(in), {});
  if (buf.size() < 4 || std::memcmp(buf.data(), "W2NT", 4) != 0) {
    throw LoadError(origin, "bad magic");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(buf, pos, origin);
  if (version != kTensorFileVersion) {
    throw LoadError(origin, "unsupported version " + std::to_string(version));
  }
  const auto dtype = static_cast<TensorDtype>(get<std::uint32_t>(buf, pos, origin));
  if (dtype != TensorDtype::kFloat32 && dtype != TensorDtype::kFloat64) {
    throw LoadError(origin, "unknown dtype");
  }
  const auto rows = get<std::uint32_t>(buf, pos, origin);
  const auto cols = get<std::uint32_t>(buf, pos, origin);
  const auto hash = get<std::uint64_t>(buf, pos, origin);
  const auto meta_len = get<std::uint32_t>(buf, pos, origin);
  if (pos + meta_len > buf.size()) throw LoadError(origin, "truncated metadata");
  MelSpectrogram spec;
  try {
    const auto meta = nlohmann::json::parse(buf.begin() + pos,
                                            buf.begin() + pos + meta_len);
    spec.config = meta.at("config").get<AnalysisConfig>();
    if (meta.contains("stats")) spec.stats = meta.at("stats").get<NormStats>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(origin, std::string("bad metadata: ") + e.what());
  }
  pos += meta_len;
  if (spec.config.hash() != hash) throw LoadError(origin, "config hash mismatch");
  const std::size_t width = dtype == TensorDtype::kFloat32 ? 4 : 8;
  if (buf.size() - pos < static_cast<std::size_t>(rows) * cols * width) {
    throw LoadError(origin, "truncated data");
  }
  spec.values.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (dtype == TensorDtype::kFloat32) {
        const auto bits = get<std::uint32_t>(buf, pos, origin);
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        spec.values(r, c) = v;
      } else {
        const auto bits = get<std::uint64_t>(buf, pos, origin);
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        spec.values(r, c) = v;
      }
    }
  }
  return spec;
}

}  // namespace w2n
