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

#include "w2n/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "w2n/errors.hpp"

namespace w2n {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back((v >> 8) & 0xFF);
}

struct Chunks {
  std::uint16_t format = 0;
  int channels = 0;
  int sample_rate = 0;
  int bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

Chunks scan_chunks(std::span<const std::uint8_t> bytes,
                   const std::string& origin) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw LoadError(origin, "not a RIFF/WAVE file");
  }
  Chunks c;
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::size_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) {
        throw LoadError(origin, "truncated fmt chunk");
      }
      const std::uint8_t* f = bytes.data() + body;
      c.format = read_u16(f);
      c.channels = read_u16(f + 2);
      c.sample_rate = static_cast<int>(read_u32(f + 4));
      c.bits = read_u16(f + 14);
      if (c.format == kFormatExtensible && size >= 26 &&
          body + 26 <= bytes.size()) {
        c.format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      c.data_offset = body;
      // Streams written without a final size report 0 or 0xFFFFFFFF.
      c.data_size = std::min(size, bytes.size() - body);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw LoadError(origin, "missing fmt chunk");
  if (!have_data) throw LoadError(origin, "missing data chunk");
  if (c.channels <= 0) throw LoadError(origin, "invalid channel count");
  if (c.sample_rate <= 0) throw LoadError(origin, "invalid sample rate");
  const bool pcm_ok = c.format == kFormatPcm &&
                      (c.bits == 8 || c.bits == 16 || c.bits == 24 ||
                       c.bits == 32);
  const bool float_ok = c.format == kFormatFloat && c.bits == 32;
  if (!pcm_ok && !float_ok) {
    throw LoadError(origin, "unsupported sample format (format " +
                                std::to_string(c.format) + ", " +
                                std::to_string(c.bits) + " bits)");
  }
  return c;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open file");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

WavData parse_wav(std::span<const std::uint8_t> bytes,
                  const std::string& origin) {
  const Chunks c = scan_chunks(bytes, origin);
  const int bytes_per_sample = c.bits / 8;
  const std::size_t count = c.data_size / bytes_per_sample;
  WavData out;
  out.sample_rate = c.sample_rate;
  out.channels = c.channels;
  out.bits_per_sample = c.bits;
  out.interleaved.resize(count - count % c.channels);
  const std::uint8_t* p = bytes.data() + c.data_offset;
  for (std::size_t i = 0; i < out.interleaved.size(); ++i, p += bytes_per_sample) {
    float v = 0.f;
    if (c.format == kFormatFloat) {
      std::uint32_t bits = read_u32(p);
      std::memcpy(&v, &bits, sizeof(v));
    } else if (c.bits == 8) {
      v = (static_cast<int>(p[0]) - 128) / 128.f;
    } else if (c.bits == 16) {
      v = static_cast<std::int16_t>(read_u16(p)) / 32768.f;
    } else if (c.bits == 24) {
      std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
      if (s & 0x800000) s |= ~0xFFFFFF;
      v = static_cast<float>(s / 8388608.0);
    } else {
      v = static_cast<float>(static_cast<std::int32_t>(read_u32(p)) /
                             2147483648.0);
    }
    out.interleaved[i] = v;
  }
  return out;
}

WavData read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  return parse_wav(bytes, path.string());
}

WavInfo probe_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open file");
  // Header chunks normally sit in the first few KB; fall back to the whole
  // file when a large metadata chunk precedes the data chunk.
  std::vector<std::uint8_t> head(4096);
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  head.resize(static_cast<std::size_t>(in.gcount()));
  const auto file_size = std::filesystem::file_size(path);
  Chunks c;
  try {
    c = scan_chunks(head, path.string());
  } catch (const LoadError&) {
    if (file_size <= head.size()) throw;
    c = scan_chunks(slurp(path), path.string());
  }
  const std::size_t data_size =
      std::min<std::size_t>(c.data_size, file_size - c.data_offset);
  WavInfo info;
  info.sample_rate = c.sample_rate;
  info.channels = c.channels;
  info.bits_per_sample = c.bits;
  info.num_frames = data_size / (c.bits / 8) / c.channels;
  return info;
}

std::vector<std::uint8_t> encode_wav(const Waveform& w) {
  if (w.sample_rate <= 0) throw ArgumentError("encode_wav: invalid sample rate");
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (float s : w.samples) {
    const float c = std::isfinite(s) ? std::clamp(s, -1.f, 1.f) : 0.f;
    const auto q = static_cast<std::int16_t>(
        std::lround(std::clamp(c * 32768.f, -32768.f, 32767.f)));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav(w);
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace w2n
