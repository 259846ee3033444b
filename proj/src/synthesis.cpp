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

#include "w2n/synthesis.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "w2n/errors.hpp"
#include "w2n/tensor_file.hpp"

namespace w2n {

namespace {

std::string describe(const AnalysisConfig& c) {
  std::ostringstream os;
  os << "mel_bins=" << c.mel_bins << " sample_rate=" << c.sample_rate
     << " hash=" << c.hash_hex();
  return os.str();
}

void check_contract(const MelSpectrogram& spec, const VocoderAdapter& a) {
  if (spec.config.hash() != a.expected.hash() || spec.bins() != a.expected.mel_bins) {
    throw ContractError("vocoder input mismatch: spectrogram {" + describe(spec.config) +
                        ", rows=" + std::to_string(spec.bins()) + "} vs vocoder {" +
                        describe(a.expected) + "}");
  }
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos;
       pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

Waveform run_external(const MelSpectrogram& spec, const VocoderAdapter& a) {
  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() /
                       ("w2n_vocode_" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};
  const fs::path mel = dir / "input.w2nt";
  const fs::path wav = dir / "output.wav";
  write_mel(mel, spec);
  std::string cmd = a.metadata->command;
  replace_all(cmd, "{mel}", shell_quote(mel.string()));
  replace_all(cmd, "{wav}", shell_quote(wav.string()));
  replace_all(cmd, "{model}", shell_quote(a.model_path->string()));
  const int rc = std::system(cmd.c_str());
  if (rc != 0 || !fs::exists(wav)) {
    throw Error("vocoder command failed (status " + std::to_string(rc) + "): " + cmd);
  }
  Waveform w = to_mono(read_wav(wav));
  if (w.sample_rate != a.expected.sample_rate) {
    throw ContractError("vocoder produced " + std::to_string(w.sample_rate) +
                        " Hz audio, expected " + std::to_string(a.expected.sample_rate));
  }
  return w;
}

}  // namespace

std::string to_string(VocoderBackend b) {
  return b == VocoderBackend::kGriffinLim ? "griffin_lim" : "pretrained_neural";
}

VocoderBackend parse_vocoder_backend(const std::string& s) {
  if (s == "griffin_lim") return VocoderBackend::kGriffinLim;
  if (s == "pretrained_neural") return VocoderBackend::kPretrainedNeural;
  throw ArgumentError("unknown vocoder backend '" + s + "'");
}

VocoderMetadata VocoderMetadata::load(const std::filesystem::path& model_path) {
  const auto sidecar = std::filesystem::path(model_path.string() + ".json");
  std::ifstream in(sidecar);
  if (!in) throw LoadError(sidecar.string(), "missing vocoder metadata sidecar");
  try {
    const auto j = nlohmann::json::parse(in);
    VocoderMetadata m;
    m.mel_bins = j.at("mel_bins").get<int>();
    m.sample_rate = j.at("sample_rate").get<int>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.command = j.at("command").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(sidecar.string(), e.what());
  }
}

VocoderAdapter VocoderAdapter::griffin_lim(const AnalysisConfig& cfg, int iterations) {
  cfg.validate();
  if (iterations < 1) throw ArgumentError("griffin_lim iterations must be >= 1");
  VocoderAdapter a;
  a.expected = cfg;
  a.griffin_lim_iterations = iterations;
  return a;
}

VocoderAdapter VocoderAdapter::pretrained(const std::filesystem::path& model,
                                          const AnalysisConfig& cfg) {
  cfg.validate();
  if (!std::filesystem::exists(model)) {
    throw LoadError(model.string(), "vocoder model not found");
  }
  VocoderMetadata meta = VocoderMetadata::load(model);
  if (meta.mel_bins != cfg.mel_bins || meta.sample_rate != cfg.sample_rate ||
      meta.config_hash != cfg.hash_hex()) {
    throw ContractError("vocoder model metadata {mel_bins=" + std::to_string(meta.mel_bins) +
                        " sample_rate=" + std::to_string(meta.sample_rate) +
                        " hash=" + meta.config_hash + "} does not match pipeline {" +
                        describe(cfg) + "}");
  }
  VocoderAdapter a;
  a.backend = VocoderBackend::kPretrainedNeural;
  a.model_path = model;
  a.expected = cfg;
  a.metadata = std::move(meta);
  return a;
}

void to_json(nlohmann::json& j, const VocoderSettings& s) {
  j = nlohmann::json{{"backend", to_string(s.backend)},
                     {"model_path", s.model_path},
                     {"griffin_lim_iterations", s.griffin_lim_iterations}};
}

void from_json(const nlohmann::json& j, VocoderSettings& s) {
  VocoderSettings d;
  s.backend = parse_vocoder_backend(j.value("backend", to_string(d.backend)));
  s.model_path = j.value("model_path", d.model_path);
  s.griffin_lim_iterations = j.value("griffin_lim_iterations", d.griffin_lim_iterations);
}

VocoderAdapter make_vocoder(const VocoderSettings& s, const AnalysisConfig& cfg) {
  if (s.backend == VocoderBackend::kPretrainedNeural) {
    if (s.model_path.empty()) {
      throw ArgumentError("pretrained_neural vocoder requires model_path");
    }
    return VocoderAdapter::pretrained(s.model_path, cfg);
  }
  return VocoderAdapter::griffin_lim(cfg, s.griffin_lim_iterations);
}

Waveform vocode(const MelSpectrogram& spec, const VocoderAdapter& adapter) {
  check_contract(spec, adapter);
  if (spec.frames() < 1) throw ArgumentError("vocode: spectrogram has no frames");
  if (!spec.values.allFinite()) throw ArgumentError("vocode: non-finite spectrogram");
  Waveform w = adapter.backend == VocoderBackend::kGriffinLim
                   ? w2n::griffin_lim(spec, adapter.griffin_lim_iterations, adapter.seed)
                   : run_external(spec, adapter);
  const std::size_t n =
      static_cast<std::size_t>(spec.frames()) * spec.config.shift_length();
  w.samples.resize(n, 0.0f);
  for (float& s : w.samples) {
    if (!std::isfinite(s)) s = 0.0f;
  }
  peak_normalize(w);
  return w;
}

}  // namespace w2n
