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

#ifndef W2N_CONFIG_HPP_
#define W2N_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "w2n/corpus.hpp"
#include "w2n/dsp.hpp"
#include "w2n/eval.hpp"
#include "w2n/gan.hpp"
#include "w2n/masking.hpp"
#include "w2n/synthesis.hpp"
#include "w2n/vad.hpp"

namespace w2n {

struct ServeSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string clips_dir;
  std::string store_dir = "mos_store";
  int clips_per_session = 6;
  bool fixed_pool = false;
  std::string operator_token;
};

void to_json(nlohmann::json& j, const ServeSettings& s);
void from_json(const nlohmann::json& j, ServeSettings& s);

// Everything a run needs. The analysis config, mask and seed are shared;
// sync() copies them into the nested module configs.
struct PipelineConfig {
  std::string corpus_root;
  // "US", "SG" or empty for no filter.
  std::string site_filter = "US";
  CorpusConfig corpus;
  AnalysisConfig analysis;
  VadConfig vad;
  MaskConfig mask = MaskConfig::proposed();
  TrainConfig train;
  VocoderSettings vocoder;
  EvalSettings eval;
  ServeSettings serve;
  std::string output_dir = "runs";
  std::uint64_t seed = 0;

  void sync();
  void validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

// Sets the field at a dotted path (e.g. "train.epochs"). The value is parsed
// as JSON when possible and taken as a string otherwise. Unknown paths are
// an ArgumentError.
void apply_override(nlohmann::json& doc, const std::string& dotted_path,
                    const std::string& value);

// Defaults, then the optional file, then overrides; synced and validated.
PipelineConfig resolve_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

std::string dump_config(const PipelineConfig& c);

}  // namespace w2n

#endif  // W2N_CONFIG_HPP_
