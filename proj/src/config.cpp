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

#include "w2n/config.hpp"

#include <fstream>
#include <sstream>

#include "w2n/errors.hpp"

namespace w2n {

void to_json(nlohmann::json& j, const ServeSettings& s) {
  j = nlohmann::json{{"host", s.host},
                     {"port", s.port},
                     {"clips_dir", s.clips_dir},
                     {"store_dir", s.store_dir},
                     {"clips_per_session", s.clips_per_session},
                     {"fixed_pool", s.fixed_pool},
                     {"operator_token", s.operator_token}};
}

void from_json(const nlohmann::json& j, ServeSettings& s) {
  ServeSettings d;
  s.host = j.value("host", d.host);
  s.port = j.value("port", d.port);
  s.clips_dir = j.value("clips_dir", d.clips_dir);
  s.store_dir = j.value("store_dir", d.store_dir);
  s.clips_per_session = j.value("clips_per_session", d.clips_per_session);
  s.fixed_pool = j.value("fixed_pool", d.fixed_pool);
  s.operator_token = j.value("operator_token", d.operator_token);
}

void PipelineConfig::sync() {
  vad.analysis = analysis;
  mask.seed = seed;
  train.mask = mask;
  train.seed = seed;
  corpus.split_seed = seed;
}

void PipelineConfig::validate() const {
  analysis.validate();
  vad.validate();
  mask.validate();
  train.validate();
  corpus.validate();
  if (!site_filter.empty()) parse_site(site_filter);
  if (eval.cepstral_order < 1 || eval.cepstral_order >= analysis.mel_bins) {
    throw ArgumentError("eval.cepstral_order must be in [1, mel_bins - 1]");
  }
  if (serve.port < 0 || serve.port > 65535) throw ArgumentError("serve.port out of range");
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  nlohmann::json train = c.train;
  train.erase("mask");
  train.erase("seed");
  nlohmann::json corpus = c.corpus;
  corpus.erase("split_seed");
  nlohmann::json mask = c.mask;
  mask.erase("seed");
  j = nlohmann::json{{"corpus_root", c.corpus_root},
                     {"site_filter", c.site_filter},
                     {"corpus", corpus},
                     {"analysis", c.analysis},
                     {"vad", c.vad},
                     {"mask", mask},
                     {"train", train},
                     {"vocoder", c.vocoder},
                     {"eval", c.eval},
                     {"serve", c.serve},
                     {"output_dir", c.output_dir},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  static const char* known[] = {"corpus_root", "site_filter", "corpus", "analysis",
                                "vad",         "mask",        "train",  "vocoder",
                                "eval",        "serve",       "output_dir", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ArgumentError("unknown config key '" + key + "'");
    }
  }
  PipelineConfig d;
  c.corpus_root = j.value("corpus_root", d.corpus_root);
  c.site_filter = j.value("site_filter", d.site_filter);
  c.corpus = j.contains("corpus") ? j.at("corpus").get<CorpusConfig>() : d.corpus;
  c.analysis = j.contains("analysis") ? j.at("analysis").get<AnalysisConfig>() : d.analysis;
  c.vad = j.contains("vad") ? j.at("vad").get<VadConfig>() : d.vad;
  c.mask = j.contains("mask") ? j.at("mask").get<MaskConfig>() : d.mask;
  c.train = j.contains("train") ? j.at("train").get<TrainConfig>() : d.train;
  c.vocoder = j.contains("vocoder") ? j.at("vocoder").get<VocoderSettings>() : d.vocoder;
  c.eval = j.contains("eval") ? j.at("eval").get<EvalSettings>() : d.eval;
  c.serve = j.contains("serve") ? j.at("serve").get<ServeSettings>() : d.serve;
  c.output_dir = j.value("output_dir", d.output_dir);
  c.seed = j.value("seed", d.seed);
}

void apply_override(nlohmann::json& doc, const std::string& dotted_path,
                    const std::string& value) {
  nlohmann::json* node = &doc;
  std::istringstream parts(dotted_path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) keys.push_back(part);
  if (keys.empty()) throw ArgumentError("empty override path");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!node->is_object() || !node->contains(keys[i])) {
      throw ArgumentError("unknown config path '" + dotted_path + "'");
    }
    node = &(*node)[keys[i]];
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;
  }
  if (node->is_string() && !parsed.is_string()) parsed = value;
  *node = parsed;
}

PipelineConfig resolve_config(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  nlohmann::json doc = PipelineConfig{};
  if (file) {
    std::ifstream in(*file);
    if (!in) throw LoadError(file->string(), "cannot open config file");
    nlohmann::json user;
    try {
      user = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(file->string(), e.what());
    }
    doc.merge_patch(user);
  }
  for (const auto& [path, value] : overrides) apply_override(doc, path, value);
  PipelineConfig c;
  try {
    c = doc.get<PipelineConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid config: ") + e.what());
  }
  c.sync();
  c.validate();
  return c;
}

std::string dump_config(const PipelineConfig& c) {
  return nlohmann::json(c).dump(2) + "\n";
}

}  // namespace w2n
