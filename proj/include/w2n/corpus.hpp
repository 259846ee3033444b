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

#ifndef W2N_CORPUS_HPP_
#define W2N_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "w2n/vad.hpp"

namespace w2n {

enum class Site { kUS, kSG };
enum class Partition { kTrain, kTest };

std::string to_string(Site s);
Site parse_site(const std::string& s);
std::string to_string(Partition p);
Partition parse_partition(const std::string& s);

struct UtteranceRecord {
  std::string speaker_id;
  std::string utterance_id;
  SpeechStyle style = SpeechStyle::kNormal;
  Site site = Site::kUS;
  std::filesystem::path audio_path;
  double duration_s = 0.0;

  bool operator==(const UtteranceRecord&) const = default;
};

struct UtterancePair {
  std::string speaker_id;
  std::string utterance_id;
  UtteranceRecord whisper;
  UtteranceRecord normal;

  bool operator==(const UtterancePair&) const = default;
};

struct IngestError {
  std::filesystem::path path;
  std::string message;

  bool operator==(const IngestError&) const = default;
};

struct CorpusManifest {
  std::vector<UtteranceRecord> records;
  std::vector<UtterancePair> pairs;
  std::map<std::string, Partition> split;
  // Not persisted in the manifest file; written as plain-text reports.
  std::vector<IngestError> errors;
  std::vector<UtteranceRecord> remainder;

  std::vector<std::string> speakers() const;
  std::optional<Partition> partition_of(const std::string& utterance_id) const;

  // One JSON object per line: records, then pairs, then split entries.
  std::string to_jsonl() const;
  static CorpusManifest from_jsonl(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static CorpusManifest load(const std::filesystem::path& path);

  std::string ingestion_report() const;
  std::string remainder_report() const;
};

// Maps file names to (speaker, utterance, style). Group indices refer to
// filename_regex; matching is case-insensitive on the file name only.
struct CorpusConfig {
  std::string filename_regex = R"(^s(\d+)u(\d+)([nw])\.wav$)";
  int speaker_group = 1;
  int utterance_group = 2;
  int style_group = 3;
  std::string whisper_token = "w";
  std::string normal_token = "n";
  // Fraction of utterance ids assigned to test when no published partition
  // (a train/test directory component) is present.
  double test_fraction = 725.0 / (10934.0 + 725.0);
  std::uint64_t split_seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const CorpusConfig& c);
void from_json(const nlohmann::json& j, CorpusConfig& c);

// Throws LoadError when root is missing. Unreadable or unrecognized files
// become entries in manifest.errors.
CorpusManifest ingest(const std::filesystem::path& root,
                      std::optional<Site> site_filter = std::nullopt,
                      const CorpusConfig& cfg = {});

CorpusManifest pair_utterances(const CorpusManifest& manifest);

// Throws NotFoundError for an unknown speaker.
CorpusManifest speaker_view(const CorpusManifest& manifest,
                            const std::string& speaker_id);

}  // namespace w2n

#endif  // W2N_CORPUS_HPP_
