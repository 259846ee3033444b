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

#include "w2n/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "w2n/errors.hpp"
#include "w2n/wav.hpp"

namespace w2n {

namespace {

namespace fs = std::filesystem;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::uint64_t fnv1a(std::uint64_t seed, const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
  for (unsigned char c : s) mix(c);
  return h;
}

double unit_hash(std::uint64_t seed, const std::string& s) {
  // splitmix64 finalizer; raw FNV-1a high bits barely move for short ids.
  std::uint64_t z = fnv1a(seed, s) + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

auto record_key(const UtteranceRecord& r) {
  return std::make_tuple(r.speaker_id, r.utterance_id, r.style, r.audio_path.string());
}

void sort_records(std::vector<UtteranceRecord>& v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return record_key(a) < record_key(b);
  });
}

nlohmann::json record_json(const UtteranceRecord& r) {
  return nlohmann::json{{"speaker_id", r.speaker_id},
                        {"utterance_id", r.utterance_id},
                        {"style", to_string(r.style)},
                        {"site", to_string(r.site)},
                        {"audio_path", r.audio_path.string()},
                        {"duration_s", r.duration_s}};
}

UtteranceRecord record_from_json(const nlohmann::json& j) {
  UtteranceRecord r;
  r.speaker_id = j.at("speaker_id").get<std::string>();
  r.utterance_id = j.at("utterance_id").get<std::string>();
  r.style = parse_speech_style(j.at("style").get<std::string>());
  r.site = parse_site(j.at("site").get<std::string>());
  r.audio_path = j.at("audio_path").get<std::string>();
  r.duration_s = j.at("duration_s").get<double>();
  return r;
}

}  // namespace

std::string to_string(Site s) { return s == Site::kUS ? "US" : "SG"; }

Site parse_site(const std::string& s) {
  const std::string l = lower(s);
  if (l == "us") return Site::kUS;
  if (l == "sg") return Site::kSG;
  throw ArgumentError("unknown site '" + s + "'");
}

std::string to_string(Partition p) { return p == Partition::kTrain ? "train" : "test"; }

Partition parse_partition(const std::string& s) {
  const std::string l = lower(s);
  if (l == "train") return Partition::kTrain;
  if (l == "test") return Partition::kTest;
  throw ArgumentError("unknown partition '" + s + "'");
}

void CorpusConfig::validate() const {
  try {
    std::regex re(filename_regex, std::regex::ECMAScript | std::regex::icase);
    const int groups = static_cast<int>(re.mark_count());
    for (int g : {speaker_group, utterance_group, style_group}) {
      if (g < 1 || g > groups) {
        throw ArgumentError("corpus regex group index " + std::to_string(g) +
                            " out of range (regex has " + std::to_string(groups) + ")");
      }
    }
  } catch (const std::regex_error& e) {
    throw ArgumentError(std::string("invalid corpus filename regex: ") + e.what());
  }
  if (lower(whisper_token) == lower(normal_token)) {
    throw ArgumentError("whisper and normal style tokens must differ");
  }
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw ArgumentError("test_fraction must be in [0, 1]");
  }
}

void to_json(nlohmann::json& j, const CorpusConfig& c) {
  j = nlohmann::json{{"filename_regex", c.filename_regex},
                     {"speaker_group", c.speaker_group},
                     {"utterance_group", c.utterance_group},
                     {"style_group", c.style_group},
                     {"whisper_token", c.whisper_token},
                     {"normal_token", c.normal_token},
                     {"test_fraction", c.test_fraction},
                     {"split_seed", c.split_seed}};
}

void from_json(const nlohmann::json& j, CorpusConfig& c) {
  CorpusConfig d;
  c.filename_regex = j.value("filename_regex", d.filename_regex);
  c.speaker_group = j.value("speaker_group", d.speaker_group);
  c.utterance_group = j.value("utterance_group", d.utterance_group);
  c.style_group = j.value("style_group", d.style_group);
  c.whisper_token = j.value("whisper_token", d.whisper_token);
  c.normal_token = j.value("normal_token", d.normal_token);
  c.test_fraction = j.value("test_fraction", d.test_fraction);
  c.split_seed = j.value("split_seed", d.split_seed);
}

std::vector<std::string> CorpusManifest::speakers() const {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(r.speaker_id);
  return {s.begin(), s.end()};
}

std::optional<Partition> CorpusManifest::partition_of(const std::string& utterance_id) const {
  const auto it = split.find(utterance_id);
  if (it == split.end()) return std::nullopt;
  return it->second;
}

std::string CorpusManifest::to_jsonl() const {
  std::ostringstream os;
  for (const auto& r : records) {
    auto j = record_json(r);
    j["kind"] = "record";
    os << j.dump() << '\n';
  }
  for (const auto& p : pairs) {
    os << nlohmann::json{{"kind", "pair"},
                         {"speaker_id", p.speaker_id},
                         {"utterance_id", p.utterance_id},
                         {"whisper", p.whisper.audio_path.string()},
                         {"normal", p.normal.audio_path.string()}}
              .dump()
       << '\n';
  }
  for (const auto& [utt, part] : split) {
    os << nlohmann::json{{"kind", "split"}, {"utterance_id", utt}, {"partition", to_string(part)}}
              .dump()
       << '\n';
  }
  return os.str();
}

CorpusManifest CorpusManifest::from_jsonl(const std::string& text) {
  CorpusManifest m;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, const UtteranceRecord*> by_path;
  std::vector<nlohmann::json> pair_lines;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "record") {
        m.records.push_back(record_from_json(j));
      } else if (kind == "pair") {
        pair_lines.push_back(j);
      } else if (kind == "split") {
        m.split[j.at("utterance_id").get<std::string>()] =
            parse_partition(j.at("partition").get<std::string>());
      } else {
        throw ArgumentError("unknown manifest line kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("manifest line " + std::to_string(lineno) + ": " + e.what());
  }
  for (const auto& r : m.records) by_path[r.audio_path.string()] = &r;
  for (const auto& j : pair_lines) {
    const auto w = by_path.find(j.at("whisper").get<std::string>());
    const auto n = by_path.find(j.at("normal").get<std::string>());
    if (w == by_path.end() || n == by_path.end()) {
      throw ArgumentError("manifest pair references a record that is not listed");
    }
    m.pairs.push_back({j.at("speaker_id").get<std::string>(),
                       j.at("utterance_id").get<std::string>(), *w->second, *n->second});
  }
  return m;
}

void CorpusManifest::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_jsonl();
}

CorpusManifest CorpusManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open manifest");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

std::string CorpusManifest::ingestion_report() const {
  std::ostringstream os;
  os << "records: " << records.size() << "\n"
     << "pairs: " << pairs.size() << "\n"
     << "errors: " << errors.size() << "\n";
  for (const auto& e : errors) os << e.path.string() << ": " << e.message << '\n';
  return os.str();
}

std::string CorpusManifest::remainder_report() const {
  std::ostringstream os;
  os << "unpaired: " << remainder.size() << "\n";
  for (const auto& r : remainder) {
    os << r.speaker_id << ' ' << r.utterance_id << ' ' << to_string(r.style) << ' '
       << r.audio_path.string() << '\n';
  }
  return os.str();
}

CorpusManifest ingest(const fs::path& root, std::optional<Site> site_filter,
                      const CorpusConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(root)) throw LoadError(root.string(), "corpus root does not exist");
  const std::regex re(cfg.filename_regex, std::regex::ECMAScript | std::regex::icase);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && lower(entry.path().extension().string()) == ".wav") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  CorpusManifest m;
  std::map<std::string, Partition> published;
  std::set<std::string> hashed;
  for (const auto& file : files) {
    std::optional<Site> site;
    std::optional<Partition> part;
    for (const auto& comp : fs::relative(file, root).parent_path()) {
      const std::string c = lower(comp.string());
      if (c == "us" || c == "sg") site = parse_site(c);
      if (c == "train" || c == "test") part = parse_partition(c);
    }
    const Site rec_site = site.value_or(Site::kUS);
    if (site_filter && rec_site != *site_filter) continue;

    const std::string name = file.filename().string();
    std::smatch match;
    if (!std::regex_match(name, match, re)) {
      m.errors.push_back({file, "file name does not match the corpus pattern"});
      continue;
    }
    UtteranceRecord r;
    r.speaker_id = match[cfg.speaker_group].str();
    r.utterance_id = match[cfg.utterance_group].str();
    const std::string tok = lower(match[cfg.style_group].str());
    if (tok == lower(cfg.whisper_token)) {
      r.style = SpeechStyle::kWhisper;
    } else if (tok == lower(cfg.normal_token)) {
      r.style = SpeechStyle::kNormal;
    } else {
      m.errors.push_back({file, "unknown style token '" + tok + "'"});
      continue;
    }
    r.site = rec_site;
    r.audio_path = file;
    try {
      r.duration_s = probe_wav(file).duration_s();
    } catch (const std::exception& e) {
      m.errors.push_back({file, e.what()});
      continue;
    }
    if (!(r.duration_s > 0.0)) {
      m.errors.push_back({file, "zero-length audio"});
      continue;
    }
    if (part) {
      const auto [it, inserted] = published.emplace(r.utterance_id, *part);
      if (!inserted && it->second != *part) {
        m.errors.push_back({file, "utterance '" + r.utterance_id +
                                      "' listed in both train and test partitions"});
        continue;
      }
    } else {
      hashed.insert(r.utterance_id);
    }
    m.records.push_back(std::move(r));
  }
  sort_records(m.records);
  m.split = published;
  for (const auto& utt : hashed) {
    if (m.split.count(utt) != 0) continue;
    m.split[utt] = unit_hash(cfg.split_seed, utt) < cfg.test_fraction ? Partition::kTest
                                                                      : Partition::kTrain;
  }
  CorpusManifest paired = pair_utterances(m);
  paired.errors = std::move(m.errors);
  return paired;
}

CorpusManifest pair_utterances(const CorpusManifest& manifest) {
  CorpusManifest out;
  out.records = manifest.records;
  out.split = manifest.split;
  out.errors = manifest.errors;
  sort_records(out.records);
  std::map<std::pair<std::string, std::string>,
           std::pair<const UtteranceRecord*, const UtteranceRecord*>>
      slots;
  for (const auto& r : out.records) {
    auto& slot = slots[{r.speaker_id, r.utterance_id}];
    auto& dst = r.style == SpeechStyle::kWhisper ? slot.first : slot.second;
    if (dst == nullptr) {
      dst = &r;
    } else {
      out.remainder.push_back(r);
    }
  }
  for (const auto& [key, slot] : slots) {
    if (slot.first != nullptr && slot.second != nullptr) {
      out.pairs.push_back({key.first, key.second, *slot.first, *slot.second});
    } else {
      out.remainder.push_back(slot.first != nullptr ? *slot.first : *slot.second);
    }
  }
  sort_records(out.remainder);
  return out;
}

CorpusManifest speaker_view(const CorpusManifest& manifest, const std::string& speaker_id) {
  CorpusManifest out;
  for (const auto& r : manifest.records) {
    if (r.speaker_id == speaker_id) out.records.push_back(r);
  }
  if (out.records.empty()) {
    throw NotFoundError("speaker '" + speaker_id + "' not found in manifest");
  }
  for (const auto& p : manifest.pairs) {
    if (p.speaker_id == speaker_id) out.pairs.push_back(p);
  }
  for (const auto& r : manifest.remainder) {
    if (r.speaker_id == speaker_id) out.remainder.push_back(r);
  }
  for (const auto& r : out.records) {
    if (const auto p = manifest.partition_of(r.utterance_id)) out.split[r.utterance_id] = *p;
  }
  return out;
}

}  // namespace w2n
