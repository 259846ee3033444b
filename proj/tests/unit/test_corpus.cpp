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

#include <doctest.h>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "w2n/corpus.hpp"
#include "w2n/errors.hpp"

using namespace w2n;
namespace fs = std::filesystem;

namespace {

void put_wav(const fs::path& p, double seconds = 0.05) {
  fs::create_directories(p.parent_path());
  write_wav(p, testing::sine(200.0, seconds));
}

// speakers x {n, w} x sentences under root/US/<partition?>/
void build_corpus(const fs::path& root, int speakers, int sentences, bool partitioned = false) {
  for (int s = 1; s <= speakers; ++s) {
    for (int u = 1; u <= sentences; ++u) {
      fs::path dir = root / "US";
      if (partitioned) dir /= (u <= sentences - 1 ? "train" : "test");
      char name[32];
      for (char style : {'n', 'w'}) {
        std::snprintf(name, sizeof(name), "s%03du%03d%c.wav", s, u, style);
        put_wav(dir / name);
      }
    }
  }
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("ingest pairs every whispered file with its normal partner") {
    testing::TempDir dir;
    build_corpus(dir.path(), 3, 5);
    const CorpusManifest m = ingest(dir.path());
    CHECK(m.records.size() == 30);
    CHECK(m.pairs.size() == 15);
    CHECK(m.remainder.empty());
    CHECK(m.errors.empty());
    CHECK(m.speakers() == std::vector<std::string>{"001", "002", "003"});
    for (const auto& p : m.pairs) {
      CHECK(p.whisper.style == SpeechStyle::kWhisper);
      CHECK(p.normal.style == SpeechStyle::kNormal);
      CHECK(p.whisper.speaker_id == p.normal.speaker_id);
      CHECK(p.whisper.utterance_id == p.normal.utterance_id);
      CHECK(fs::exists(p.whisper.audio_path));
      CHECK(p.whisper.duration_s > 0.0);
    }
  }

  TEST_CASE("empty directory yields an empty manifest") {
    testing::TempDir dir;
    const CorpusManifest m = ingest(dir.path());
    CHECK(m.records.empty());
    CHECK(m.pairs.empty());
    CHECK_THROWS_AS(ingest(dir.path() / "absent"), LoadError);
  }

  TEST_CASE("unpaired and duplicate files go to the remainder") {
    testing::TempDir dir;
    build_corpus(dir.path(), 1, 2);
    put_wav(dir.path() / "US" / "s001u009w.wav");
    put_wav(dir.path() / "US" / "extra" / "S001U001N.WAV");
    const CorpusManifest m = ingest(dir.path());
    CHECK(m.pairs.size() == 2);
    REQUIRE(m.remainder.size() == 2);
    std::set<std::string> ids;
    for (const auto& r : m.remainder) ids.insert(r.utterance_id);
    CHECK(ids == std::set<std::string>{"001", "009"});
    CHECK(m.remainder_report().find("009") != std::string::npos);
  }

  TEST_CASE("pairing is idempotent") {
    testing::TempDir dir;
    build_corpus(dir.path(), 2, 3);
    put_wav(dir.path() / "US" / "s002u007n.wav");
    const CorpusManifest m = ingest(dir.path());
    const CorpusManifest again = pair_utterances(m);
    CHECK(again.pairs == m.pairs);
    CHECK(again.remainder == m.remainder);
    CHECK(pair_utterances(again).pairs == m.pairs);
  }

  TEST_CASE("hashed split is deterministic and partitions sentences") {
    testing::TempDir dir;
    build_corpus(dir.path(), 2, 60);
    CorpusConfig cfg;
    cfg.test_fraction = 0.3;
    const CorpusManifest a = ingest(dir.path(), std::nullopt, cfg);
    const CorpusManifest b = ingest(dir.path(), std::nullopt, cfg);
    CHECK(a.split == b.split);
    std::size_t tests = 0;
    for (const auto& [utt, part] : a.split) tests += part == Partition::kTest;
    CHECK(tests > 0);
    CHECK(tests < a.split.size());
    for (const auto& p : a.pairs) CHECK(a.partition_of(p.utterance_id).has_value());
    cfg.split_seed = 99;
    CHECK(ingest(dir.path(), std::nullopt, cfg).split != a.split);
  }

  TEST_CASE("published partitions are honored and conflicts reported") {
    testing::TempDir dir;
    build_corpus(dir.path(), 1, 4, true);
    CorpusManifest m = ingest(dir.path());
    CHECK(m.partition_of("004") == Partition::kTest);
    CHECK(m.partition_of("001") == Partition::kTrain);
    put_wav(dir.path() / "US" / "test" / "s002u001n.wav");
    m = ingest(dir.path());
    REQUIRE_FALSE(m.errors.empty());
    for (const auto& e : m.errors) CHECK(e.message.find("both") != std::string::npos);
    CHECK(m.records.size() + m.errors.size() == 9);
  }

  TEST_CASE("site filter excludes the other site") {
    testing::TempDir dir;
    build_corpus(dir.path(), 1, 2);
    put_wav(dir.path() / "SG" / "s101u001n.wav");
    put_wav(dir.path() / "SG" / "s101u001w.wav");
    CHECK(ingest(dir.path(), Site::kUS).records.size() == 4);
    CHECK(ingest(dir.path(), Site::kSG).records.size() == 2);
    CHECK(ingest(dir.path()).records.size() == 6);
    for (const auto& r : ingest(dir.path(), Site::kUS).records) CHECK(r.site == Site::kUS);
  }

  TEST_CASE("unreadable files are reported, not dropped silently") {
    testing::TempDir dir;
    build_corpus(dir.path(), 1, 1);
    std::ofstream(dir.path() / "US" / "s001u002n.wav") << "not a wav";
    put_wav(dir.path() / "US" / "s001u002w.wav");
    put_wav(dir.path() / "US" / "s001u003x.wav");
    put_wav(dir.path() / "US" / "notes.wav");
    {
      Waveform empty;
      empty.sample_rate = 22050;
      write_wav(dir.path() / "US" / "s001u004n.wav", empty);
    }
    const CorpusManifest m = ingest(dir.path());
    CHECK(m.errors.size() == 4);
    CHECK(m.pairs.size() == 1);
    const std::string report = m.ingestion_report();
    CHECK(report.find("s001u002n.wav") != std::string::npos);
    CHECK(report.find("notes.wav") != std::string::npos);
  }

  TEST_CASE("manifest round trips through jsonl") {
    testing::TempDir dir;
    build_corpus(dir.path(), 2, 3);
    put_wav(dir.path() / "US" / "s001u008w.wav");
    const CorpusManifest m = ingest(dir.path());
    m.save(dir.path() / "manifest.jsonl");
    const CorpusManifest back = CorpusManifest::load(dir.path() / "manifest.jsonl");
    CHECK(back.records == m.records);
    CHECK(back.pairs == m.pairs);
    CHECK(back.split == m.split);
  }

  TEST_CASE("speaker view") {
    testing::TempDir dir;
    build_corpus(dir.path(), 3, 2);
    const CorpusManifest m = ingest(dir.path());
    const CorpusManifest v = speaker_view(m, "002");
    CHECK(v.pairs.size() == 2);
    for (const auto& p : v.pairs) CHECK(p.speaker_id == "002");
    CHECK_THROWS_AS(speaker_view(m, "404"), NotFoundError);
  }

  TEST_CASE("corpus config validation") {
    CorpusConfig c;
    c.test_fraction = 1.5;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = CorpusConfig{};
    c.filename_regex = "(";
    CHECK_THROWS(c.validate());
  }
}
