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
#include <sstream>

#include "helpers.hpp"
#include "w2n/corpus.hpp"
#include "w2n/wav.hpp"

using namespace w2n;
namespace fs = std::filesystem;

namespace {

const std::string kCli = W2N_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void build_speaker(const fs::path& root, int sentences) {
  fs::create_directories(root / "US");
  for (int u = 1; u <= sentences; ++u) {
    char name[32];
    std::snprintf(name, sizeof(name), "s001u%03dn.wav", u);
    write_wav(root / "US" / name, testing::synthetic_vowel(0.6, 120.0 + 5 * u, false, u));
    std::snprintf(name, sizeof(name), "s001u%03dw.wav", u);
    write_wav(root / "US" / name, testing::synthetic_vowel(0.6, 120.0, true, 100 + u));
  }
}

const std::string kTiny =
    " --no-vad --window 16 --mask 0.25 --epochs 1"
    " --set train.image_mode=false --set train.generator.channels=4"
    " --set train.generator.residual_blocks=1 --set train.discriminator.channels=2"
    " --set vocoder.griffin_lim_iterations=2";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with status 2") {
    testing::TempDir dir;
    CHECK(testing::run_command(kCli + " frobnicate", dir / "log") == 2);
    CHECK(testing::run_command(kCli + " train --speaker 1", dir / "log") == 2);
  }

  TEST_CASE("convert with a missing checkpoint leaves no outputs") {
    testing::TempDir dir;
    const fs::path out = dir / "run";
    const int rc = testing::run_command(
        kCli + " convert --checkpoint " + (dir / "missing.ckpt").string() + " --out " + out.string() +
            " --input " + dir.path().string(),
        dir / "log");
    CHECK(rc != 0);
    CHECK_FALSE(fs::exists(out));
    CHECK(slurp(dir / "log").find("missing.ckpt") != std::string::npos);
  }

  TEST_CASE("ingest writes a manifest and reports") {
    testing::TempDir dir;
    build_speaker(dir / "corpus", 2);
    std::ofstream(dir / "corpus" / "US" / "junk.wav") << "x";
    const int rc = testing::run_command(
        kCli + " ingest --root " + (dir / "corpus").string() + " --out " + (dir / "out").string(),
        dir / "log");
    REQUIRE(rc == 0);
    const auto m = CorpusManifest::load(dir / "out" / "manifest.jsonl");
    CHECK(m.pairs.size() == 2);
    CHECK(slurp(dir / "out" / "ingestion_report.txt").find("junk.wav") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "resolved_config.json"));
    CHECK(fs::exists(dir / "out" / "ingest.log"));
  }

  TEST_CASE("ingest, train, convert and evaluate end to end") {
    testing::TempDir dir;
    build_speaker(dir / "corpus", 3);
    const std::string base = dir.path().string();
    REQUIRE(testing::run_command(kCli + " ingest --root " + base + "/corpus --out " + base + "/ing",
                                 dir / "log") == 0);
    const std::string manifest = base + "/ing/manifest.jsonl";

    REQUIRE(testing::run_command(kCli + " preprocess --manifest " + manifest + " --out " + base +
                                     "/pre",
                                 dir / "log") == 0);
    CHECK_FALSE(fs::is_empty(dir / "pre" / "mels"));

    const int train_rc = testing::run_command(kCli + " train --manifest " + manifest +
                                                  " --speaker 001 --max-iterations 2 --out " +
                                                  base + "/train" + kTiny,
                                              dir / "log");
    INFO(slurp(dir / "log"));
    REQUIRE(train_rc == 0);
    CHECK(fs::exists(dir / "train" / "final.ckpt"));
    CHECK(fs::exists(dir / "train" / "losses.csv"));

    const int conv_rc = testing::run_command(
        kCli + " convert --checkpoint " + base + "/train/final.ckpt --manifest " + manifest +
            " --partition train --out " + base + "/conv" + kTiny,
        dir / "log");
    INFO(slurp(dir / "log"));
    REQUIRE(conv_rc == 0);
    CHECK(fs::exists(dir / "conv" / "converted" / "conversions.jsonl"));
    CHECK_FALSE(fs::exists(dir / "conv" / "converted.partial"));
    CHECK(fs::exists(dir / "conv" / "run.json"));

    const int eval_rc = testing::run_command(
        "env -u W2N_PESQ_SCORER " + kCli + " evaluate --run " + base + "/conv --out " + base + "/eval",
        dir / "log");
    INFO(slurp(dir / "log"));
    REQUIRE(eval_rc == 0);
    const std::string table = slurp(dir / "eval" / "results.txt");
    CHECK(table.find("unavailable") != std::string::npos);
    CHECK(table.find("25") != std::string::npos);
    CHECK(fs::exists(dir / "eval" / "quality_1.json"));
  }
}
