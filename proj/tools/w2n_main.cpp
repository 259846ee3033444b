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

#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "w2n/config.hpp"
#include "w2n/errors.hpp"
#include "w2n/mos.hpp"
#include "w2n/pipeline.hpp"
#include "w2n/tensor_file.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> window;
  std::optional<double> mask;
  std::optional<int> epochs;
  int vad = -1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Pipeline config file (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.sets, "Override a config field: dotted.path=value");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--window", o.window, "Training window length in frames");
  cmd->add_option("--mask", o.mask, "Masked fraction of the window");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
  cmd->add_flag_callback("--vad", [&o] { o.vad = 1; }, "Enable VAD trimming");
  cmd->add_flag_callback("--no-vad", [&o] { o.vad = 0; }, "Disable VAD trimming");
}

w2n::PipelineConfig resolve(const CommonOptions& o) {
  std::vector<std::pair<std::string, std::string>> ov;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw w2n::ArgumentError("--set expects path=value, got '" + s + "'");
    }
    ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) ov.emplace_back("seed", std::to_string(*o.seed));
  if (o.window) ov.emplace_back("mask.window_frames", std::to_string(*o.window));
  if (o.mask) ov.emplace_back("mask.mask_fraction", json(*o.mask).dump());
  if (o.epochs) ov.emplace_back("train.epochs", std::to_string(*o.epochs));
  if (o.vad >= 0) ov.emplace_back("train.vad_enabled", o.vad ? "true" : "false");
  if (!o.out.empty()) ov.emplace_back("output_dir", json(o.out).dump());
  return w2n::resolve_config(o.config.empty() ? std::nullopt
                                              : std::optional<fs::path>(o.config),
                             ov);
}

// Creates the output directory, persists the resolved config and routes
// logging to <out>/<command>.log as well as stderr.
fs::path start_run(const std::string& command, const w2n::PipelineConfig& cfg) {
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  std::ofstream(out / "resolved_config.json", std::ios::trunc) << w2n::dump_config(cfg);
  auto console = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>((out / (command + ".log")).string(),
                                                                   true);
  auto logger = std::make_shared<spdlog::logger>("w2n", spdlog::sinks_init_list{console, file});
  logger->flush_on(spdlog::level::info);
  spdlog::set_default_logger(logger);
  spdlog::info("{} -> {}", command, out.string());
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw w2n::Error("cannot write " + p.string());
  out << text;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw w2n::LoadError(p.string(), "cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw w2n::LoadError(p.string(), e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw w2n::LoadError(p.string(), "cannot open");
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::vector<fs::path> collect_wavs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".wav") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(in)) {
      files.emplace_back(in);
    } else {
      throw w2n::LoadError(in, "input does not exist");
    }
  }
  return files;
}

// ---- ingest ----

struct IngestArgs {
  std::string root;
  std::string site;
};

int run_ingest(const CommonOptions& co, const IngestArgs& a) {
  auto cfg = resolve(co);
  if (!a.root.empty()) cfg.corpus_root = a.root;
  if (!a.site.empty()) cfg.site_filter = a.site == "all" ? "" : a.site;
  cfg.validate();
  if (cfg.corpus_root.empty()) throw w2n::ArgumentError("no corpus root (--root or corpus_root)");
  const fs::path out = start_run("ingest", cfg);
  std::optional<w2n::Site> filter;
  if (!cfg.site_filter.empty()) filter = w2n::parse_site(cfg.site_filter);
  const auto m = w2n::ingest(cfg.corpus_root, filter, cfg.corpus);
  m.save(out / "manifest.jsonl");
  write_text(out / "ingestion_report.txt", m.ingestion_report());
  write_text(out / "remainder_report.txt", m.remainder_report());
  spdlog::info("{} records, {} pairs, {} errors, {} unpaired", m.records.size(), m.pairs.size(),
               m.errors.size(), m.remainder.size());
  return 0;
}

// ---- preprocess ----

struct PreprocessArgs {
  std::string manifest;
  std::string speaker;
  std::vector<std::string> inputs;
  std::string style = "whisper";
};

void preprocess_one(const fs::path& src, w2n::SpeechStyle style, const std::string& group,
                    const w2n::PipelineConfig& cfg, const fs::path& out) {
  const auto p = w2n::prepare_audio(src, style, cfg.train.vad_enabled, cfg.vad);
  const std::string stem = src.stem().string();
  const fs::path sub = group.empty() ? fs::path() : fs::path(group);
  fs::create_directories(out / "trimmed" / sub);
  w2n::write_wav(out / "trimmed" / sub / (stem + ".wav"), p.waveform);
  if (p.labels) write_text(out / "labels" / sub / (stem + ".lab"), p.labels->to_string() + "\n");
  if (p.no_speech) spdlog::warn("{}: no speech detected, kept untrimmed", src.string());
  try {
    fs::create_directories(out / "mels" / sub);
    w2n::write_mel(out / "mels" / sub / (stem + ".w2nt"),
                   w2n::mel_spectrogram(p.waveform, cfg.analysis));
  } catch (const w2n::TooShortError& e) {
    spdlog::warn("{}: {}", src.string(), e.what());
  }
}

int run_preprocess(const CommonOptions& co, const PreprocessArgs& a) {
  const auto cfg = resolve(co);
  if (a.manifest.empty() == a.inputs.empty()) {
    throw w2n::ArgumentError("preprocess needs exactly one of --manifest or --input");
  }
  std::optional<w2n::CorpusManifest> manifest;
  std::vector<fs::path> files;
  if (!a.manifest.empty()) {
    manifest = w2n::CorpusManifest::load(a.manifest);
    if (!a.speaker.empty()) manifest = w2n::speaker_view(*manifest, a.speaker);
  } else {
    files = collect_wavs(a.inputs);
  }
  const fs::path out = start_run("preprocess", cfg);
  std::size_t n = 0;
  if (manifest) {
    for (const auto& r : manifest->records) {
      preprocess_one(r.audio_path, r.style, r.speaker_id, cfg, out);
      ++n;
    }
  } else {
    const auto style = w2n::parse_speech_style(a.style);
    for (const auto& f : files) {
      preprocess_one(f, style, "", cfg, out);
      ++n;
    }
  }
  spdlog::info("preprocessed {} files (vad {})", n, cfg.train.vad_enabled ? "on" : "off");
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string manifest;
  std::string speaker;
  int max_iterations = -1;
};

int run_train(const CommonOptions& co, const TrainArgs& a) {
  auto cfg = resolve(co);
  if (a.max_iterations >= 0) cfg.train.max_iterations = a.max_iterations;
  if (a.speaker.empty()) throw w2n::ArgumentError("train requires --speaker");
  const auto manifest = w2n::CorpusManifest::load(a.manifest);
  const auto data = w2n::load_speaker_data(manifest, a.speaker, w2n::Partition::kTrain, cfg);
  const fs::path out = start_run("train", cfg);
  spdlog::info("speaker {}: {} whisper / {} normal spectrograms; window {} mask {} vad {}",
               a.speaker, data.whisper.size(), data.normal.size(), cfg.mask.window_frames,
               cfg.mask.mask_fraction, cfg.train.vad_enabled);
  w2n::TrainOptions opt;
  opt.output_dir = out;
  opt.on_iteration = [](const w2n::LossEntry& e) {
    if (e.iteration % 50 == 0) {
      spdlog::info("epoch {} iter {}: G {:.4f} D {:.4f} cyc {:.4f} id {:.4f} eq1 {:.4f}", e.epoch,
                   e.iteration, e.total_g, e.total_d, e.cycle, e.identity, e.eq1_g_loss);
    }
  };
  const auto result = w2n::train(data, cfg.train, opt);
  spdlog::info("finished: {} iterations, {} checkpoints", result.report.entries.size(),
               result.checkpoints.size());
  return 0;
}

// ---- convert ----

struct ConvertArgs {
  std::string checkpoint;
  std::vector<std::string> inputs;
  std::string manifest;
  std::string speaker;
  std::string partition = "test";
  std::string direction = "whisper2normal";
};

struct ConversionJob {
  std::string utterance_id;
  fs::path source;
  std::optional<fs::path> reference;
};

int run_convert(const CommonOptions& co, const ConvertArgs& a) {
  auto cfg = resolve(co);
  // Everything that can fail on bad inputs happens before any output exists.
  if (!fs::is_regular_file(a.checkpoint)) {
    throw w2n::LoadError(a.checkpoint, "checkpoint not found");
  }
  const auto ckpt = w2n::Checkpoint::load(a.checkpoint);
  const auto direction = w2n::parse_direction(a.direction);
  const auto style = direction == w2n::Direction::kWhisperToNormal ? w2n::SpeechStyle::kWhisper
                                                                   : w2n::SpeechStyle::kNormal;
  std::vector<ConversionJob> jobs;
  if (!a.manifest.empty()) {
    const auto m = w2n::speaker_view(w2n::CorpusManifest::load(a.manifest),
                                     a.speaker.empty() ? ckpt.speaker_id : a.speaker);
    const auto part = w2n::parse_partition(a.partition);
    for (const auto& p : m.pairs) {
      if (m.partition_of(p.utterance_id).value_or(w2n::Partition::kTrain) != part) continue;
      const bool fwd = direction == w2n::Direction::kWhisperToNormal;
      jobs.push_back({p.speaker_id + "_" + p.utterance_id,
                      (fwd ? p.whisper : p.normal).audio_path,
                      (fwd ? p.normal : p.whisper).audio_path});
    }
  } else {
    for (const auto& f : collect_wavs(a.inputs)) jobs.push_back({f.stem().string(), f, {}});
  }
  if (jobs.empty()) throw w2n::ArgumentError("convert: nothing to convert");
  if (!a.speaker.empty() && a.speaker != ckpt.speaker_id) {
    throw w2n::ContractError("checkpoint is for speaker '" + ckpt.speaker_id + "', requested '" +
                             a.speaker + "'");
  }
  cfg.analysis = ckpt.analysis;
  cfg.sync();
  const auto vocoder = w2n::make_vocoder(cfg.vocoder, ckpt.analysis);
  const auto nets = ckpt.restore();

  const fs::path out = start_run("convert", cfg);
  const fs::path staging = out / "converted.partial";
  const fs::path final_dir = out / "converted";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    std::string listing;
    for (const auto& job : jobs) {
      const auto prepared = w2n::prepare_audio(job.source, style, ckpt.config.vad_enabled, cfg.vad);
      const auto mel = w2n::mel_spectrogram(prepared.waveform, ckpt.analysis);
      const auto converted = w2n::convert(mel, ckpt, nets, direction, a.speaker);
      const fs::path wav = staging / (job.utterance_id + ".wav");
      w2n::write_wav(wav, w2n::vocode(converted, vocoder));
      w2n::write_mel(staging / (job.utterance_id + ".w2nt"), converted);
      json e{{"utterance_id", job.utterance_id},
             {"source", job.source.string()},
             {"output", (final_dir / wav.filename()).string()}};
      e["reference"] = job.reference ? json(job.reference->string()) : json(nullptr);
      listing += e.dump() + "\n";
      spdlog::info("{}: {} frames", job.utterance_id, converted.frames());
    }
    write_text(staging / "conversions.jsonl", listing);
    fs::remove_all(final_dir);
    fs::rename(staging, final_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  const fs::path losses = fs::path(a.checkpoint).parent_path() / "losses.csv";
  json run{{"checkpoint", fs::absolute(a.checkpoint).string()},
           {"direction", w2n::to_string(direction)},
           {"descriptor",
            w2n::ConfigDescriptor{ckpt.config.mask.mask_fraction, ckpt.config.mask.window_frames,
                                  ckpt.config.vad_enabled}}};
  run["losses_csv"] = fs::exists(losses) ? json(fs::absolute(losses).string()) : json(nullptr);
  write_text(out / "run.json", run.dump(2) + "\n");
  spdlog::info("converted {} utterances", jobs.size());
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::vector<std::string> runs;
  std::vector<std::string> quality;
};

int run_evaluate(const CommonOptions& co, const EvaluateArgs& a) {
  const auto cfg = resolve(co);
  if (a.runs.empty() && a.quality.empty()) {
    throw w2n::ArgumentError("evaluate needs --run or --quality inputs");
  }
  for (const auto& r : a.runs) {
    if (!fs::exists(fs::path(r) / "run.json")) throw w2n::LoadError(r, "not a convert run");
  }
  for (const auto& q : a.quality) {
    if (!fs::exists(q)) throw w2n::LoadError(q, "quality report not found");
  }
  const fs::path out = start_run("evaluate", cfg);
  std::vector<w2n::QualityReport> reports;
  std::vector<w2n::TrainingLog> logs;

  for (const auto& q : a.quality) {
    const json j = read_json(q);
    reports.push_back(j.get<w2n::QualityReport>());
    if (j.contains("losses_csv") && j.at("losses_csv").is_string()) {
      fs::path lp = j.at("losses_csv").get<std::string>();
      if (lp.is_relative()) lp = fs::path(q).parent_path() / lp;
      logs.push_back({reports.back().config, w2n::LossReport::load(lp)});
    }
  }

  auto scorer = w2n::PesqScorer::resolve(cfg.eval.pesq_scorer);
  std::optional<std::string> unavailable;
  if (!scorer) unavailable = std::string("no PESQ scorer configured (set ") + w2n::kPesqScorerEnv + ")";
  for (std::size_t k = 0; k < a.runs.size(); ++k) {
    const fs::path dir = a.runs[k];
    const json run = read_json(dir / "run.json");
    w2n::QualityReport report;
    report.config = run.at("descriptor").get<w2n::ConfigDescriptor>();
    for (const auto& e : read_jsonl(dir / "converted" / "conversions.jsonl")) {
      if (e.at("reference").is_null()) {
        spdlog::warn("{}: no reference, skipped", e.at("utterance_id").get<std::string>());
        continue;
      }
      const auto ref = w2n::load_audio(e.at("reference").get<std::string>(),
                                       cfg.analysis.sample_rate);
      const auto conv = w2n::load_audio(e.at("output").get<std::string>(),
                                        cfg.analysis.sample_rate);
      const auto id = e.at("utterance_id").get<std::string>();
      try {
        report.utterances.push_back(
            w2n::score_utterance(id, ref, conv, cfg.eval, cfg.vad, scorer));
      } catch (const w2n::UnavailableError& err) {
        spdlog::warn("PESQ unavailable: {}", err.what());
        unavailable = err.what();
        scorer.reset();
        report.utterances.push_back(
            w2n::score_utterance(id, ref, conv, cfg.eval, cfg.vad, std::nullopt));
      } catch (const w2n::Error& err) {
        spdlog::warn("{}: PESQ failed, left empty: {}", id, err.what());
        report.utterances.push_back(
            w2n::score_utterance(id, ref, conv, cfg.eval, cfg.vad, std::nullopt));
      }
    }
    report.pesq_unavailable = unavailable;
    write_text(out / ("quality_" + std::to_string(k + 1) + ".json"), json(report).dump(2) + "\n");
    if (run.contains("losses_csv") && run.at("losses_csv").is_string()) {
      logs.push_back({report.config, w2n::LossReport::load(run.at("losses_csv").get<std::string>())});
    }
    reports.push_back(std::move(report));
  }

  const auto table = w2n::aggregate(reports, logs);
  write_text(out / "results.txt", table.to_text());
  write_text(out / "results.csv", table.to_csv());
  std::cout << table.to_text();
  if (unavailable) spdlog::info("PESQ: unavailable ({})", *unavailable);
  return 0;
}

// ---- serve ----

struct ServeArgs {
  std::string clips;
  std::string store;
  std::string host;
  int port = -1;
  std::string token;
};

int run_serve(const CommonOptions& co, const ServeArgs& a) {
  auto cfg = resolve(co);
  if (!a.clips.empty()) cfg.serve.clips_dir = a.clips;
  if (!a.store.empty()) cfg.serve.store_dir = a.store;
  if (!a.host.empty()) cfg.serve.host = a.host;
  if (a.port >= 0) cfg.serve.port = a.port;
  if (!a.token.empty()) cfg.serve.operator_token = a.token;
  fs::path store_dir = cfg.serve.store_dir;
  if (store_dir.is_relative()) store_dir = fs::path(cfg.output_dir) / store_dir;
  std::vector<w2n::mos::Clip> pool;
  if (!fs::exists(store_dir / "clips.json")) {
    if (cfg.serve.clips_dir.empty()) throw w2n::ArgumentError("serve needs --clips for a new store");
    pool = w2n::mos::clip_pool_from_directory(cfg.serve.clips_dir, cfg.seed);
  }
  if (cfg.serve.operator_token.empty()) {
    std::random_device rd;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%08x%08x", rd(), rd());
    cfg.serve.operator_token = buf;
  }
  const fs::path out = start_run("serve", cfg);
  w2n::mos::StoreOptions sopt;
  sopt.clips_per_session = cfg.serve.clips_per_session;
  sopt.fixed_pool = cfg.serve.fixed_pool;
  sopt.seed = cfg.seed;
  w2n::mos::Store store(store_dir, std::move(pool), sopt);
  w2n::mos::Server server(store, {cfg.serve.host, cfg.serve.port, cfg.serve.operator_token});

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  const int port = server.bind();
  if (port < 0) throw w2n::Error("cannot bind " + cfg.serve.host + ":" + std::to_string(cfg.serve.port));
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("signal {}, stopping", sig);
    server.stop();
  });
  spdlog::info("operator token: {}", cfg.serve.operator_token);
  std::cout << "listening on http://" << cfg.serve.host << ":" << port << std::endl;
  server.listen_after_bind();
  store.snapshot();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"w2n: whisper-to-normal speech conversion toolkit"};
  app.require_subcommand(1);
  CommonOptions co;

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Build a corpus manifest");
  add_common(ingest, co);
  ingest->add_option("--root", ia.root, "Corpus root directory");
  ingest->add_option("--site", ia.site, "US, SG or all");

  PreprocessArgs pa;
  auto* pre = app.add_subcommand("preprocess", "VAD trimming, labels and mel features");
  add_common(pre, co);
  pre->add_option("--manifest", pa.manifest, "Manifest from ingest")->check(CLI::ExistingFile);
  pre->add_option("--speaker", pa.speaker, "Restrict to one speaker");
  pre->add_option("--input", pa.inputs, "WAV files or directories (batch mode)");
  pre->add_option("--style", pa.style, "Speech style for batch mode: whisper or normal");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train a speaker-dependent model");
  add_common(tr, co);
  tr->add_option("--manifest", ta.manifest, "Manifest from ingest")->required()->check(CLI::ExistingFile);
  tr->add_option("--speaker", ta.speaker, "Speaker id")->required();
  tr->add_option("--max-iterations", ta.max_iterations, "Stop after this many iterations");

  ConvertArgs ca;
  auto* cv = app.add_subcommand("convert", "Convert speech with a trained checkpoint");
  add_common(cv, co);
  cv->add_option("--checkpoint", ca.checkpoint, "Checkpoint file")->required();
  cv->add_option("--input", ca.inputs, "WAV files or directories");
  cv->add_option("--manifest", ca.manifest, "Convert a manifest partition instead");
  cv->add_option("--speaker", ca.speaker, "Expected speaker id");
  cv->add_option("--partition", ca.partition, "train or test (manifest mode)");
  cv->add_option("--direction", ca.direction, "whisper2normal or normal2whisper");

  EvaluateArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Score converted speech and build the results table");
  add_common(ev, co);
  ev->add_option("--run", ea.runs, "Output directory of a convert run");
  ev->add_option("--quality", ea.quality, "Quality report JSON");

  ServeArgs sa;
  auto* sv = app.add_subcommand("serve", "Host the MOS listening-test service");
  add_common(sv, co);
  sv->add_option("--clips", sa.clips, "Directory of clips to rate");
  sv->add_option("--store", sa.store, "Rating store directory");
  sv->add_option("--host", sa.host, "Bind address");
  sv->add_option("--port", sa.port, "Port (0 picks a free port)");
  sv->add_option("--token", sa.token, "Operator token for /results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) return run_ingest(co, ia);
    if (*pre) return run_preprocess(co, pa);
    if (*tr) return run_train(co, ta);
    if (*cv) {
      if (ca.inputs.empty() == ca.manifest.empty()) {
        throw w2n::ArgumentError("convert needs exactly one of --input or --manifest");
      }
      return run_convert(co, ca);
    }
    if (*ev) return run_evaluate(co, ea);
    if (*sv) return run_serve(co, sa);
  } catch (const w2n::ArgumentError& e) {
    std::cerr << "w2n: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "w2n: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
