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

#include "w2n/eval.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "w2n/errors.hpp"

namespace w2n {

namespace {

namespace fs = std::filesystem;

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("w2n_pesq_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string format_mask(double fraction) {
  const double pct = fraction * 100.0;
  if (std::abs(pct - std::round(pct)) < 1e-9) return std::to_string(std::lround(pct));
  return format_fixed(pct, 2);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::optional<PesqScorer> PesqScorer::resolve(const std::string& fallback) {
  const char* env = std::getenv(kPesqScorerEnv);
  std::string cmd = env != nullptr ? env : "";
  if (cmd.empty()) cmd = fallback;
  if (cmd.empty()) return std::nullopt;
  PesqScorer s;
  s.command = cmd;
  return s;
}

double pesq_score(const Waveform& reference, const Waveform& degraded,
                  const PesqScorer& scorer) {
  if (scorer.command.empty()) throw UnavailableError("no PESQ scorer configured");
  if (reference.samples.empty() || degraded.samples.empty()) {
    throw ArgumentError("pesq_score: empty waveform");
  }
  TempDir dir;
  const fs::path ref = dir.path() / "ref.wav";
  const fs::path deg = dir.path() / "deg.wav";
  write_wav(ref, resample(reference, scorer.sample_rate));
  write_wav(deg, resample(degraded, scorer.sample_rate));
  const std::string cmd = scorer.command + " " + shell_quote(ref.string()) + " " +
                          shell_quote(deg.string()) + " " +
                          std::to_string(scorer.sample_rate) + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw UnavailableError("cannot start PESQ scorer: " + scorer.command);
  std::string output;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) output += buf;
  const int status = ::pclose(pipe);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code == kScorerUnavailableStatus || code == 126 || code == 127) {
    throw UnavailableError("PESQ scorer unavailable: " + output);
  }
  if (code != 0) {
    throw Error("PESQ scorer failed (status " + std::to_string(code) + "): " + output);
  }
  std::istringstream lines(output);
  std::string line, last;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
  }
  double score = 0.0;
  try {
    std::size_t used = 0;
    score = std::stod(last, &used);
  } catch (const std::exception&) {
    throw Error("PESQ scorer printed no score: " + output);
  }
  if (!(score >= kPesqMin && score <= kPesqMax)) {
    throw ValidationError("PESQ score " + std::to_string(score) + " outside [" +
                          format_fixed(kPesqMin, 2) + ", " + format_fixed(kPesqMax, 2) + "]");
  }
  return score;
}

double mcd_constant() { return 10.0 * std::numbers::sqrt2 / std::numbers::ln10; }

Eigen::MatrixXd mel_cepstrum(const Eigen::MatrixXd& log_mel, int order) {
  const int n = static_cast<int>(log_mel.rows());
  if (order < 1 || order >= n) {
    throw ArgumentError("cepstral order must be in [1, " + std::to_string(n - 1) + "]");
  }
  Eigen::MatrixXd basis(order + 1, n);
  for (int k = 0; k <= order; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      basis(k, i) = scale * std::cos(std::numbers::pi * k * (i + 0.5) / n);
    }
  }
  return basis * log_mel;
}

double mcd(const MelSpectrogram& reference, const MelSpectrogram& converted, int order) {
  if (reference.config.hash() != converted.config.hash() ||
      reference.bins() != converted.bins()) {
    throw ContractError("mcd: analysis configs differ (" + reference.config.hash_hex() +
                        " vs " + converted.config.hash_hex() + ")");
  }
  const int frames = std::min(reference.frames(), converted.frames());
  if (frames < 1) throw ArgumentError("mcd: no frames to compare");
  const Eigen::MatrixXd a = mel_cepstrum(reference.values.leftCols(frames), order);
  const Eigen::MatrixXd b = mel_cepstrum(converted.values.leftCols(frames), order);
  const Eigen::MatrixXd diff = (a - b).bottomRows(order);
  return mcd_constant() * diff.colwise().norm().mean();
}

void to_json(nlohmann::json& j, const ConfigDescriptor& c) {
  j = nlohmann::json{{"mask_fraction", c.mask_fraction},
                     {"window_frames", c.window_frames},
                     {"vad_enabled", c.vad_enabled}};
}

void from_json(const nlohmann::json& j, ConfigDescriptor& c) {
  c.mask_fraction = j.at("mask_fraction").get<double>();
  c.window_frames = j.at("window_frames").get<int>();
  c.vad_enabled = j.at("vad_enabled").get<bool>();
}

void to_json(nlohmann::json& j, const QualityReport& r) {
  nlohmann::json utts = nlohmann::json::array();
  for (const auto& u : r.utterances) {
    nlohmann::json e{{"utterance_id", u.utterance_id}};
    e["pesq"] = u.pesq ? nlohmann::json(*u.pesq) : nlohmann::json(nullptr);
    e["mcd"] = u.mcd ? nlohmann::json(*u.mcd) : nlohmann::json(nullptr);
    utts.push_back(std::move(e));
  }
  j = nlohmann::json{{"config", r.config}, {"utterances", utts}};
  j["pesq_unavailable"] =
      r.pesq_unavailable ? nlohmann::json(*r.pesq_unavailable) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, QualityReport& r) {
  r.config = j.at("config").get<ConfigDescriptor>();
  r.utterances.clear();
  for (const auto& e : j.at("utterances")) {
    UtteranceScore u;
    u.utterance_id = e.at("utterance_id").get<std::string>();
    if (e.contains("pesq") && !e.at("pesq").is_null()) u.pesq = e.at("pesq").get<double>();
    if (e.contains("mcd") && !e.at("mcd").is_null()) u.mcd = e.at("mcd").get<double>();
    r.utterances.push_back(std::move(u));
  }
  r.pesq_unavailable.reset();
  if (j.contains("pesq_unavailable") && !j.at("pesq_unavailable").is_null()) {
    r.pesq_unavailable = j.at("pesq_unavailable").get<std::string>();
  }
}

void to_json(nlohmann::json& j, const EvalSettings& s) {
  j = nlohmann::json{{"trim", s.trim},
                     {"cepstral_order", s.cepstral_order},
                     {"pesq_scorer", s.pesq_scorer},
                     {"pesq_rate", s.pesq_rate}};
}

void from_json(const nlohmann::json& j, EvalSettings& s) {
  EvalSettings d;
  s.trim = j.value("trim", d.trim);
  s.cepstral_order = j.value("cepstral_order", d.cepstral_order);
  s.pesq_scorer = j.value("pesq_scorer", d.pesq_scorer);
  s.pesq_rate = j.value("pesq_rate", d.pesq_rate);
}

UtteranceScore score_utterance(const std::string& utterance_id,
                               const Waveform& reference, const Waveform& converted,
                               const EvalSettings& settings, const VadConfig& vad,
                               const std::optional<PesqScorer>& scorer) {
  auto prepare = [&](const Waveform& w) {
    Waveform x = w.sample_rate == vad.analysis.sample_rate
                     ? w
                     : resample(w, vad.analysis.sample_rate);
    if (!settings.trim) return x;
    return trim_silence(x, classify(x, SpeechStyle::kNormal, vad)).waveform;
  };
  const Waveform ref = prepare(reference);
  const Waveform conv = prepare(converted);
  UtteranceScore s;
  s.utterance_id = utterance_id;
  s.mcd = mcd(mel_spectrogram(ref, vad.analysis), mel_spectrogram(conv, vad.analysis),
              settings.cepstral_order);
  if (scorer) {
    PesqScorer sc = *scorer;
    sc.sample_rate = settings.pesq_rate;
    s.pesq = pesq_score(ref, conv, sc);
  }
  return s;
}

ResultsTable aggregate(std::span<const QualityReport> reports,
                       std::span<const TrainingLog> logs) {
  struct Acc {
    std::vector<double> pesq, mcd;
    std::size_t n = 0;
    std::optional<double> eq1;
  };
  std::map<ConfigDescriptor, Acc> acc;
  for (const auto& r : reports) {
    auto& a = acc[r.config];
    for (const auto& u : r.utterances) {
      ++a.n;
      if (u.pesq) a.pesq.push_back(*u.pesq);
      if (u.mcd) a.mcd.push_back(*u.mcd);
    }
  }
  for (const auto& log : logs) {
    const auto summaries = log.losses.epoch_summaries();
    if (summaries.empty()) continue;
    acc[log.config].eq1 = summaries.back().mean_eq1_g_loss;
  }
  ResultsTable table;
  for (const auto& [cfg, a] : acc) {
    ResultRow row;
    row.config = cfg;
    row.mean_pesq = mean_of(a.pesq);
    row.mean_mcd = mean_of(a.mcd);
    row.final_eq1_g_loss = a.eq1;
    row.utterances = a.n;
    table.rows.push_back(row);
  }
  const bool any_pesq = std::any_of(table.rows.begin(), table.rows.end(),
                                    [](const ResultRow& r) { return r.mean_pesq.has_value(); });
  ResultRow* best = nullptr;
  for (auto& r : table.rows) {
    if (any_pesq) {
      if (r.mean_pesq && (!best || *r.mean_pesq > *best->mean_pesq)) best = &r;
    } else if (r.mean_mcd && (!best || *r.mean_mcd < *best->mean_mcd)) {
      best = &r;
    }
  }
  if (best != nullptr) best->best = true;
  return table;
}

std::string ResultsTable::to_text() const {
  static const char* headers[] = {"Mask (%)", "Frames", "VAD", "PESQ", "G-Loss", "MCD (dB)",
                                  "N", "Best"};
  std::vector<std::vector<std::string>> cells;
  cells.emplace_back(std::begin(headers), std::end(headers));
  for (const auto& r : rows) {
    cells.push_back({format_mask(r.config.mask_fraction), std::to_string(r.config.window_frames),
                     r.config.vad_enabled ? "yes" : "no",
                     r.mean_pesq ? format_fixed(*r.mean_pesq, 3) : "unavailable",
                     r.final_eq1_g_loss ? format_fixed(*r.final_eq1_g_loss, 3) : "-",
                     r.mean_mcd ? format_fixed(*r.mean_mcd, 2) : "-",
                     std::to_string(r.utterances), r.best ? "*" : ""});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += row[c] + std::string(width[c] - row[c].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

std::string ResultsTable::to_csv() const {
  std::ostringstream os;
  os << "mask_pct,frames,vad,mean_pesq,final_eq1_g_loss,mean_mcd_db,utterances,best\n";
  for (const auto& r : rows) {
    os << format_mask(r.config.mask_fraction) << ',' << r.config.window_frames << ','
       << (r.config.vad_enabled ? "yes" : "no") << ','
       << (r.mean_pesq ? format_fixed(*r.mean_pesq, 6) : "unavailable") << ','
       << (r.final_eq1_g_loss ? format_fixed(*r.final_eq1_g_loss, 6) : "") << ','
       << (r.mean_mcd ? format_fixed(*r.mean_mcd, 6) : "") << ',' << r.utterances << ','
       << (r.best ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace w2n
