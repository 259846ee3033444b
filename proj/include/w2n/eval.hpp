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

#ifndef W2N_EVAL_HPP_
#define W2N_EVAL_HPP_

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "w2n/dsp.hpp"
#include "w2n/gan.hpp"
#include "w2n/vad.hpp"

namespace w2n {

inline constexpr const char* kPesqScorerEnv = "W2N_PESQ_SCORER";
// Scores outside this range are rejected as scorer faults. The upper bound
// admits the wideband mapping's ceiling of about 4.64.
inline constexpr double kPesqMin = -0.5;
inline constexpr double kPesqMax = 4.65;
// Scorer exit status meaning "backend not installed".
inline constexpr int kScorerUnavailableStatus = 3;

// External P.862 scorer invoked as `<command> <ref.wav> <deg.wav> <rate>`,
// printing one float on stdout.
struct PesqScorer {
  std::string command;
  int sample_rate = 16000;

  // Uses the environment override when set, otherwise `fallback`.
  // Returns nullopt when neither names a scorer.
  static std::optional<PesqScorer> resolve(const std::string& fallback = {});
};

// Throws UnavailableError when the scorer cannot run.
double pesq_score(const Waveform& reference, const Waveform& degraded,
                  const PesqScorer& scorer);

inline constexpr int kDefaultCepstralOrder = 24;
// 10 * sqrt(2) / ln(10)
double mcd_constant();

// Orthonormal DCT-II along each column, keeping coefficients 0..order.
Eigen::MatrixXd mel_cepstrum(const Eigen::MatrixXd& log_mel, int order);

// Mel-cepstral distortion in dB over coefficients 1..order. The longer input
// is truncated to the shorter frame count.
double mcd(const MelSpectrogram& reference, const MelSpectrogram& converted,
           int order = kDefaultCepstralOrder);

struct ConfigDescriptor {
  double mask_fraction = 0.5;
  int window_frames = 128;
  bool vad_enabled = true;

  auto operator<=>(const ConfigDescriptor&) const = default;
  bool operator==(const ConfigDescriptor&) const = default;
};

void to_json(nlohmann::json& j, const ConfigDescriptor& c);
void from_json(const nlohmann::json& j, ConfigDescriptor& c);

struct UtteranceScore {
  std::string utterance_id;
  std::optional<double> pesq;
  std::optional<double> mcd;
};

struct QualityReport {
  ConfigDescriptor config;
  std::vector<UtteranceScore> utterances;
  // Set when PESQ could not be computed; holds the reason.
  std::optional<std::string> pesq_unavailable;
};

void to_json(nlohmann::json& j, const QualityReport& r);
void from_json(const nlohmann::json& j, QualityReport& r);

struct EvalSettings {
  bool trim = true;
  int cepstral_order = kDefaultCepstralOrder;
  std::string pesq_scorer;
  int pesq_rate = 16000;
};

void to_json(nlohmann::json& j, const EvalSettings& s);
void from_json(const nlohmann::json& j, EvalSettings& s);

// Trims both sides with the VAD (normal-speech threshold), then scores.
// PESQ is left empty when scorer is nullopt.
UtteranceScore score_utterance(const std::string& utterance_id,
                               const Waveform& reference, const Waveform& converted,
                               const EvalSettings& settings, const VadConfig& vad,
                               const std::optional<PesqScorer>& scorer);

struct TrainingLog {
  ConfigDescriptor config;
  LossReport losses;
};

struct ResultRow {
  ConfigDescriptor config;
  std::optional<double> mean_pesq;
  std::optional<double> mean_mcd;
  std::optional<double> final_eq1_g_loss;
  std::size_t utterances = 0;
  bool best = false;
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

// One row per configuration, sorted by (mask, frames, VAD). The best row has
// the highest mean PESQ, or the lowest mean MCD when no PESQ is available.
ResultsTable aggregate(std::span<const QualityReport> reports,
                       std::span<const TrainingLog> logs);

}  // namespace w2n

#endif  // W2N_EVAL_HPP_
