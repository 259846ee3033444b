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

#ifndef W2N_GAN_HPP_
#define W2N_GAN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "w2n/dsp.hpp"
#include "w2n/gan_models.hpp"
#include "w2n/masking.hpp"

namespace w2n {

// Generator loss metric -log D(G(x)) averaged over patches. Probabilities are
// clamped to [eps, 1 - eps].
inline constexpr double kProbabilityEps = 1e-7;
double eq1_g_loss(std::span<const double> probabilities);
// Applies a sigmoid to discriminator scores first.
double eq1_g_loss_from_scores(std::span<const double> scores);

struct TrainConfig {
  int epochs = 400;
  MaskConfig mask = MaskConfig::proposed();
  double lambda_cycle = 10.0;
  double lambda_identity = 5.0;
  // Identity loss weight drops to zero from this iteration on (0 = never).
  int identity_cutoff_iterations = 10000;
  double generator_lr = 2e-4;
  double discriminator_lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 1;
  // Checkpoint cadence in epochs (0 = only the final checkpoint).
  int checkpoint_every = 50;
  // Stops early after this many iterations when > 0.
  int max_iterations = 0;
  std::uint64_t seed = 0;
  // Operate on 224x224 resized spectrogram images; false uses native bins x T.
  bool image_mode = true;
  bool vad_enabled = true;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;

  void validate() const;
  // Generator/discriminator input geometry implied by image_mode and mask.
  void sync_network_shapes(int mel_bins);
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// The six networks of the mask-guided cycle-consistent GAN. X is the whisper
// domain and Y the normal domain.
struct CycleGanNetworks {
  Generator g_xy;
  Generator g_yx;
  Discriminator d_x;
  Discriminator d_y;
  Discriminator d2_x;
  Discriminator d2_y;

  CycleGanNetworks(const GeneratorSpec& g, const DiscriminatorSpec& d,
                   std::uint64_t seed);

  std::vector<ParamSet*> generator_params();
  std::vector<ParamSet*> discriminator_params();
  std::map<std::string, ParamSet*> all_params();
};

// One training example: a window from each domain with its FIF mask.
struct TrainingExample {
  Eigen::MatrixXd x_window;
  FrameMask x_mask;
  Eigen::MatrixXd y_window;
  FrameMask y_mask;
};

struct LossWeights {
  double cycle = 10.0;
  double identity = 5.0;
};

struct GeneratorLosses {
  nn::Var adversarial;
  nn::Var second_adversarial;
  nn::Var cycle;
  nn::Var identity;
  nn::Var total;
  double eq1 = 0.0;
  // Detached generator outputs for the discriminator step.
  nn::Var fake_x, fake_y, cycled_x, cycled_y;
};

struct DiscriminatorLosses {
  nn::Var adversarial;
  nn::Var second_adversarial;
  nn::Var total;
};

// Least-squares adversarial terms, L1 cycle and identity terms, and a second
// adversarial term on cycle-reconstructed outputs.
GeneratorLosses generator_losses(const CycleGanNetworks& nets,
                                 const TrainingExample& ex,
                                 const LossWeights& w);

DiscriminatorLosses discriminator_losses(const CycleGanNetworks& nets,
                                         const TrainingExample& ex,
                                         const nn::Var& fake_x,
                                         const nn::Var& fake_y,
                                         const nn::Var& cycled_x,
                                         const nn::Var& cycled_y);

struct LossEntry {
  int epoch = 0;
  int iteration = 0;
  double adversarial_g = 0;
  double adversarial_d = 0;
  double second_adversarial = 0;
  double second_adversarial_d = 0;
  double cycle = 0;
  double identity = 0;
  double total_g = 0;
  double total_d = 0;
  double eq1_g_loss = 0;

  bool operator==(const LossEntry&) const = default;
};

struct EpochSummary {
  int epoch = 0;
  int iterations = 0;
  double mean_total_g = 0;
  double mean_total_d = 0;
  double mean_eq1_g_loss = 0;
};

struct LossReport {
  std::vector<LossEntry> entries;

  std::vector<EpochSummary> epoch_summaries() const;
  // Header line plus one comma-separated record per iteration.
  std::string to_csv() const;
  static LossReport from_csv(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static LossReport load(const std::filesystem::path& path);
};

class Adam {
 public:
  Adam(std::vector<ParamSet*> params, double lr, double beta1, double beta2,
       double eps = 1e-8);
  void step();
  void zero_grad();
  void scale_grads(double s);
  nlohmann::json state() const;
  void load_state(const nlohmann::json& j);

 private:
  std::vector<nn::Var> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

// Versioned container with all parameters, the training config, per-domain
// normalization stats and RNG state.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string speaker_id;
  TrainConfig config;
  AnalysisConfig analysis;
  NormStats whisper_stats;
  NormStats normal_stats;
  std::string rng_state;
  int epoch = 0;
  int iteration = 0;
  // network name -> parameter name -> values
  std::map<std::string, std::map<std::string, std::vector<double>>> params;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  static Checkpoint capture(const CycleGanNetworks& nets);
  // Rebuilds the networks and copies stored parameters into them.
  CycleGanNetworks restore() const;
};

// Normalized-free input for one speaker: log-mel matrices per domain.
struct SpeakerData {
  std::string speaker_id;
  AnalysisConfig analysis;
  std::vector<Eigen::MatrixXd> whisper;
  std::vector<Eigen::MatrixXd> normal;
};

struct TrainOptions {
  std::optional<std::filesystem::path> output_dir;
  std::function<void(const LossEntry&)> on_iteration;
};

struct TrainResult {
  LossReport report;
  Checkpoint final_checkpoint;
  std::vector<std::filesystem::path> checkpoints;
};

// Per iteration: a discriminator-frozen generator step, then a
// discriminator step on freshly generated outputs.
TrainResult train(const SpeakerData& data, const TrainConfig& cfg,
                  const TrainOptions& opt = {});

enum class Direction { kWhisperToNormal, kNormalToWhisper };

std::string to_string(Direction d);
Direction parse_direction(const std::string& s);

// Runs the generator over the whole utterance in non-overlapping windows with
// all-ones masks; the last partial window is padded then cropped.
MelSpectrogram convert(const MelSpectrogram& spec, const Checkpoint& ckpt,
                       Direction direction,
                       const std::string& expected_speaker = {});
// Same, reusing already restored networks.
MelSpectrogram convert(const MelSpectrogram& spec, const Checkpoint& ckpt,
                       const CycleGanNetworks& nets, Direction direction,
                       const std::string& expected_speaker = {});

}  // namespace w2n

#endif  // W2N_GAN_HPP_
