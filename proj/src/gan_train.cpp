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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

#include "w2n/errors.hpp"
#include "w2n/gan.hpp"

namespace w2n {

namespace {

constexpr char kCheckpointMagic[4] = {'W', '2', 'N', 'C'};

void set_requires_grad(const std::vector<ParamSet*>& sets, bool on) {
  for (ParamSet* ps : sets) {
    for (auto& [name, v] : ps->items()) v->requires_grad = on;
  }
}

void check_finite(const LossEntry& e) {
  const std::pair<const char*, double> parts[] = {
      {"adversarial_g", e.adversarial_g},
      {"second_adversarial", e.second_adversarial},
      {"cycle", e.cycle},
      {"identity", e.identity},
      {"total_g", e.total_g},
      {"adversarial_d", e.adversarial_d},
      {"second_adversarial_d", e.second_adversarial_d},
      {"total_d", e.total_d},
      {"eq1_g_loss", e.eq1_g_loss}};
  for (const auto& [name, v] : parts) {
    if (!std::isfinite(v)) throw NonFiniteLossError(name, v);
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (!(lambda_cycle > 0.0)) throw ArgumentError("lambda_cycle must be > 0");
  if (!(lambda_identity >= 0.0)) throw ArgumentError("lambda_identity must be >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(generator_lr > 0.0 && discriminator_lr > 0.0)) {
    throw ArgumentError("learning rates must be positive");
  }
  mask.validate();
  generator.validate();
  discriminator.validate();
}

void TrainConfig::sync_network_shapes(int mel_bins) {
  const int rows = image_mode ? kImageSize : mel_bins;
  generator.bins = rows;
  generator.window_frames = mask.window_frames;
  discriminator.bins = rows;
  discriminator.window_frames = mask.window_frames;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"mask", c.mask},
                     {"lambda_cycle", c.lambda_cycle},
                     {"lambda_identity", c.lambda_identity},
                     {"identity_cutoff_iterations", c.identity_cutoff_iterations},
                     {"generator_lr", c.generator_lr},
                     {"discriminator_lr", c.discriminator_lr},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"batch_size", c.batch_size},
                     {"checkpoint_every", c.checkpoint_every},
                     {"max_iterations", c.max_iterations},
                     {"seed", c.seed},
                     {"image_mode", c.image_mode},
                     {"vad_enabled", c.vad_enabled},
                     {"generator", c.generator},
                     {"discriminator", c.discriminator}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.mask = j.contains("mask") ? j.at("mask").get<MaskConfig>() : d.mask;
  c.lambda_cycle = j.value("lambda_cycle", d.lambda_cycle);
  c.lambda_identity = j.value("lambda_identity", d.lambda_identity);
  c.identity_cutoff_iterations =
      j.value("identity_cutoff_iterations", d.identity_cutoff_iterations);
  c.generator_lr = j.value("generator_lr", d.generator_lr);
  c.discriminator_lr = j.value("discriminator_lr", d.discriminator_lr);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.max_iterations = j.value("max_iterations", d.max_iterations);
  c.seed = j.value("seed", d.seed);
  c.image_mode = j.value("image_mode", d.image_mode);
  c.vad_enabled = j.value("vad_enabled", d.vad_enabled);
  c.generator = j.contains("generator") ? j.at("generator").get<GeneratorSpec>() : d.generator;
  c.discriminator = j.contains("discriminator")
                        ? j.at("discriminator").get<DiscriminatorSpec>()
                        : d.discriminator;
}

std::vector<EpochSummary> LossReport::epoch_summaries() const {
  std::vector<EpochSummary> out;
  for (const auto& e : entries) {
    if (out.empty() || out.back().epoch != e.epoch) {
      out.push_back({e.epoch, 0, 0, 0, 0});
    }
    auto& s = out.back();
    ++s.iterations;
    s.mean_total_g += e.total_g;
    s.mean_total_d += e.total_d;
    s.mean_eq1_g_loss += e.eq1_g_loss;
  }
  for (auto& s : out) {
    s.mean_total_g /= s.iterations;
    s.mean_total_d /= s.iterations;
    s.mean_eq1_g_loss /= s.iterations;
  }
  return out;
}

std::string LossReport::to_csv() const {
  std::ostringstream os;
  os << "epoch,iteration,adversarial_g,adversarial_d,second_adversarial,"
        "second_adversarial_d,cycle,identity,total_g,total_d,eq1_g_loss\n";
  for (const auto& e : entries) {
    os << e.epoch << ',' << e.iteration << ',' << format_double(e.adversarial_g)
       << ',' << format_double(e.adversarial_d) << ','
       << format_double(e.second_adversarial) << ','
       << format_double(e.second_adversarial_d) << ',' << format_double(e.cycle)
       << ',' << format_double(e.identity) << ',' << format_double(e.total_g)
       << ',' << format_double(e.total_d) << ',' << format_double(e.eq1_g_loss)
       << '\n';
  }
  return os.str();
}

LossReport LossReport::from_csv(const std::string& text) {
  LossReport r;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("epoch,", 0) == 0) continue;
    }
    std::vector<double> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(std::stod(cell));
    if (f.size() != 11) throw ArgumentError("loss log: expected 11 fields, got " +
                                            std::to_string(f.size()));
    LossEntry e;
    e.epoch = static_cast<int>(f[0]);
    e.iteration = static_cast<int>(f[1]);
    e.adversarial_g = f[2];
    e.adversarial_d = f[3];
    e.second_adversarial = f[4];
    e.second_adversarial_d = f[5];
    e.cycle = f[6];
    e.identity = f[7];
    e.total_g = f[8];
    e.total_d = f[9];
    e.eq1_g_loss = f[10];
    r.entries.push_back(e);
  }
  return r;
}

void LossReport::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv();
}

LossReport LossReport::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open loss log");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

Adam::Adam(std::vector<ParamSet*> params, double lr, double beta1, double beta2,
           double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (ParamSet* ps : params) {
    for (const auto& [name, v] : ps->items()) {
      params_.push_back(v);
      m_.emplace_back(v->size(), 0.0);
      v_.emplace_back(v->size(), 0.0);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p->ensure_grad(), p->zero_grad();
}

void Adam::scale_grads(double s) {
  for (auto& p : params_) {
    for (double& g : p->grad) g *= s;
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    p.ensure_grad();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = p.grad[k];
      m_[i][k] = beta1_ * m_[i][k] + (1.0 - beta1_) * g;
      v_[i][k] = beta2_ * v_[i][k] + (1.0 - beta2_) * g * g;
      p.value[k] -= lr_ * (m_[i][k] / c1) / (std::sqrt(v_[i][k] / c2) + eps_);
    }
  }
}

nlohmann::json Adam::state() const {
  return nlohmann::json{{"t", t_}, {"m", m_}, {"v", v_}};
}

void Adam::load_state(const nlohmann::json& j) {
  t_ = j.at("t").get<long long>();
  m_ = j.at("m").get<std::vector<std::vector<double>>>();
  v_ = j.at("v").get<std::vector<std::vector<double>>>();
}

Checkpoint Checkpoint::capture(const CycleGanNetworks& nets) {
  Checkpoint c;
  auto& mutable_nets = const_cast<CycleGanNetworks&>(nets);
  for (const auto& [net, ps] : mutable_nets.all_params()) {
    auto& slot = c.params[net];
    for (const auto& [name, v] : ps->items()) slot[name] = v->value;
  }
  return c;
}

CycleGanNetworks Checkpoint::restore() const {
  CycleGanNetworks nets(config.generator, config.discriminator, config.seed);
  for (const auto& [net, ps] : nets.all_params()) {
    const auto it = params.find(net);
    if (it == params.end()) throw LoadError("<checkpoint>", "missing network " + net);
    for (const auto& [name, v] : ps->items()) {
      const auto pit = it->second.find(name);
      if (pit == it->second.end() || pit->second.size() != v->size()) {
        throw LoadError("<checkpoint>", "missing or mis-sized parameter " + net +
                                            "/" + name);
      }
      v->value = pit->second;
    }
  }
  return nets;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::json meta;
  meta["speaker_id"] = speaker_id;
  meta["config"] = config;
  meta["analysis"] = analysis;
  meta["whisper_stats"] = whisper_stats;
  meta["normal_stats"] = normal_stats;
  meta["rng_state"] = rng_state;
  meta["epoch"] = epoch;
  meta["iteration"] = iteration;
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& [net, ps] : params) {
    for (const auto& [name, v] : ps) {
      layout.push_back({{"network", net}, {"name", name}, {"size", v.size()}});
    }
  }
  meta["layout"] = layout;
  const std::string header = meta.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(kCheckpointMagic, 4);
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& [net, ps] : params) {
      for (const auto& [name, v] : ps) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
      }
    }
    if (!out) throw Error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  const std::string origin = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(origin, "cannot open checkpoint");
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw LoadError(origin, "not a checkpoint");
  }
  if (version != kVersion) {
    throw LoadError(origin, "unsupported checkpoint version " + std::to_string(version));
  }
  if (len > (1u << 30)) throw LoadError(origin, "corrupt header length");
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw LoadError(origin, "truncated header");
  Checkpoint c;
  try {
    const auto meta = nlohmann::json::parse(header);
    c.speaker_id = meta.at("speaker_id").get<std::string>();
    c.config = meta.at("config").get<TrainConfig>();
    c.analysis = meta.at("analysis").get<AnalysisConfig>();
    c.whisper_stats = meta.at("whisper_stats").get<NormStats>();
    c.normal_stats = meta.at("normal_stats").get<NormStats>();
    c.rng_state = meta.at("rng_state").get<std::string>();
    c.epoch = meta.at("epoch").get<int>();
    c.iteration = meta.at("iteration").get<int>();
    for (const auto& item : meta.at("layout")) {
      std::vector<double> v(item.at("size").get<std::size_t>());
      in.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
      if (!in) throw LoadError(origin, "truncated parameters");
      c.params[item.at("network").get<std::string>()][item.at("name").get<std::string>()] =
          std::move(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(origin, std::string("bad checkpoint header: ") + e.what());
  }
  return c;
}

TrainResult train(const SpeakerData& data, const TrainConfig& cfg_in,
                  const TrainOptions& opt) {
  if (data.whisper.empty() || data.normal.empty()) {
    throw ArgumentError("train: speaker '" + data.speaker_id +
                        "' has no whisper or no normal spectrograms");
  }
  data.analysis.validate();
  TrainConfig cfg = cfg_in;
  cfg.sync_network_shapes(data.analysis.mel_bins);
  cfg.validate();

  auto features = [&](const std::vector<Eigen::MatrixXd>& in) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(in.size());
    for (const auto& m : in) {
      if (m.rows() != data.analysis.mel_bins || m.cols() == 0) {
        throw ArgumentError("train: spectrogram shape does not match analysis config");
      }
      out.push_back(cfg.image_mode ? resize_bilinear(m, kImageSize, kImageSize) : m);
    }
    return out;
  };
  const auto whisper_raw = features(data.whisper);
  const auto normal_raw = features(data.normal);
  const NormStats whisper_stats = compute_norm_stats(whisper_raw);
  const NormStats normal_stats = compute_norm_stats(normal_raw);
  std::vector<Eigen::MatrixXd> xs, ys;
  for (const auto& m : whisper_raw) xs.push_back(normalize(m, whisper_stats));
  for (const auto& m : normal_raw) ys.push_back(normalize(m, normal_stats));
  const double floor = data.analysis.log_floor_value();
  const Eigen::VectorXd x_pad =
      ((Eigen::VectorXd::Constant(whisper_stats.mean.size(), floor) - whisper_stats.mean)
           .array() / whisper_stats.stddev.array()).matrix();
  const Eigen::VectorXd y_pad =
      ((Eigen::VectorXd::Constant(normal_stats.mean.size(), floor) - normal_stats.mean)
           .array() / normal_stats.stddev.array()).matrix();

  CycleGanNetworks nets(cfg.generator, cfg.discriminator, cfg.seed);
  Adam g_opt(nets.generator_params(), cfg.generator_lr, cfg.beta1, cfg.beta2);
  Adam d_opt(nets.discriminator_params(), cfg.discriminator_lr, cfg.beta1, cfg.beta2);
  Rng rng(cfg.seed);

  TrainResult result;
  auto make_checkpoint = [&](int epoch, int iteration) {
    Checkpoint c = Checkpoint::capture(nets);
    c.speaker_id = data.speaker_id;
    c.config = cfg;
    c.analysis = data.analysis;
    c.whisper_stats = whisper_stats;
    c.normal_stats = normal_stats;
    std::ostringstream rs;
    rs << rng;
    c.rng_state = rs.str();
    c.epoch = epoch;
    c.iteration = iteration;
    return c;
  };

  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  const int per_epoch = (std::max(nx, ny) + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<int> x_order(nx), y_order(ny);
  int iteration = 0;
  bool stop = false;
  Checkpoint last_good = make_checkpoint(0, 0);

  for (int epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    for (int i = 0; i < nx; ++i) x_order[i] = i;
    for (int i = 0; i < ny; ++i) y_order[i] = i;
    for (int i = nx - 1; i > 0; --i) std::swap(x_order[i], x_order[uniform_index(rng, i + 1)]);
    for (int i = ny - 1; i > 0; --i) std::swap(y_order[i], y_order[uniform_index(rng, i + 1)]);

    for (int step = 0; step < per_epoch; ++step) {
      if (cfg.max_iterations > 0 && iteration >= cfg.max_iterations) {
        stop = true;
        break;
      }
      std::vector<TrainingExample> batch;
      for (int b = 0; b < cfg.batch_size; ++b) {
        const int slot = step * cfg.batch_size + b;
        TrainingExample ex;
        ex.x_window = sample_window(xs[x_order[slot % nx]], cfg.mask.window_frames, x_pad, rng).values;
        ex.x_mask = generate_mask(cfg.mask, rng);
        ex.y_window = sample_window(ys[y_order[slot % ny]], cfg.mask.window_frames, y_pad, rng).values;
        ex.y_mask = generate_mask(cfg.mask, rng);
        batch.push_back(std::move(ex));
      }

      LossWeights weights{cfg.lambda_cycle, cfg.lambda_identity};
      if (cfg.identity_cutoff_iterations > 0 && iteration >= cfg.identity_cutoff_iterations) {
        weights.identity = 0.0;
      }
      const double inv_batch = 1.0 / cfg.batch_size;
      LossEntry entry;
      entry.epoch = epoch;
      entry.iteration = iteration;

      // Generator step with discriminators frozen.
      set_requires_grad(nets.discriminator_params(), false);
      g_opt.zero_grad();
      std::vector<GeneratorLosses> g_out;
      for (const auto& ex : batch) {
        GeneratorLosses gl = generator_losses(nets, ex, weights);
        nn::backward(gl.total);
        entry.adversarial_g += gl.adversarial->value[0] * inv_batch;
        entry.second_adversarial += gl.second_adversarial->value[0] * inv_batch;
        entry.cycle += gl.cycle->value[0] * inv_batch;
        entry.identity += gl.identity->value[0] * inv_batch;
        entry.total_g += gl.total->value[0] * inv_batch;
        entry.eq1_g_loss += gl.eq1 * inv_batch;
        g_out.push_back(std::move(gl));
      }
      set_requires_grad(nets.discriminator_params(), true);

      // Discriminator losses on the same outputs, evaluated before either
      // update so that a non-finite value leaves the state untouched.
      d_opt.zero_grad();
      set_requires_grad(nets.generator_params(), false);
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& gl = g_out[b];
        DiscriminatorLosses dl = discriminator_losses(nets, batch[b], gl.fake_x, gl.fake_y,
                                                      gl.cycled_x, gl.cycled_y);
        nn::backward(dl.total);
        entry.adversarial_d += dl.adversarial->value[0] * inv_batch;
        entry.second_adversarial_d += dl.second_adversarial->value[0] * inv_batch;
        entry.total_d += dl.total->value[0] * inv_batch;
      }
      set_requires_grad(nets.generator_params(), true);

      try {
        check_finite(entry);
      } catch (const NonFiniteLossError&) {
        if (opt.output_dir) {
          const auto path = *opt.output_dir / "last_good.ckpt";
          last_good.save(path);
          result.checkpoints.push_back(path);
        }
        throw;
      }
      last_good = make_checkpoint(epoch, iteration);

      if (cfg.batch_size > 1) {
        g_opt.scale_grads(inv_batch);
        d_opt.scale_grads(inv_batch);
      }
      g_opt.step();
      d_opt.step();

      result.report.entries.push_back(entry);
      if (opt.on_iteration) opt.on_iteration(entry);
      ++iteration;
    }
    if (opt.output_dir && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      std::ostringstream name;
      name << "epoch_" << std::setw(4) << std::setfill('0') << epoch << ".ckpt";
      const auto path = *opt.output_dir / name.str();
      make_checkpoint(epoch, iteration).save(path);
      result.checkpoints.push_back(path);
    }
  }

  const int last_epoch = result.report.entries.empty() ? 0 : result.report.entries.back().epoch;
  result.final_checkpoint = make_checkpoint(last_epoch, iteration);
  if (opt.output_dir) {
    const auto path = *opt.output_dir / "final.ckpt";
    result.final_checkpoint.save(path);
    result.checkpoints.push_back(path);
    result.report.save(*opt.output_dir / "losses.csv");
  }
  return result;
}

std::string to_string(Direction d) {
  return d == Direction::kWhisperToNormal ? "whisper2normal" : "normal2whisper";
}

Direction parse_direction(const std::string& s) {
  if (s == "whisper2normal") return Direction::kWhisperToNormal;
  if (s == "normal2whisper") return Direction::kNormalToWhisper;
  throw ArgumentError("unknown direction '" + s + "'");
}

MelSpectrogram convert(const MelSpectrogram& spec, const Checkpoint& ckpt,
                       Direction direction, const std::string& expected_speaker) {
  if (!expected_speaker.empty() && expected_speaker != ckpt.speaker_id) {
    throw ContractError("checkpoint is for speaker '" + ckpt.speaker_id +
                        "', requested '" + expected_speaker + "'");
  }
  const CycleGanNetworks nets = ckpt.restore();
  return convert(spec, ckpt, nets, direction, expected_speaker);
}

MelSpectrogram convert(const MelSpectrogram& spec, const Checkpoint& ckpt,
                       const CycleGanNetworks& nets, Direction direction,
                       const std::string& expected_speaker) {
  if (!expected_speaker.empty() && expected_speaker != ckpt.speaker_id) {
    throw ContractError("checkpoint is for speaker '" + ckpt.speaker_id +
                        "', requested '" + expected_speaker + "'");
  }
  if (spec.config.hash() != ckpt.analysis.hash()) {
    throw ContractError("spectrogram analysis config " + spec.config.hash_hex() +
                        " does not match checkpoint config " + ckpt.analysis.hash_hex());
  }
  if (spec.values.size() == 0) throw ArgumentError("convert: empty spectrogram");
  const bool forward = direction == Direction::kWhisperToNormal;
  const NormStats& src = forward ? ckpt.whisper_stats : ckpt.normal_stats;
  const NormStats& dst = forward ? ckpt.normal_stats : ckpt.whisper_stats;
  const Generator& gen = forward ? nets.g_xy : nets.g_yx;

  const Eigen::MatrixXd feature = ckpt.config.image_mode
                                      ? resize_bilinear(spec.values, kImageSize, kImageSize)
                                      : spec.values;
  const Eigen::MatrixXd norm = normalize(feature, src);
  const Eigen::VectorXd pad =
      ((Eigen::VectorXd::Constant(src.mean.size(), spec.config.log_floor_value()) - src.mean)
           .array() / src.stddev.array()).matrix();
  const int window = ckpt.config.mask.window_frames;
  const FrameMask ones = test_mask(window);
  const int frames = static_cast<int>(norm.cols());
  Eigen::MatrixXd out(norm.rows(), frames);
  Eigen::MatrixXd buf(norm.rows(), window);
  for (int start = 0; start < frames; start += window) {
    const int len = std::min(window, frames - start);
    buf.leftCols(len) = norm.middleCols(start, len);
    if (len < window) buf.rightCols(window - len) = pad.replicate(1, window - len);
    out.middleCols(start, len) = gen.apply(buf, ones).leftCols(len);
  }
  Eigen::MatrixXd converted = denormalize(out, dst);
  MelSpectrogram result;
  result.config = spec.config;
  result.values = ckpt.config.image_mode
                      ? resize_bilinear(converted, spec.bins(), spec.frames())
                      : converted;
  return result;
}

}  // namespace w2n
