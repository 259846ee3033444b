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

#include "w2n/errors.hpp"
#include "w2n/gan.hpp"

namespace w2n {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double eq1_g_loss(std::span<const double> probabilities) {
  if (probabilities.empty()) throw ArgumentError("eq1_g_loss: empty patch grid");
  double acc = 0.0;
  for (double p : probabilities) {
    acc += -std::log(std::clamp(p, kProbabilityEps, 1.0 - kProbabilityEps));
  }
  return acc / static_cast<double>(probabilities.size());
}

double eq1_g_loss_from_scores(std::span<const double> scores) {
  std::vector<double> p(scores.size());
  std::transform(scores.begin(), scores.end(), p.begin(), nn::sigmoid);
  return eq1_g_loss(p);
}

CycleGanNetworks::CycleGanNetworks(const GeneratorSpec& g,
                                   const DiscriminatorSpec& d,
                                   std::uint64_t seed)
    : g_xy(g, mix_seed(seed, 0)),
      g_yx(g, mix_seed(seed, 1)),
      d_x(d, mix_seed(seed, 2)),
      d_y(d, mix_seed(seed, 3)),
      d2_x(d, mix_seed(seed, 4)),
      d2_y(d, mix_seed(seed, 5)) {}

std::vector<ParamSet*> CycleGanNetworks::generator_params() {
  return {&g_xy.params(), &g_yx.params()};
}

std::vector<ParamSet*> CycleGanNetworks::discriminator_params() {
  return {&d_x.params(), &d_y.params(), &d2_x.params(), &d2_y.params()};
}

std::map<std::string, ParamSet*> CycleGanNetworks::all_params() {
  return {{"g_xy", &g_xy.params()}, {"g_yx", &g_yx.params()},
          {"d_x", &d_x.params()},   {"d_y", &d_y.params()},
          {"d2_x", &d2_x.params()}, {"d2_y", &d2_y.params()}};
}

GeneratorLosses generator_losses(const CycleGanNetworks& nets,
                                 const TrainingExample& ex,
                                 const LossWeights& w) {
  const MaskedWindow mx = apply_mask(ex.x_window, ex.x_mask);
  const MaskedWindow my = apply_mask(ex.y_window, ex.y_mask);
  const nn::Var x = matrix_to_var(ex.x_window);
  const nn::Var y = matrix_to_var(ex.y_window);
  const nn::Var ones_x = nn::constant(x->shape, 1.0);
  const nn::Var ones_y = nn::constant(y->shape, 1.0);

  const nn::Var fake_y = nets.g_xy.forward(matrix_to_var(mx.masked_input),
                                           matrix_to_var(mx.mask_channel));
  const nn::Var cycled_x = nets.g_yx.forward(fake_y, ones_x);
  const nn::Var fake_x = nets.g_yx.forward(matrix_to_var(my.masked_input),
                                           matrix_to_var(my.mask_channel));
  const nn::Var cycled_y = nets.g_xy.forward(fake_x, ones_y);

  GeneratorLosses out;
  const nn::Var score_fake_y = nets.d_y.forward(fake_y);
  out.adversarial = nn::add(nn::mean_squared_to(score_fake_y, 1.0),
                            nn::mean_squared_to(nets.d_x.forward(fake_x), 1.0));
  out.second_adversarial =
      nn::add(nn::mean_squared_to(nets.d2_x.forward(cycled_x), 1.0),
              nn::mean_squared_to(nets.d2_y.forward(cycled_y), 1.0));
  out.cycle = nn::add(nn::mean_abs_diff(x, cycled_x), nn::mean_abs_diff(y, cycled_y));
  out.identity = nn::add(nn::mean_abs_diff(x, nets.g_yx.forward(x, ones_x)),
                         nn::mean_abs_diff(y, nets.g_xy.forward(y, ones_y)));
  out.total = nn::add(nn::add(out.adversarial, out.second_adversarial),
                      nn::scale(out.cycle, w.cycle));
  if (w.identity != 0.0) {
    out.total = nn::add(out.total, nn::scale(out.identity, w.identity));
  }
  out.eq1 = eq1_g_loss_from_scores(score_fake_y->value);
  out.fake_x = nn::detach(fake_x);
  out.fake_y = nn::detach(fake_y);
  out.cycled_x = nn::detach(cycled_x);
  out.cycled_y = nn::detach(cycled_y);
  return out;
}

DiscriminatorLosses discriminator_losses(const CycleGanNetworks& nets,
                                         const TrainingExample& ex,
                                         const nn::Var& fake_x,
                                         const nn::Var& fake_y,
                                         const nn::Var& cycled_x,
                                         const nn::Var& cycled_y) {
  const nn::Var x = matrix_to_var(ex.x_window);
  const nn::Var y = matrix_to_var(ex.y_window);
  auto domain = [](const Discriminator& d, const nn::Var& real, const nn::Var& fake) {
    return nn::scale(nn::add(nn::mean_squared_to(d.forward(real), 1.0),
                             nn::mean_squared_to(d.forward(fake), 0.0)),
                     0.5);
  };
  DiscriminatorLosses out;
  out.adversarial = nn::scale(
      nn::add(domain(nets.d_x, x, fake_x), domain(nets.d_y, y, fake_y)), 0.5);
  out.second_adversarial = nn::scale(
      nn::add(domain(nets.d2_x, x, cycled_x), domain(nets.d2_y, y, cycled_y)), 0.5);
  out.total = nn::add(out.adversarial, out.second_adversarial);
  return out;
}

}  // namespace w2n
