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

#include "w2n/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "w2n/errors.hpp"

namespace w2n {

namespace {
// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2) throw ArgumentError("RealFft: size must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(size_);
  auto* cplx = fftw_alloc_complex(num_bins());
  complex_ = cplx;
  forward_plan_ = fftw_plan_dft_r2c_1d(size_, real_, cplx, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(size_, cplx, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(static_cast<fftw_complex*>(complex_));
}

void RealFft::forward(std::span<const double> input,
                      std::vector<std::complex<double>>& spectrum) {
  const std::size_t n = std::min<std::size_t>(input.size(), size_);
  std::copy_n(input.begin(), n, real_);
  std::fill(real_ + n, real_ + size_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  auto* cplx = static_cast<fftw_complex*>(complex_);
  spectrum.resize(num_bins());
  for (int k = 0; k < num_bins(); ++k) {
    spectrum[k] = {cplx[k][0], cplx[k][1]};
  }
}

void RealFft::inverse(std::span<const std::complex<double>> spectrum,
                      std::vector<double>& output) {
  if (static_cast<int>(spectrum.size()) != num_bins()) {
    throw ArgumentError("RealFft::inverse: wrong spectrum size");
  }
  auto* cplx = static_cast<fftw_complex*>(complex_);
  for (int k = 0; k < num_bins(); ++k) {
    cplx[k][0] = spectrum[k].real();
    cplx[k][1] = spectrum[k].imag();
  }
  // c2r destroys its input array; it is rewritten on every call.
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  output.assign(real_, real_ + size_);
}

}  // namespace w2n
