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

#ifndef W2N_FFT_HPP_
#define W2N_FFT_HPP_

#include <complex>
#include <span>
#include <vector>

namespace w2n {

// Real-input FFT of a fixed size backed by FFTW. Each instance owns its plan
// and buffers, so one instance must not be shared across threads; creating
// instances is thread-safe.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int num_bins() const { return size_ / 2 + 1; }

  // Input shorter than size() is zero-padded.
  void forward(std::span<const double> input,
               std::vector<std::complex<double>>& spectrum);
  // Unnormalized inverse: returns size() samples scaled by size().
  void inverse(std::span<const std::complex<double>> spectrum,
               std::vector<double>& output);

 private:
  int size_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace w2n

#endif  // W2N_FFT_HPP_
