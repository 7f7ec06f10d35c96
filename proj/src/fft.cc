// langid/fft.cc

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "langid/fft.h"

#include <cmath>
#include <numbers>

#include "langid/common.h"

namespace langid {

FftPlan::FftPlan(size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
  Check(IsPowerOfTwo(n), "FFT size must be a power of two, got ", n);
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    bitrev_[i] = j;
  }
  for (size_t k = 0; k < n / 2; ++k)
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi *
                                      static_cast<double>(k) /
                                      static_cast<double>(n));
}

void FftPlan::Transform(std::vector<std::complex<double>> &x,
                        bool inverse) const {
  Check(x.size() == n_, "FFT plan size ", n_, " != input size ", x.size());
  for (size_t i = 1; i < n_; ++i)
    if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
  for (size_t len = 2; len <= n_; len <<= 1) {
    const size_t half = len / 2;
    const size_t stride = n_ / len;
    for (size_t i = 0; i < n_; i += len) {
      for (size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * stride];
        if (inverse) w = std::conj(w);
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + half] * w;
        x[i + k] = u + v;
        x[i + k + half] = u - v;
      }
    }
  }
}

void Fft(std::vector<std::complex<double>> &x, bool inverse) {
  FftPlan(x.size()).Transform(x, inverse);
}

}  // namespace langid
