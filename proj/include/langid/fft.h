// langid/fft.h

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

#ifndef LANGID_FFT_H_
#define LANGID_FFT_H_

#include <complex>
#include <vector>

namespace langid {

/// Precomputed radix-2 transform of a fixed power-of-two size.
class FftPlan {
 public:
  explicit FftPlan(size_t n);
  size_t size() const { return n_; }
  /// In-place; `inverse` computes the unscaled inverse transform.
  void Transform(std::vector<std::complex<double>> &x, bool inverse) const;

 private:
  size_t n_;
  std::vector<size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // exp(-2 pi i k / n), k < n/2
};

/// One-shot convenience wrapper around FftPlan.
void Fft(std::vector<std::complex<double>> &x, bool inverse = false);

inline bool IsPowerOfTwo(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace langid

#endif  // LANGID_FFT_H_
