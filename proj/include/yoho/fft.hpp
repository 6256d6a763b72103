// yoho/fft.hpp

// Copyright 2026 The yoho-sed Authors
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

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "yoho/common.hpp"

namespace yoho {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place iterative radix-2 FFT (forward, no scaling). Size must be a power of two.
inline void fft_inplace(std::span<std::complex<double>> x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw ArgumentError("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        // twiddles recomputed every 64 steps to bound drift on long transforms
        if ((k & 63) == 0 && k != 0) w = std::polar(1.0, ang * static_cast<double>(k));
        std::complex<double> u = x[i + k], v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

/// Magnitudes |X_k| for k in [0, n/2] of a real frame of power-of-two length n.
inline void real_fft_magnitude(std::span<const double> frame, std::vector<std::complex<double>>& scratch,
                               std::span<double> magnitude) {
  const std::size_t n = frame.size();
  scratch.assign(frame.begin(), frame.end());
  fft_inplace(scratch);
  for (std::size_t k = 0; k <= n / 2; ++k) magnitude[k] = std::abs(scratch[k]);
}

}  // namespace yoho
