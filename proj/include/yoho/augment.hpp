// yoho/augment.hpp

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

#include <random>
#include <vector>

#include "yoho/tensor.hpp"

namespace yoho {

/// SpecAugment without time warping. Widths are uniform in [0, max_*_width],
/// band starts uniform over the positions where the band fits.
struct SpecAugmentConfig {
  std::size_t time_masks = 0;
  std::size_t freq_masks = 0;
  std::size_t max_time_width = 0;
  std::size_t max_freq_width = 0;

  bool enabled() const { return time_masks + freq_masks > 0; }
};

struct MaskBand {
  std::size_t start = 0;
  std::size_t width = 0;
};

struct AppliedMasks {
  std::vector<MaskBand> time;
  std::vector<MaskBand> freq;
};

/// Masks a (batch, time, mels) tensor in place. One set of bands is drawn per
/// call and applied to every example in the batch; masked cells take the batch
/// mean. Label grids are left alone.
template <typename T>
AppliedMasks spec_augment(Tensor<T>& batch, const SpecAugmentConfig& cfg, std::mt19937_64& rng) {
  if (batch.rank() != 3) throw ShapeError("spec_augment: expected (batch, time, mels)");
  const std::size_t n = batch.dim(0), t_len = batch.dim(1), f_len = batch.dim(2);
  if (cfg.time_masks > 0 && cfg.max_time_width > t_len) throw ArgumentError("spec_augment: time mask wider than axis");
  if (cfg.freq_masks > 0 && cfg.max_freq_width > f_len) throw ArgumentError("spec_augment: freq mask wider than axis");
  AppliedMasks masks;
  if (!cfg.enabled() || batch.size() == 0) return masks;

  auto draw = [&](std::size_t max_width, std::size_t axis) {
    std::uniform_int_distribution<std::size_t> wd(0, max_width);
    MaskBand b;
    b.width = wd(rng);
    std::uniform_int_distribution<std::size_t> sd(0, axis - b.width);
    b.start = sd(rng);
    return b;
  };
  for (std::size_t i = 0; i < cfg.time_masks; ++i) masks.time.push_back(draw(cfg.max_time_width, t_len));
  for (std::size_t i = 0; i < cfg.freq_masks; ++i) masks.freq.push_back(draw(cfg.max_freq_width, f_len));

  double sum = 0.0;
  for (T v : batch.values) sum += v;
  const T fill = static_cast<T>(sum / static_cast<double>(batch.size()));

  std::vector<std::uint8_t> time_hit(t_len, 0), freq_hit(f_len, 0);
  for (const auto& b : masks.time) std::fill_n(time_hit.begin() + b.start, b.width, 1);
  for (const auto& b : masks.freq) std::fill_n(freq_hit.begin() + b.start, b.width, 1);
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t t = 0; t < t_len; ++t) {
      T* row = &batch.values[(e * t_len + t) * f_len];
      for (std::size_t f = 0; f < f_len; ++f)
        if (time_hit[t] || freq_hit[f]) row[f] = fill;
    }
  return masks;
}

}  // namespace yoho
