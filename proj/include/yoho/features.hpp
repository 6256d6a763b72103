// yoho/features.hpp

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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "yoho/audio_io.hpp"
#include "yoho/common.hpp"
#include "yoho/fft.hpp"

namespace yoho {

/// Row-major dense matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}
  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct FeatureConfig {
  int sample_rate = 16000;
  double window = 0.025;  // seconds
  double hop = 0.010;     // seconds
  int n_mels = 64;
  double fmin = 125.0;
  double fmax = 7500.0;
  double log_floor = 1e-10;

  int window_samples() const { return static_cast<int>(std::lround(window * sample_rate)); }
  int hop_samples() const { return static_cast<int>(std::lround(hop * sample_rate)); }
  int fft_size() const { return static_cast<int>(next_power_of_two(static_cast<std::size_t>(window_samples()))); }

  void validate() const {
    if (sample_rate <= 0) throw ArgumentError("feature config: sample_rate must be positive");
    if (!(fmin >= 0.0 && fmin < fmax)) throw ArgumentError("feature config: need 0 <= fmin < fmax");
    if (fmax > sample_rate / 2.0 + 1e-9) throw ArgumentError("feature config: fmax above Nyquist");
    if (n_mels < 1) throw ArgumentError("feature config: n_mels must be >= 1");
    if (hop_samples() < 1 || hop_samples() > window_samples())
      throw ArgumentError("feature config: need 1 <= hop <= window");
    if (!(log_floor > 0.0)) throw ArgumentError("feature config: log_floor must be positive");
  }

  std::string serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "sample_rate=" << sample_rate << "\nwindow=" << window << "\nhop=" << hop << "\nn_mels=" << n_mels
       << "\nfmin=" << fmin << "\nfmax=" << fmax << "\nlog_floor=" << log_floor << "\n";
    return os.str();
  }

  static FeatureConfig parse(std::string_view text) {
    FeatureConfig c;
    for (auto& [k, v] : parse_key_values(text)) {
      if (k == "sample_rate") c.sample_rate = std::stoi(v);
      else if (k == "window") c.window = std::stod(v);
      else if (k == "hop") c.hop = std::stod(v);
      else if (k == "n_mels") c.n_mels = std::stoi(v);
      else if (k == "fmin") c.fmin = std::stod(v);
      else if (k == "fmax") c.fmax = std::stod(v);
      else if (k == "log_floor") c.log_floor = std::stod(v);
    }
    return c;
  }

  bool operator==(const FeatureConfig&) const = default;
};

/// 16 kHz, 25 ms / 10 ms, 64 mels over 125-7500 Hz.
inline FeatureConfig music_speech_features() { return {16000, 0.025, 0.010, 64, 125.0, 7500.0, 1e-10}; }

/// 44.1 kHz, 40 ms / 10 ms, 40 mels over 0-22050 Hz.
inline FeatureConfig environmental_features() { return {44100, 0.040, 0.010, 40, 0.0, 22050.0, 1e-10}; }

/// Log-mel matrix, frames x n_mels.
struct MelSpectrogram {
  Matrix<float> values;
  FeatureConfig config;

  std::size_t frames() const { return values.rows; }
  std::size_t n_mels() const { return values.cols; }
};

// HTK mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Number of frames produced for n samples: floor(n / hop) + 1.
inline std::size_t num_frames(std::size_t n_samples, int hop_samples) {
  return n_samples / static_cast<std::size_t>(hop_samples) + 1;
}

/// Hann-windowed magnitude spectra, frames x (fft_size/2 + 1).
///
/// Frame t is centred on sample t*hop; the signal is reflect-padded by
/// window/2 on both sides (zero beyond what reflection can reach, e.g. for
/// signals shorter than the pad). The window is zero-padded to the next power
/// of two. Empty input yields one all-zero frame.
inline Matrix<double> stft_magnitude(std::span<const float> samples, int window_samples, int hop_samples) {
  if (hop_samples < 1 || window_samples < hop_samples)
    throw ArgumentError("stft: need window >= hop >= 1");
  const std::size_t fft_size = next_power_of_two(static_cast<std::size_t>(window_samples));
  const std::size_t bins = fft_size / 2 + 1;
  const std::size_t frames = num_frames(samples.size(), hop_samples);
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  const std::int64_t pad = window_samples / 2;

  std::vector<double> window(static_cast<std::size_t>(window_samples));
  for (int i = 0; i < window_samples; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / window_samples);

  auto at = [&](std::int64_t i) -> double {
    if (n == 0) return 0.0;
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    if (i < 0 || i >= n) return 0.0;
    return samples[static_cast<std::size_t>(i)];
  };

  Matrix<double> out(frames, bins);
  std::vector<double> frame(fft_size, 0.0);
  std::vector<std::complex<double>> scratch;
  for (std::size_t t = 0; t < frames; ++t) {
    std::int64_t start = static_cast<std::int64_t>(t) * hop_samples - pad;
    for (int i = 0; i < window_samples; ++i) frame[i] = window[i] * at(start + i);
    real_fft_magnitude(frame, scratch, out.row(t));
  }
  return out;
}

/// Triangular HTK-mel filters, n_mels x n_fft_bins, on the bins of a
/// (n_fft_bins - 1) * 2 point FFT.
inline Matrix<double> mel_filterbank(const FeatureConfig& config, std::size_t n_fft_bins) {
  config.validate();
  if (n_fft_bins < 2) throw ArgumentError("mel_filterbank: need at least 2 FFT bins");
  const double fft_size = 2.0 * static_cast<double>(n_fft_bins - 1);
  const double mel_lo = hz_to_mel(config.fmin), mel_hi = hz_to_mel(config.fmax);
  const int m = config.n_mels;
  std::vector<double> edges(m + 2);
  for (int i = 0; i < m + 2; ++i) edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (m + 1));

  Matrix<double> fb(static_cast<std::size_t>(m), n_fft_bins);
  for (int r = 0; r < m; ++r) {
    const double lo = edges[r], mid = edges[r + 1], hi = edges[r + 2];
    double sum = 0.0;
    for (std::size_t k = 0; k < n_fft_bins; ++k) {
      const double f = k * config.sample_rate / fft_size;
      double w = 0.0;
      if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      fb(r, k) = w;
      sum += w;
    }
    if (sum <= 0.0)
      throw ArgumentError("mel_filterbank: filter " + std::to_string(r) +
                          " covers no FFT bin; too many mels for this resolution");
  }
  return fb;
}

/// Centre frequency (Hz) of every filter built by mel_filterbank.
inline std::vector<double> mel_centers(const FeatureConfig& config) {
  const double mel_lo = hz_to_mel(config.fmin), mel_hi = hz_to_mel(config.fmax);
  std::vector<double> c(config.n_mels);
  for (int i = 0; i < config.n_mels; ++i) c[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * (i + 1) / (config.n_mels + 1));
  return c;
}

/// ln(filterbank * |X|^2 + log_floor) for a mono buffer at the config rate.
inline MelSpectrogram log_mel(const AudioBuffer& buffer, const FeatureConfig& config) {
  config.validate();
  if (buffer.num_channels != 1) throw ArgumentError("log_mel: expected mono audio");
  if (buffer.sample_rate != config.sample_rate)
    throw ArgumentError("log_mel: buffer rate " + std::to_string(buffer.sample_rate) + " != config rate " +
                        std::to_string(config.sample_rate));
  Matrix<double> mag = stft_magnitude(buffer.samples, config.window_samples(), config.hop_samples());
  Matrix<double> fb = mel_filterbank(config, mag.cols);
  MelSpectrogram out;
  out.config = config;
  out.values = Matrix<float>(mag.rows, static_cast<std::size_t>(config.n_mels));
  std::vector<double> power(mag.cols);
  for (std::size_t t = 0; t < mag.rows; ++t) {
    auto row = mag.row(t);
    for (std::size_t k = 0; k < mag.cols; ++k) power[k] = row[k] * row[k];
    for (int m = 0; m < config.n_mels; ++m) {
      auto filt = fb.row(static_cast<std::size_t>(m));
      double e = 0.0;
      for (std::size_t k = 0; k < mag.cols; ++k) e += filt[k] * power[k];
      out.values(t, static_cast<std::size_t>(m)) = static_cast<float>(std::log(e + config.log_floor));
    }
  }
  return out;
}

// Feature cache: "YMEL", version, rows, cols, length-prefixed key=value
// config block, then row-major little-endian float32 values.
inline constexpr std::uint32_t kFeatureCacheVersion = 1;

inline void save_features(std::ostream& os, const MelSpectrogram& spec) {
  os.write("YMEL", 4);
  io::write_u32(os, kFeatureCacheVersion);
  io::write_u32(os, static_cast<std::uint32_t>(spec.values.rows));
  io::write_u32(os, static_cast<std::uint32_t>(spec.values.cols));
  io::write_string(os, spec.config.serialize());
  for (float v : spec.values.data) io::write_f32(os, v);
}

inline MelSpectrogram load_features(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "YMEL", 4) != 0) throw DataError("feature cache: bad magic");
  if (io::read_u32(is) != kFeatureCacheVersion) throw DataError("feature cache: unsupported version");
  MelSpectrogram spec;
  std::uint32_t rows = io::read_u32(is), cols = io::read_u32(is);
  spec.config = FeatureConfig::parse(io::read_string(is));
  spec.values = Matrix<float>(rows, cols);
  for (float& v : spec.values.data) v = io::read_f32(is);
  return spec;
}

inline void save_features(const std::filesystem::path& path, const MelSpectrogram& spec) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  save_features(os, spec);
}

inline MelSpectrogram load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return load_features(is);
}

}  // namespace yoho
