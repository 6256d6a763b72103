// tests/test_features.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "yoho/features.hpp"

namespace yoho {
namespace {

AudioBuffer tone(double hz, double seconds, int rate, double amp = 0.5) {
  AudioBuffer b;
  b.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * rate));
  for (std::size_t i = 0; i < n; ++i) b.samples.push_back(static_cast<float>(amp * std::sin(2 * M_PI * hz * i / rate)));
  return b;
}

TEST(Fft, MatchesNaiveDft) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {g(rng), g(rng)};
    std::vector<std::complex<double>> y = x;
    fft_inplace(y);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc = 0;
      for (std::size_t t = 0; t < n; ++t) acc += x[t] * std::polar(1.0, -2 * M_PI * double(k * t % n) / double(n));
      ASSERT_LT(std::abs(acc - y[k]), 1e-9 * std::sqrt(double(n)) * 10) << "n=" << n << " k=" << k;
    }
  }
  std::vector<std::complex<double>> bad(6);
  EXPECT_THROW(fft_inplace(bad), ArgumentError);
}

TEST(Stft, ZerosGiveZeroFrames) {
  std::vector<float> z(160, 0.0f);
  Matrix<double> m = stft_magnitude(z, 400, 160);
  EXPECT_EQ(m.rows, 2u);
  EXPECT_EQ(m.cols, 257u);
  for (double v : m.data) EXPECT_EQ(v, 0.0);
}

TEST(Stft, EmptyInputGivesOneZeroFrame) {
  Matrix<double> m = stft_magnitude({}, 400, 160);
  EXPECT_EQ(m.rows, 1u);
  for (double v : m.data) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(stft_magnitude({}, 100, 160), ArgumentError);
}

TEST(Stft, ImpulseIsFlat) {
  // Frame 5 is centred on sample 800, where the periodic Hann window peaks at 1.
  std::vector<float> x(1600, 0.0f);
  x[800] = 1.0f;
  Matrix<double> m = stft_magnitude(x, 400, 160);
  for (std::size_t k = 0; k < m.cols; ++k) EXPECT_NEAR(m(5, k), 1.0, 1e-12);
}

TEST(Stft, SinePeakBin) {
  AudioBuffer t = tone(1000.0, 0.5, 16000);
  Matrix<double> m = stft_magnitude(t.samples, 400, 160);
  const std::size_t fft = 512;
  const auto row = m.row(10);
  const std::size_t peak = std::max_element(row.begin(), row.end()) - row.begin();
  EXPECT_EQ(peak, static_cast<std::size_t>(std::lround(1000.0 * fft / 16000)));
}

TEST(MelFilterbank, RowsPositiveAndCentresIncrease) {
  for (const FeatureConfig& cfg : {music_speech_features(), environmental_features()}) {
    Matrix<double> fb = mel_filterbank(cfg, cfg.fft_size() / 2 + 1);
    ASSERT_EQ(fb.rows, static_cast<std::size_t>(cfg.n_mels));
    std::size_t prev_peak = 0;
    for (std::size_t r = 0; r < fb.rows; ++r) {
      double sum = 0;
      for (double v : fb.row(r)) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_GT(sum, 0.0);
      const auto row = fb.row(r);
      const std::size_t peak = std::max_element(row.begin(), row.end()) - row.begin();
      if (r > 0) {
        EXPECT_GE(peak, prev_peak);
      }
      prev_peak = peak;
    }
    auto c = mel_centers(cfg);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i], c[i - 1]);
  }
}

// Second mel pair written with the natural-log form of the same scale.
double mel_ln(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double inv_mel_ln(double m) { return 700.0 * (std::exp(m / 1127.0) - 1.0); }

TEST(MelFilterbank, FirstCentreMatchesIndependentMelPair) {
  const FeatureConfig cfg = music_speech_features();
  const double delta = (mel_ln(7500.0) - mel_ln(125.0)) / (64 + 1);
  const double expected = inv_mel_ln(mel_ln(125.0) + delta);
  // The two scale constants agree to about 1e-5 relative.
  EXPECT_NEAR(mel_centers(cfg)[0], expected, 1e-3 * expected);
  const double last = inv_mel_ln(mel_ln(125.0) + 64 * delta);
  EXPECT_NEAR(mel_centers(cfg)[63], last, 1e-3 * last);
  // The triangle for filter 0 peaks at the FFT bin nearest that centre.
  Matrix<double> fb = mel_filterbank(cfg, 257);
  const auto row = fb.row(0);
  const double peak_hz = (std::max_element(row.begin(), row.end()) - row.begin()) * 16000.0 / 512;
  EXPECT_LE(std::abs(peak_hz - expected), 16000.0 / 512);
}

TEST(MelFilterbank, Errors) {
  FeatureConfig cfg = music_speech_features();
  cfg.fmax = 9000.0;
  EXPECT_THROW(mel_filterbank(cfg, 257), ArgumentError);
  cfg = music_speech_features();
  cfg.n_mels = 400;
  EXPECT_THROW(mel_filterbank(cfg, 257), ArgumentError);
}

TEST(LogMel, ShapeLaw) {
  struct Case {
    FeatureConfig cfg;
    double seconds;
    std::size_t frames, mels;
  };
  for (const Case& c : {Case{music_speech_features(), 8.0, 801, 64}, Case{environmental_features(), 2.56, 257, 40},
                        Case{environmental_features(), 10.0, 1001, 40}}) {
    AudioBuffer b = tone(440.0, c.seconds, c.cfg.sample_rate);
    MelSpectrogram m = log_mel(b, c.cfg);
    EXPECT_EQ(m.frames(), c.frames);
    EXPECT_EQ(m.n_mels(), c.mels);
    EXPECT_EQ(m.frames(), num_frames(b.samples.size(), c.cfg.hop_samples()));
    for (float v : m.values.data) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(LogMel, SilenceIsTheLogFloor) {
  AudioBuffer s;
  s.samples.assign(1600, 0.0f);
  MelSpectrogram m = log_mel(s, music_speech_features());
  for (float v : m.values.data) EXPECT_FLOAT_EQ(v, static_cast<float>(std::log(1e-10)));
}

TEST(LogMel, ScalingShiftsByTwoLogK) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(-0.1f, 0.1f);
  AudioBuffer a;
  for (int i = 0; i < 8000; ++i) a.samples.push_back(u(rng));
  AudioBuffer b = a;
  const double k = 3.0;
  for (float& v : b.samples) v = static_cast<float>(v * k);
  const auto cfg = music_speech_features();
  MelSpectrogram ma = log_mel(a, cfg), mb = log_mel(b, cfg);
  for (std::size_t i = 0; i < ma.values.data.size(); ++i) {
    if (ma.values.data[i] < -10.0f) continue;  // only where energy dwarfs the floor
    EXPECT_NEAR(mb.values.data[i] - ma.values.data[i], 2 * std::log(k), 1e-4);
  }
}

TEST(LogMel, RateMismatch) {
  AudioBuffer b = tone(440, 0.1, 22050);
  EXPECT_THROW(log_mel(b, music_speech_features()), ArgumentError);
}

TEST(FeatureCache, BitExactRoundTrip) {
  MelSpectrogram m = log_mel(tone(300, 0.3, 16000), music_speech_features());
  std::stringstream ss;
  save_features(ss, m);
  MelSpectrogram back = load_features(ss);
  EXPECT_EQ(back.config, m.config);
  ASSERT_EQ(back.values.rows, m.values.rows);
  EXPECT_EQ(std::memcmp(back.values.data.data(), m.values.data.data(), m.values.data.size() * 4), 0);
  std::istringstream junk("nope");
  EXPECT_THROW(load_features(junk), DataError);
}

TEST(FeatureConfig, ProfilesAndValidation) {
  const auto ms = music_speech_features();
  EXPECT_EQ(ms.window_samples(), 400);
  EXPECT_EQ(ms.hop_samples(), 160);
  EXPECT_EQ(ms.fft_size(), 512);
  const auto env = environmental_features();
  EXPECT_EQ(env.window_samples(), 1764);
  EXPECT_EQ(env.hop_samples(), 441);
  EXPECT_EQ(env.fft_size(), 2048);
  EXPECT_NO_THROW(env.validate());
  FeatureConfig bad = ms;
  bad.hop = 0.05;
  EXPECT_THROW(bad.validate(), ArgumentError);
  EXPECT_EQ(FeatureConfig::parse(ms.serialize()), ms);
}

}  // namespace
}  // namespace yoho
