// yoho/audio_io.hpp

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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "yoho/common.hpp"

namespace yoho {

/// Decoded PCM audio. Samples are interleaved when num_channels > 1.
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 16000;
  int num_channels = 1;

  std::size_t num_frames() const { return num_channels > 0 ? samples.size() / num_channels : 0; }
  double duration() const { return static_cast<double>(num_frames()) / sample_rate; }
};

/// Thrown by load_wav; kind() tells the failure classes apart.
class WavError : public DataError {
 public:
  enum class Kind { kUnreadable, kNotPcm, kTruncated, kMalformed };
  WavError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace detail

/// Reads a RIFF/WAVE file: 8/16/24/32-bit integer PCM or 32-bit IEEE float.
/// Integer samples are divided by their full scale (32768 for 16-bit).
inline AudioBuffer load_wav(const std::filesystem::path& path) {
  using detail::le16;
  using detail::le32;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Kind::kUnreadable, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError(WavError::Kind::kUnreadable, path.string() + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t size = le32(hdr + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size())
        throw WavError(WavError::Kind::kMalformed, path.string() + ": short fmt chunk");
      format = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 40 && body + 26 <= bytes.size())
        format = le16(bytes.data() + body + 24);  // WAVE_FORMAT_EXTENSIBLE subformat
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw WavError(WavError::Kind::kMalformed, path.string() + ": data before fmt");
      bool pcm = format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
      bool flt = format == 3 && bits == 32;
      if (!pcm && !flt)
        throw WavError(WavError::Kind::kNotPcm, path.string() + ": unsupported encoding (format " +
                                                    std::to_string(format) + ", " + std::to_string(bits) +
                                                    " bits)");
      if (channels == 0 || rate == 0)
        throw WavError(WavError::Kind::kMalformed, path.string() + ": zero channels or rate");
      if (body + size > bytes.size())
        throw WavError(WavError::Kind::kTruncated, path.string() + ": data chunk truncated");
      std::size_t width = bits / 8;
      std::size_t n = size / width;
      n -= n % channels;
      AudioBuffer buf;
      buf.sample_rate = static_cast<int>(rate);
      buf.num_channels = channels;
      buf.samples.resize(n);
      const unsigned char* p = bytes.data() + body;
      for (std::size_t i = 0; i < n; ++i, p += width) {
        float v = 0.0f;
        if (flt) {
          std::uint32_t u = le32(p);
          std::memcpy(&v, &u, 4);
        } else if (bits == 8) {
          v = (static_cast<int>(p[0]) - 128) / 128.0f;
        } else if (bits == 16) {
          v = static_cast<std::int16_t>(le16(p)) / 32768.0f;
        } else if (bits == 24) {
          std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
          if (s & 0x800000) s -= 0x1000000;
          v = static_cast<float>(s / 8388608.0);
        } else {
          v = static_cast<float>(static_cast<std::int32_t>(le32(p)) / 2147483648.0);
        }
        if (!std::isfinite(v)) throw WavError(WavError::Kind::kMalformed, path.string() + ": non-finite sample");
        buf.samples[i] = v;
      }
      return buf;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw WavError(WavError::Kind::kMalformed, path.string() + ": missing fmt chunk");
  throw WavError(WavError::Kind::kTruncated, path.string() + ": missing data chunk");
}

/// Writes 16-bit PCM; samples are clipped to [-1, 1].
inline void write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  auto u16 = [&](std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(b, 2);
  };
  std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.samples.size() * 2);
  out.write("RIFF", 4);
  io::write_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  io::write_u32(out, 16);
  u16(1);
  u16(static_cast<std::uint16_t>(buf.num_channels));
  io::write_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
  io::write_u32(out, static_cast<std::uint32_t>(buf.sample_rate * buf.num_channels * 2));
  u16(static_cast<std::uint16_t>(buf.num_channels * 2));
  u16(16);
  out.write("data", 4);
  io::write_u32(out, data_bytes);
  for (float s : buf.samples) {
    float c = std::clamp(s, -1.0f, 1.0f);
    long q = std::lround(c * 32768.0f);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  if (!out) throw DataError("write failed: " + path.string());
}

/// Averages channels; mono input is returned unchanged.
inline AudioBuffer downmix_to_mono(const AudioBuffer& buf) {
  if (buf.num_channels <= 1) return buf;
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.num_channels = 1;
  std::size_t frames = buf.num_frames();
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < buf.num_channels; ++c) acc += buf.samples[i * buf.num_channels + c];
    out.samples[i] = static_cast<float>(acc / buf.num_channels);
  }
  return out;
}

/// Windowed-sinc polyphase resampler for mono buffers.
///
/// The low-pass cutoff sits at 0.97 of the lower Nyquist frequency; the kernel
/// is Kaiser-windowed (beta 8.6) with 32 zero crossings on each side. Every
/// polyphase branch is normalized to unit DC gain and the signal is extended by
/// repeating its edge samples, so constant input stays constant to rounding.
/// Output length is round(n * target / source).
inline AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  if (target_rate <= 0) throw ArgumentError("resample: target rate must be positive");
  if (buf.num_channels != 1) throw ArgumentError("resample: downmix to mono first");
  if (target_rate == buf.sample_rate) return buf;

  const std::int64_t src = buf.sample_rate, dst = target_rate;
  const std::int64_t g = std::gcd(src, dst);
  const std::int64_t up = dst / g, down = src / g;
  const std::int64_t n_in = static_cast<std::int64_t>(buf.samples.size());
  const std::int64_t n_out = (n_in * dst + src / 2) / src;

  const double cutoff = 0.97 * std::min(1.0, static_cast<double>(dst) / src);
  const int zero_crossings = 32;
  const int half = static_cast<int>(std::ceil(zero_crossings / cutoff));
  const double beta = 8.6;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);

  auto kernel = [&](double u) {
    double r = u / (half + 1);
    if (std::abs(r) >= 1.0) return 0.0;
    double w = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / i0_beta;
    double x = cutoff * u;
    double s = std::abs(x) < 1e-12 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
    return cutoff * s * w;
  };

  // Branch p covers outputs whose source position has fractional part p/up.
  const int taps = 2 * half + 2;
  const bool tabulate = up <= 4096;
  std::vector<double> table;
  auto fill_branch = [&](std::int64_t p, double* dst_taps) {
    double frac = static_cast<double>(p) / up;
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
      // input index j = i0 - half + k, offset t - j = frac + half - k
      dst_taps[k] = kernel(frac + half - k);
      sum += dst_taps[k];
    }
    for (int k = 0; k < taps; ++k) dst_taps[k] /= sum;
  };
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up * taps));
    for (std::int64_t p = 0; p < up; ++p) fill_branch(p, &table[static_cast<std::size_t>(p * taps)]);
  }

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.num_channels = 1;
  out.samples.resize(static_cast<std::size_t>(n_out));
  if (n_in == 0) return out;
  std::vector<double> scratch(taps);
  for (std::int64_t n = 0; n < n_out; ++n) {
    std::int64_t pos = n * down;
    std::int64_t i0 = pos / up, p = pos % up;
    const double* h;
    if (tabulate) {
      h = &table[static_cast<std::size_t>(p * taps)];
    } else {
      fill_branch(p, scratch.data());
      h = scratch.data();
    }
    double acc = 0.0;
    for (int k = 0; k < taps; ++k) {
      std::int64_t j = std::clamp<std::int64_t>(i0 - half + k, 0, n_in - 1);
      acc += h[k] * buf.samples[static_cast<std::size_t>(j)];
    }
    out.samples[static_cast<std::size_t>(n)] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace yoho
