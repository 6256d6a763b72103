// yoho/datagen.hpp

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "yoho/audio_io.hpp"
#include "yoho/label_codec.hpp"

namespace yoho {

enum class SourceKind { kHarmonicTone, kBandNoise };

/// One synthetic class. A harmonic tone draws its fundamental from
/// [low_hz, high_hz] and adds `harmonics` partials with 1/h amplitudes; band
/// noise is white noise through a cascade of band-pass biquads centred on
/// sqrt(low_hz * high_hz).
struct SynthClass {
  std::string label;
  SourceKind kind = SourceKind::kHarmonicTone;
  double low_hz = 200.0;
  double high_hz = 400.0;
  int harmonics = 3;

  /// Frequency range the class puts its energy in.
  std::pair<double, double> band() const {
    if (kind == SourceKind::kHarmonicTone) return {low_hz, high_hz * harmonics};
    return {low_hz, high_hz};
  }
};

/// Tone ("music") below 1.2 kHz and band noise ("speech") in 3-6 kHz.
inline std::vector<SynthClass> default_synth_classes() {
  return {{"music", SourceKind::kHarmonicTone, 200.0, 400.0, 3}, {"speech", SourceKind::kBandNoise, 3000.0, 6000.0, 0}};
}

struct SynthConfig {
  double clip_duration = 8.0;
  int sample_rate = 16000;
  std::vector<SynthClass> classes = default_synth_classes();
  std::size_t min_events = 1;
  std::size_t max_events = 4;
  double min_duration = 0.5;
  double max_duration = 3.0;
  bool overlap_allowed = true;
  double fade = 0.02;
  double min_snr_db = 10.0;
  double max_snr_db = 20.0;
  /// RMS of every rendered event; the background sits snr dB below it.
  double event_rms = 0.1;
  /// Same-class events keep at least this much silence between them.
  double min_same_class_gap = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(clip_duration > 0.0) || sample_rate <= 0) throw ArgumentError("synth: bad duration or rate");
    if (classes.empty() && max_events > 0) throw ArgumentError("synth: no classes");
    if (min_events > max_events) throw ArgumentError("synth: min_events > max_events");
    if (!(min_duration > 0.0 && min_duration <= max_duration && max_duration <= clip_duration))
      throw ArgumentError("synth: duration range must lie in (0, clip_duration]");
    if (fade < 0.0 || 2.0 * fade > min_duration) throw ArgumentError("synth: fades longer than the shortest event");
    if (min_snr_db > max_snr_db) throw ArgumentError("synth: bad snr range");
    for (const auto& c : classes) {
      if (!(c.low_hz > 0.0 && c.low_hz < c.high_hz)) throw ArgumentError("synth: bad band for " + c.label);
      if (c.band().second >= sample_rate / 2.0) throw ArgumentError("synth: " + c.label + " band above Nyquist");
      if (c.kind == SourceKind::kHarmonicTone && c.harmonics < 1) throw ArgumentError("synth: harmonics < 1");
    }
  }
  std::vector<std::string> class_names() const {
    std::vector<std::string> out;
    for (const auto& c : classes) out.push_back(c.label);
    return out;
  }
};

struct SynthClip {
  AudioBuffer audio;
  EventList events;
};

namespace detail {

// Draws are built directly from mt19937_64 output so clips are identical
// across standard libraries.
class SynthRng {
 public:
  SynthRng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
  }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t integer(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
  }
  double noise() { return std::sqrt(3.0) * (2.0 * uniform() - 1.0); }  // unit variance

 private:
  std::mt19937_64 engine_;
};

// RBJ constant-peak band-pass.
struct Biquad {
  double b0, b1, b2, a1, a2, z1 = 0.0, z2 = 0.0;
  Biquad(double fc, double q, double fs) {
    const double w = 2.0 * M_PI * fc / fs, alpha = std::sin(w) / (2.0 * q), a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b1 = 0.0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w) / a0;
    a2 = (1.0 - alpha) / a0;
  }
  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

inline double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

inline std::vector<double> render_source(const SynthClass& cls, std::size_t n, int rate, SynthRng& rng) {
  std::vector<double> x(n, 0.0);
  if (cls.kind == SourceKind::kHarmonicTone) {
    const double f0 = rng.uniform(cls.low_hz, cls.high_hz);
    for (int h = 1; h <= cls.harmonics; ++h) {
      const double phase = rng.uniform(0.0, 2.0 * M_PI), w = 2.0 * M_PI * f0 * h / rate;
      for (std::size_t i = 0; i < n; ++i) x[i] += std::sin(w * static_cast<double>(i) + phase) / h;
    }
  } else {
    const double fc = std::sqrt(cls.low_hz * cls.high_hz), q = fc / (cls.high_hz - cls.low_hz);
    std::vector<Biquad> stages(4, Biquad(fc, q, rate));
    // Warm the filters up so the event starts in steady state.
    const std::size_t warm = static_cast<std::size_t>(0.05 * rate);
    for (std::size_t i = 0; i < warm + n; ++i) {
      double v = rng.noise();
      for (auto& s : stages) v = s.step(v);
      if (i >= warm) x[i - warm] = v;
    }
  }
  return x;
}

}  // namespace detail

namespace detail {

inline AudioBuffer render_events(const SynthConfig& cfg, const EventList& events, SynthRng& rng) {
  const int rate = cfg.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.clip_duration * rate));
  std::vector<double> mix(n, 0.0);
  for (const Event& ev : events) {
    const auto cls = std::find_if(cfg.classes.begin(), cfg.classes.end(),
                                  [&](const SynthClass& c) { return c.label == ev.label; });
    if (cls == cfg.classes.end()) throw ArgumentError("synth: unknown class " + ev.label);
    if (!(ev.onset >= 0.0 && ev.onset < ev.offset && ev.offset <= cfg.clip_duration))
      throw ArgumentError("synth: event outside the clip");
    const std::size_t a = static_cast<std::size_t>(std::llround(ev.onset * rate));
    const std::size_t b = std::min(n, static_cast<std::size_t>(std::llround(ev.offset * rate)));
    std::vector<double> src = render_source(*cls, b - a, rate, rng);
    double energy = 0.0;
    for (double v : src) energy += v * v;
    const double gain = energy > 0.0 ? cfg.event_rms / std::sqrt(energy / static_cast<double>(src.size())) : 0.0;
    const double fade_n = cfg.fade * rate;
    for (std::size_t i = 0; i < src.size(); ++i) {
      double env = 1.0;
      if (fade_n > 0.0) {
        env = std::min(env, (static_cast<double>(i) + 0.5) / fade_n);
        env = std::min(env, (static_cast<double>(src.size() - i) - 0.5) / fade_n);
      }
      mix[a + i] += gain * env * src[i];
    }
  }

  if (!events.empty()) {
    const double snr = rng.uniform(cfg.min_snr_db, cfg.max_snr_db);
    const double bg = cfg.event_rms * std::pow(10.0, -snr / 20.0);
    for (double& v : mix) v += bg * rng.noise();
  }
  AudioBuffer audio;
  audio.sample_rate = rate;
  audio.num_channels = 1;
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) audio.samples[i] = static_cast<float>(std::clamp(mix[i], -1.0, 1.0));
  return audio;
}

}  // namespace detail

/// Renders a given event list the way synth_clip does: linear fades inside
/// [onset, offset], every event at event_rms, white background a per-clip SNR
/// below it. No events means no reference level, so the clip is silent.
inline AudioBuffer render_events(const SynthConfig& cfg, const EventList& events, std::uint64_t index) {
  cfg.validate();
  detail::SynthRng rng(cfg.seed, index);
  return detail::render_events(cfg, events, rng);
}

/// Renders clip `index`. Event boundaries are drawn on a 1 ms grid and the
/// returned list is the exact ground truth.
inline SynthClip synth_clip(const SynthConfig& cfg, std::uint64_t index) {
  cfg.validate();
  detail::SynthRng rng(cfg.seed, index);
  SynthClip clip;
  const std::size_t count = cfg.max_events == 0 ? 0 : rng.integer(cfg.min_events, cfg.max_events);
  for (std::size_t e = 0; e < count; ++e) {
    const std::string& label = cfg.classes[rng.integer(0, cfg.classes.size() - 1)].label;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double dur = rng.uniform(cfg.min_duration, cfg.max_duration);
      const double on = detail::round_ms(rng.uniform(0.0, cfg.clip_duration - dur));
      const double off = std::min(cfg.clip_duration, detail::round_ms(on + dur));
      bool ok = off - on >= cfg.min_duration - 1e-9;
      for (const Event& o : clip.events) {
        const double gap = o.label == label ? cfg.min_same_class_gap : 0.0;
        const bool clash = on < o.offset + gap && off > o.onset - gap;
        if (clash && (o.label == label || !cfg.overlap_allowed)) ok = false;
      }
      if (!ok) continue;
      clip.events.push_back({label, on, off});
      break;
    }
  }
  clip.audio = detail::render_events(cfg, clip.events, rng);
  sort_events(clip.events);
  return clip;
}

struct ManifestEntry {
  std::filesystem::path wav;
  std::filesystem::path tsv;
};

inline std::string clip_stem(std::uint64_t index) {
  std::string s = std::to_string(index);
  return "clip_" + std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

/// Writes clips [first_index, first_index + n_clips) as 16-bit WAV + TSV pairs
/// and a manifest.tsv of `wav<TAB>tsv` lines (paths as written).
inline std::vector<ManifestEntry> synth_dataset(const SynthConfig& cfg, std::size_t n_clips,
                                                const std::filesystem::path& out_dir, std::uint64_t first_index = 0) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw DataError("cannot create directory " + out_dir.string());
  std::vector<ManifestEntry> manifest(n_clips);
  parallel_for(n_clips, [&](std::size_t i) {
    SynthClip clip = synth_clip(cfg, first_index + i);
    const std::string stem = clip_stem(first_index + i);
    manifest[i] = {out_dir / (stem + ".wav"), out_dir / (stem + ".tsv")};
    write_wav(manifest[i].wav, clip.audio);
    write_events_tsv(manifest[i].tsv, clip.events);
  });
  std::ofstream os(out_dir / "manifest.tsv");
  if (!os) throw DataError("cannot write manifest in " + out_dir.string());
  for (const auto& m : manifest) os << m.wav.string() << '\t' << m.tsv.string() << '\n';
  if (!os) throw DataError("manifest write failed");
  return manifest;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected wav<TAB>tsv");
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

}  // namespace yoho
