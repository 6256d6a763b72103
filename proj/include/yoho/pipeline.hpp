// yoho/pipeline.hpp

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

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "yoho/audio_io.hpp"
#include "yoho/features.hpp"
#include "yoho/label_codec.hpp"
#include "yoho/metrics.hpp"
#include "yoho/network.hpp"
#include "yoho/postprocess.hpp"
#include "yoho/train.hpp"

namespace yoho {

/// Everything a task fixes: front end, clip window, smoothing, classes and
/// the evaluation segment size.
struct PipelineProfile {
  std::string name;
  FeatureConfig features;
  double clip_window = 8.0;
  SmoothingConfig smoothing;
  std::vector<std::string> classes;
  double segment_size = 0.01;

  std::size_t window_samples() const {
    return static_cast<std::size_t>(std::llround(clip_window * features.sample_rate));
  }
  std::size_t window_frames() const { return num_frames(window_samples(), features.hop_samples()); }
};

inline PipelineProfile music_speech_profile() {
  return {"music-speech", music_speech_features(), 8.0, music_speech_smoothing(), {"speech", "music"}, 0.01};
}

/// 2.56 s windows with the six street classes, or 10 s windows with the ten
/// urban classes.
inline PipelineProfile environmental_profile(double clip_window = 2.56) {
  PipelineProfile p{"environmental", environmental_features(), clip_window, environmental_smoothing(), {}, 1.0};
  if (std::abs(clip_window - 10.0) < 1e-9)
    p.classes = {"air_conditioner", "car_horn", "children_playing", "dog_bark", "drilling",
                 "engine_idling", "gun_shot", "jackhammer", "siren", "street_music"};
  else if (std::abs(clip_window - 2.56) < 1e-9)
    p.classes = {"brakes_squeaking", "car", "children", "large_vehicle", "people_speaking", "people_walking"};
  else
    throw ArgumentError("environmental profile: clip window must be 2.56 or 10 s");
  return p;
}

inline PipelineProfile profile_by_name(const std::string& name, std::optional<double> clip_window = std::nullopt) {
  if (name == "music-speech") {
    if (clip_window && std::abs(*clip_window - 8.0) > 1e-9) throw ArgumentError("music-speech uses 8 s windows");
    return music_speech_profile();
  }
  if (name == "environmental") return environmental_profile(clip_window.value_or(2.56));
  throw ArgumentError("unknown profile '" + name + "' (music-speech, environmental)");
}

/// Downmix, then resample to the profile rate.
inline AudioBuffer prepare_audio(const AudioBuffer& raw, const PipelineProfile& p) {
  return resample(downmix_to_mono(raw), p.features.sample_rate);
}

/// Crops or pads (with the silence value ln(log_floor)) to exactly `frames` rows.
inline Matrix<float> fit_frames(const Matrix<float>& m, std::size_t frames, double log_floor) {
  Matrix<float> out(frames, m.cols, static_cast<float>(std::log(log_floor)));
  const std::size_t n = std::min(frames, m.rows);
  std::copy(m.data.begin(), m.data.begin() + static_cast<std::ptrdiff_t>(n * m.cols), out.data.begin());
  return out;
}

/// Training pair for one clip-window: features fitted to the network input and
/// events encoded on the network's output steps.
inline Example make_example(const MelSpectrogram& spec, const EventList& events, const Network<float>& net,
                            const PipelineProfile& p, const std::vector<std::string>& classes) {
  const Shape3 in = net.input_shape();
  if (spec.n_mels() != in.w) throw ModelMismatchError("features have " + std::to_string(spec.n_mels()) + " mels");
  const auto [steps, width] = net.output_shape();
  const bool frame = net.architecture().kind == ModelKind::kFrameCnn;
  if (width != (frame ? 1 : 3) * classes.size()) throw ModelMismatchError("network head does not match the class list");
  EventList clipped;
  for (const Event& e : events) {
    const double on = std::max(0.0, e.onset), off = std::min(p.clip_window, e.offset);
    if (off > on) clipped.push_back({e.label, on, off});
  }
  Example ex;
  ex.features = fit_frames(spec.values, in.h, spec.config.log_floor).data;
  ex.target = frame ? frame_targets(clipped, steps, p.features.hop, classes)
                    : encode(clipped, p.clip_window, steps, classes).flatten<float>();
  return ex;
}

/// One training example per window of a long clip; events are shifted into
/// each window's time base and clipped to it.
inline std::vector<Example> window_examples(const std::vector<MelSpectrogram>& windows, const EventList& events,
                                            const Network<float>& net, const PipelineProfile& p,
                                            const std::vector<std::string>& classes) {
  std::vector<Example> out;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const double shift = static_cast<double>(w) * p.clip_window;
    EventList local;
    for (const Event& e : events) local.push_back({e.label, e.onset - shift, e.offset - shift});
    out.push_back(make_example(windows[w], local, net, p, classes));
  }
  return out;
}

/// Joins per-window event lists: shift by window offset, clip to the audio,
/// join fragments that touch across seams, then smooth globally.
inline EventList merge_window_predictions(const std::vector<EventList>& windows, double window_sec,
                                          double total_duration, const SmoothingConfig& smoothing,
                                          double merge_epsilon = kDefaultMergeEpsilon) {
  EventList all;
  for (std::size_t w = 0; w < windows.size(); ++w)
    for (const Event& e : windows[w]) {
      const double on = e.onset + w * window_sec, off = std::min(total_duration, e.offset + w * window_sec);
      if (off > on) all.push_back({e.label, on, off});
    }
  return smooth(merge_touching(std::move(all), merge_epsilon), smoothing);
}

/// Cuts whole-file features into non-overlapping windows of the profile
/// length: window w holds frames [w*S, w*S + F) with S = window_samples / hop
/// and F = S + 1, so its first frame is centred on w * clip_window. Frames past
/// the end of the file take the silence value ln(log_floor).
inline std::vector<MelSpectrogram> slice_windows(const MelSpectrogram& spec, const PipelineProfile& p) {
  if (!(spec.config == p.features) || spec.n_mels() != static_cast<std::size_t>(p.features.n_mels))
    throw ModelMismatchError("features were not extracted with the " + p.name + " front end");
  const std::size_t frames = p.window_frames(), stride = frames - 1, mels = spec.n_mels();
  const std::size_t total = spec.frames();
  const std::size_t n = std::max<std::size_t>(1, (total - 1 + stride - 1) / stride);
  const float silence = static_cast<float>(std::log(spec.config.log_floor));
  std::vector<MelSpectrogram> out;
  for (std::size_t w = 0; w < n; ++w) {
    MelSpectrogram m{Matrix<float>(frames, mels, silence), spec.config};
    const std::size_t lo = w * stride, hi = std::min(total, lo + frames);
    if (hi > lo)
      std::copy(spec.values.data.begin() + static_cast<std::ptrdiff_t>(lo * mels),
                spec.values.data.begin() + static_cast<std::ptrdiff_t>(hi * mels), m.values.data.begin());
    out.push_back(std::move(m));
  }
  return out;
}

/// Window features of mono audio at the profile rate (see slice_windows).
inline std::vector<MelSpectrogram> window_features(const AudioBuffer& audio, const PipelineProfile& p) {
  if (audio.num_channels != 1 || audio.sample_rate != p.features.sample_rate)
    throw ArgumentError("window_features: prepare_audio first");
  return slice_windows(log_mel(audio, p.features), p);
}

/// Forward pass over fitted window features in inference mode; returns the
/// flattened output of every window.
inline std::vector<std::vector<float>> run_windows(Network<float>& net, const std::vector<MelSpectrogram>& windows,
                                                   std::size_t batch_size = 32) {
  const Shape3 in = net.input_shape();
  const auto [steps, width] = net.output_shape();
  std::vector<std::vector<float>> out;
  for (std::size_t lo = 0; lo < windows.size(); lo += batch_size) {
    const std::size_t b = std::min(batch_size, windows.size() - lo);
    Tensor<float> batch({b, in.h, in.w});
    for (std::size_t i = 0; i < b; ++i) {
      const auto& spec = windows[lo + i];
      if (spec.n_mels() != in.w) throw ModelMismatchError("window features do not match the network input");
      Matrix<float> fitted = fit_frames(spec.values, in.h, spec.config.log_floor);
      std::copy(fitted.data.begin(), fitted.data.end(), batch.values.begin() + static_cast<std::ptrdiff_t>(i * in.h * in.w));
    }
    Tensor<float> y = net.forward(std::move(batch), Mode::kInference);
    for (std::size_t i = 0; i < b; ++i) {
      auto first = y.values.begin() + static_cast<std::ptrdiff_t>(i * steps * width);
      out.emplace_back(first, first + static_cast<std::ptrdiff_t>(steps * width));
    }
  }
  return out;
}

/// Checks that a YOHO checkpoint can run under a profile.
inline void check_model_profile(const Network<float>& net, const PipelineProfile& p) {
  const Shape3 in = net.input_shape();
  if (in.h != p.window_frames() || in.w != static_cast<std::size_t>(p.features.n_mels))
    throw ModelMismatchError("model input " + std::to_string(in.h) + " x " + std::to_string(in.w) + " does not fit the " +
                             p.name + " profile (" + std::to_string(p.window_frames()) + " x " +
                             std::to_string(p.features.n_mels) + ")");
  const auto& arch = net.architecture();
  if (!arch.classes.empty() && arch.classes.size() != arch.n_classes)
    throw ModelMismatchError("model class list is inconsistent");
}

/// Classes a model predicts: its stored list, else the profile's.
inline std::vector<std::string> model_classes(const Network<float>& net, const PipelineProfile& p) {
  const auto& arch = net.architecture();
  if (!arch.classes.empty()) return arch.classes;
  if (p.classes.size() != arch.n_classes) throw ModelMismatchError("model has no class list and profile differs");
  return p.classes;
}

/// Long-file inference on mono audio at the profile rate (either head).
inline EventList predict_events(Network<float>& net, const AudioBuffer& audio, const PipelineProfile& p,
                                double threshold = kDefaultPresenceThreshold, bool apply_smoothing = true) {
  check_model_profile(net, p);
  const auto classes = model_classes(net, p);
  const auto [steps, width] = net.output_shape();
  const auto outputs = run_windows(net, window_features(audio, p));
  const bool frame = net.architecture().kind == ModelKind::kFrameCnn;
  std::vector<EventList> per_window;
  for (const auto& flat : outputs)
    per_window.push_back(
        frame ? frames_to_events<float>(flat, steps, classes, p.features.hop, threshold)
              : decode(YohoGrid::unflatten<float>(flat, classes, p.clip_window / static_cast<double>(steps)), threshold));
  SmoothingConfig none;
  return merge_window_predictions(per_window, p.clip_window, audio.duration(), apply_smoothing ? p.smoothing : none);
}

struct FileEvaluation {
  std::string name;
  SegmentCounts counts;
};

struct Evaluation {
  SegmentCounts total;
  MetricsReport report;
  std::vector<FileEvaluation> files;
  std::vector<std::string> unmatched;
};

/// Micro-averaged evaluation of matched .tsv files (same file name in both
/// directories). Counts are summed over files and reduced once. When a WAV with
/// the same stem sits next to the reference TSV its length is the file
/// duration; otherwise the latest offset in either list is used.
inline Evaluation evaluate_dirs(const std::filesystem::path& ref_dir, const std::filesystem::path& est_dir,
                                double segment_size, const std::vector<std::string>& classes = {}) {
  namespace fs = std::filesystem;
  auto list = [](const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::map<std::string, fs::path> m;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".tsv" && e.path().filename() != "manifest.tsv")
        m[e.path().filename().string()] = e.path();
    return m;
  };
  const auto refs = list(ref_dir), ests = list(est_dir);
  Evaluation ev;
  for (const auto& [name, path] : refs)
    if (!ests.count(name)) ev.unmatched.push_back("missing estimate: " + name);
  for (const auto& [name, path] : ests)
    if (!refs.count(name)) ev.unmatched.push_back("missing reference: " + name);
  for (const auto& [name, path] : refs) {
    auto it = ests.find(name);
    if (it == ests.end()) continue;
    const EventList ref = read_events_tsv(path), est = read_events_tsv(it->second);
    std::optional<double> duration;
    const fs::path wav = fs::path(path).replace_extension(".wav");
    if (fs::exists(wav)) duration = load_wav(wav).duration();
    std::optional<std::vector<std::string>> cls;
    if (!classes.empty()) cls = classes;
    FileEvaluation fe{name, count_segments(ref, est, segment_size, duration, cls)};
    ev.total.add(fe.counts);
    ev.files.push_back(std::move(fe));
  }
  ev.report = make_report(ev.total, segment_size, static_cast<std::int64_t>(ev.files.size()));
  return ev;
}

struct BenchTimes {
  double predict_seconds = 0.0;
  double smooth_seconds = 0.0;
  std::size_t output_neurons = 0;  // per window
  std::size_t parameters = 0;
  double total() const { return predict_seconds + smooth_seconds; }
};

struct BenchReport {
  double audio_hours = 0.0;
  std::size_t windows = 0;
  BenchTimes yoho, frame;
};

/// Times both heads over a corpus of mono audio at the profile rate. The
/// prediction phase is the forward pass; the smoothing phase turns outputs into
/// events (decode, or frame thresholding) and smooths them. Features are
/// computed up front and not timed. Runs on a single thread.
inline BenchReport bench(Network<float>& yoho_net, Network<float>& frame_net, const std::vector<AudioBuffer>& corpus,
                         const PipelineProfile& p, double threshold = kDefaultPresenceThreshold,
                         std::size_t batch_size = 32) {
  ScopedThreadCount pin(1);
  check_model_profile(yoho_net, p);
  if (frame_net.input_shape() != yoho_net.input_shape()) throw ModelMismatchError("bench: models differ in input shape");
  const auto classes = model_classes(yoho_net, p);
  const auto [ysteps, ywidth] = yoho_net.output_shape();
  const auto [fsteps, fwidth] = frame_net.output_shape();
  if (fwidth != classes.size()) throw ModelMismatchError("bench: frame model class count differs");

  std::vector<std::vector<MelSpectrogram>> feats;
  BenchReport r;
  for (const auto& a : corpus) {
    feats.push_back(window_features(a, p));
    r.windows += feats.back().size();
    r.audio_hours += a.duration() / 3600.0;
  }
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };
  const double hop = p.features.hop;

  auto run = [&](Network<float>& net, BenchTimes& t, bool frame_head) {
    t.parameters = net.parameter_count();
    t.output_neurons = frame_head ? fsteps * fwidth : ysteps * ywidth;
    for (std::size_t f = 0; f < corpus.size(); ++f) {
      auto t0 = clock::now();
      auto outputs = run_windows(net, feats[f], batch_size);
      auto t1 = clock::now();
      std::vector<EventList> per_window;
      for (const auto& flat : outputs) {
        if (frame_head)
          per_window.push_back(frames_to_events<float>(flat, fsteps, classes, hop, threshold));
        else
          per_window.push_back(
              decode(YohoGrid::unflatten<float>(flat, classes, p.clip_window / static_cast<double>(ysteps)), threshold));
      }
      merge_window_predictions(per_window, p.clip_window, corpus[f].duration(), p.smoothing);
      auto t2 = clock::now();
      t.predict_seconds += secs(t1 - t0);
      t.smooth_seconds += secs(t2 - t1);
    }
  };
  run(yoho_net, r.yoho, false);
  run(frame_net, r.frame, true);
  return r;
}

/// Per-hour figures and neuron counts as key=value lines.
inline std::string bench_to_text(const BenchReport& r) {
  std::ostringstream os;
  const double h = r.audio_hours > 0 ? r.audio_hours : 1.0;
  os << std::fixed << std::setprecision(4);
  os << "audio_hours=" << r.audio_hours << "\nwindows=" << r.windows << "\n";
  for (const auto& [name, t] : {std::pair<const char*, const BenchTimes&>{"yoho", r.yoho}, {"frame_cnn", r.frame}}) {
    os << name << ".predict_seconds_per_hour=" << t.predict_seconds / h << "\n";
    os << name << ".smooth_seconds_per_hour=" << t.smooth_seconds / h << "\n";
    os << name << ".output_neurons=" << t.output_neurons << "\n";
    os << name << ".parameters=" << t.parameters << "\n";
  }
  auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
  os << "predict_speedup=" << ratio(r.frame.predict_seconds, r.yoho.predict_seconds) << "\n";
  os << "smooth_speedup=" << ratio(r.frame.smooth_seconds, r.yoho.smooth_seconds) << "\n";
  os << "total_speedup=" << ratio(r.frame.total(), r.yoho.total()) << "\n";
  return os.str();
}

}  // namespace yoho
