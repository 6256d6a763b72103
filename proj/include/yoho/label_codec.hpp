// yoho/label_codec.hpp

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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "yoho/common.hpp"

namespace yoho {

/// One annotated occurrence of an acoustic class, in seconds.
struct Event {
  std::string label;
  double onset = 0.0;
  double offset = 0.0;

  double duration() const { return offset - onset; }
  bool operator==(const Event&) const = default;
};

using EventList = std::vector<Event>;

/// Sorts by onset, then offset, then label.
inline void sort_events(EventList& events) {
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.label < b.label;
  });
}

/// Per-step regression grid: for every step and class a (presence, start,
/// stop) triplet, start/stop normalized to the step. Flattened layout is
/// step-major, then class (in class-list order), then triplet position, which
/// is the network's output neuron order.
struct YohoGrid {
  std::vector<std::string> classes;
  std::size_t steps = 0;
  double step_duration = 0.0;
  std::vector<double> values;

  YohoGrid() = default;
  YohoGrid(std::vector<std::string> cls, std::size_t n_steps, double step_dur)
      : classes(std::move(cls)), steps(n_steps), step_duration(step_dur), values(n_steps * classes.size() * 3, 0.0) {}

  std::size_t n_classes() const { return classes.size(); }
  std::size_t width() const { return 3 * classes.size(); }
  double& at(std::size_t step, std::size_t cls, std::size_t j) { return values[(step * classes.size() + cls) * 3 + j]; }
  double at(std::size_t step, std::size_t cls, std::size_t j) const {
    return values[(step * classes.size() + cls) * 3 + j];
  }
  double presence(std::size_t s, std::size_t c) const { return at(s, c, 0); }
  double start(std::size_t s, std::size_t c) const { return at(s, c, 1); }
  double stop(std::size_t s, std::size_t c) const { return at(s, c, 2); }

  /// Network-layout copy (steps x 3*classes).
  template <typename T = double>
  std::vector<T> flatten() const {
    return std::vector<T>(values.begin(), values.end());
  }

  template <typename T>
  static YohoGrid unflatten(std::span<const T> flat, std::vector<std::string> cls, double step_dur) {
    const std::size_t w = 3 * cls.size();
    if (w == 0 || flat.size() % w != 0) throw ShapeError("unflatten: size is not a multiple of 3*classes");
    YohoGrid g(std::move(cls), flat.size() / w, step_dur);
    std::copy(flat.begin(), flat.end(), g.values.begin());
    return g;
  }
};

inline std::size_t class_index(const std::vector<std::string>& classes, const std::string& name) {
  auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end()) throw DataError("unknown class '" + name + "'");
  return static_cast<std::size_t>(it - classes.begin());
}

/// Events -> grid over n_steps spans [k*d, (k+1)*d), d = clip_duration / n_steps.
///
/// A class is present in a step iff one of its events overlaps the span with
/// nonzero length. Two events of one class inside the same step share a single
/// triplet: the step keeps the earliest start and the latest stop.
inline YohoGrid encode(const EventList& events, double clip_duration, std::size_t n_steps,
                       const std::vector<std::string>& classes) {
  if (n_steps == 0 || !(clip_duration > 0.0)) throw ArgumentError("encode: need n_steps > 0 and positive duration");
  const double d = clip_duration / static_cast<double>(n_steps);
  YohoGrid grid(classes, n_steps, d);
  constexpr double tol = 1e-9;
  for (const Event& e : events) {
    const std::size_t c = class_index(classes, e.label);
    if (e.onset < -tol || e.offset > clip_duration + tol || !(e.onset < e.offset))
      throw DataError("encode: event " + e.label + " [" + std::to_string(e.onset) + ", " + std::to_string(e.offset) +
                      "] outside clip of " + std::to_string(clip_duration) + " s");
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double lo = k * d, hi = (k + 1) * d;
      if (!(e.onset < hi && e.offset > lo)) continue;
      const double y2 = std::max(0.0, (e.onset - lo) / d);
      const double y3 = std::min(1.0, (e.offset - lo) / d);
      if (grid.at(k, c, 0) == 1.0) {
        grid.at(k, c, 1) = std::min(grid.at(k, c, 1), y2);
        grid.at(k, c, 2) = std::max(grid.at(k, c, 2), y3);
      } else {
        grid.at(k, c, 0) = 1.0;
        grid.at(k, c, 1) = y2;
        grid.at(k, c, 2) = y3;
      }
    }
  }
  return grid;
}

/// Frame-level targets for the frame-classification head: frames x classes,
/// row-major. Frame f covers [f*hop, (f+1)*hop) and is active for a class when
/// one of its events contains the frame midpoint.
inline std::vector<float> frame_targets(const EventList& events, std::size_t n_frames, double hop,
                                        const std::vector<std::string>& classes) {
  if (!(hop > 0.0)) throw ArgumentError("frame_targets: hop must be positive");
  std::vector<float> out(n_frames * classes.size(), 0.0f);
  for (const Event& e : events) {
    const std::size_t c = class_index(classes, e.label);
    for (std::size_t f = 0; f < n_frames; ++f) {
      const double mid = (static_cast<double>(f) + 0.5) * hop;
      if (mid >= e.onset && mid < e.offset) out[f * classes.size() + c] = 1.0f;
    }
  }
  return out;
}

inline constexpr double kDefaultPresenceThreshold = 0.5;
inline constexpr double kDefaultMergeEpsilon = 1e-4;

/// Merges same-label events whose gap is <= epsilon; input order is free,
/// output is sorted.
inline EventList merge_touching(EventList events, double epsilon) {
  sort_events(events);
  EventList out;
  for (const Event& e : events) {
    auto it = std::find_if(out.rbegin(), out.rend(), [&](const Event& o) { return o.label == e.label; });
    if (it != out.rend() && e.onset - it->offset <= epsilon) {
      it->offset = std::max(it->offset, e.offset);
    } else {
      out.push_back(e);
    }
  }
  sort_events(out);
  return out;
}

/// Grid -> events. Steps with presence >= threshold emit [(k+y2)d, (k+y3)d];
/// touching fragments of one class (gap <= merge_epsilon) are joined.
inline EventList decode(const YohoGrid& grid, double threshold = kDefaultPresenceThreshold,
                        double merge_epsilon = kDefaultMergeEpsilon) {
  EventList fragments;
  const double d = grid.step_duration;
  for (std::size_t c = 0; c < grid.n_classes(); ++c) {
    for (std::size_t k = 0; k < grid.steps; ++k) {
      if (grid.presence(k, c) < threshold) continue;
      double a = std::clamp(grid.start(k, c), 0.0, 1.0), b = std::clamp(grid.stop(k, c), 0.0, 1.0);
      if (b < a) std::swap(a, b);
      if (b <= a) continue;
      fragments.push_back({grid.classes[c], (k + a) * d, (k + b) * d});
    }
  }
  return merge_touching(std::move(fragments), merge_epsilon);
}

// Annotation TSV: onset<TAB>offset<TAB>label, one event per line.

inline EventList read_events_tsv(std::istream& is, const std::string& source = "<stream>") {
  EventList out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string on, off, label;
    if (!std::getline(ls, on, '\t') || !std::getline(ls, off, '\t') || !std::getline(ls, label))
      throw DataError(source + ":" + std::to_string(lineno) + ": expected onset<TAB>offset<TAB>label");
    Event e;
    try {
      e.onset = std::stod(on);
      e.offset = std::stod(off);
    } catch (const std::exception&) {
      throw DataError(source + ":" + std::to_string(lineno) + ": bad number");
    }
    e.label = label;
    if (!(e.offset >= e.onset)) throw DataError(source + ":" + std::to_string(lineno) + ": offset before onset");
    out.push_back(std::move(e));
  }
  return out;
}

inline EventList read_events_tsv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  return read_events_tsv(is, path.string());
}

inline void write_events_tsv(std::ostream& os, const EventList& events) {
  os << std::fixed << std::setprecision(6);
  for (const Event& e : events) os << e.onset << '\t' << e.offset << '\t' << e.label << '\n';
}

inline void write_events_tsv(const std::filesystem::path& path, const EventList& events) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  write_events_tsv(os, events);
}

}  // namespace yoho
