// yoho/postprocess.hpp

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

#include <map>
#include <optional>
#include <span>
#include <string>

#include "yoho/label_codec.hpp"

namespace yoho {

struct ClassSmoothing {
  double min_gap = 0.0;
  std::optional<double> min_duration;
};

/// Threshold-dependent smoothing rules, per class with a fallback.
struct SmoothingConfig {
  std::map<std::string, ClassSmoothing> per_class;
  ClassSmoothing fallback;

  const ClassSmoothing& rule(const std::string& label) const {
    auto it = per_class.find(label);
    return it == per_class.end() ? fallback : it->second;
  }
};

/// Music gap 0.8 s / min 3.4 s, speech gap 0.8 s / min 0.8 s.
inline SmoothingConfig music_speech_smoothing() {
  SmoothingConfig c;
  c.per_class["music"] = {0.8, 3.4};
  c.per_class["speech"] = {0.8, 0.8};
  c.fallback = {0.8, std::nullopt};
  return c;
}

/// Gap 1.0 s for every class, no minimum duration.
inline SmoothingConfig environmental_smoothing() {
  SmoothingConfig c;
  c.fallback = {1.0, std::nullopt};
  return c;
}

/// Merge same-class events separated by less than min_gap, then drop events
/// shorter than min_duration. Gaps exactly equal to min_gap are kept apart.
inline EventList smooth(const EventList& events, const SmoothingConfig& config) {
  EventList sorted = events;
  sort_events(sorted);
  EventList merged;
  for (const Event& e : sorted) {
    auto it = std::find_if(merged.rbegin(), merged.rend(), [&](const Event& o) { return o.label == e.label; });
    if (it != merged.rend() && e.onset - it->offset < config.rule(e.label).min_gap) {
      it->offset = std::max(it->offset, e.offset);
    } else {
      merged.push_back(e);
    }
  }
  EventList out;
  for (const Event& e : merged) {
    const auto& min_dur = config.rule(e.label).min_duration;
    if (min_dur && e.duration() < *min_dur) continue;
    out.push_back(e);
  }
  sort_events(out);
  return out;
}

/// Frame-classification output (frames x classes probabilities, row-major) to
/// events: runs of frames at or above threshold become [first*hop, (last+1)*hop].
template <typename T>
EventList frames_to_events(std::span<const T> probs, std::size_t n_frames, const std::vector<std::string>& classes,
                           double frame_hop, double threshold = kDefaultPresenceThreshold) {
  const std::size_t n = classes.size();
  if (probs.size() != n_frames * n) throw ShapeError("frames_to_events: size mismatch");
  EventList out;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t t = 0;
    while (t < n_frames) {
      if (probs[t * n + c] < threshold) {
        ++t;
        continue;
      }
      std::size_t start = t;
      while (t < n_frames && probs[t * n + c] >= threshold) ++t;
      out.push_back({classes[c], start * frame_hop, t * frame_hop});
    }
  }
  sort_events(out);
  return out;
}

}  // namespace yoho
