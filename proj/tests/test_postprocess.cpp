// tests/test_postprocess.cpp

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

#include <random>

#include "test_util.hpp"
#include "yoho/postprocess.hpp"

namespace yoho {
namespace {

double covered(const EventList& ev, const std::string& label) {
  // Union length per label on a 1 ms grid (inputs below are ms-aligned).
  std::vector<char> on(20001, 0);
  for (const Event& e : ev)
    if (e.label == label)
      for (long i = std::lround(e.onset * 1000); i < std::lround(e.offset * 1000); ++i) on[i] = 1;
  return std::count(on.begin(), on.end(), 1) / 1000.0;
}

TEST(Smooth, MusicGapBelowThresholdMerges) {
  EventList out = smooth({{"music", 0.0, 2.0}, {"music", 2.5, 6.0}}, music_speech_smoothing());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (Event{"music", 0.0, 6.0}));
}

TEST(Smooth, ShortMusicIsDropped) {
  EXPECT_TRUE(smooth({{"music", 0.0, 3.0}}, music_speech_smoothing()).empty());
  EXPECT_EQ(smooth({{"music", 0.0, 3.4}}, music_speech_smoothing()).size(), 1u);
}

TEST(Smooth, SpeechRules) {
  auto cfg = music_speech_smoothing();
  EXPECT_TRUE(smooth({{"speech", 1.0, 1.7}}, cfg).empty());
  EXPECT_EQ(smooth({{"speech", 1.0, 1.5}, {"speech", 2.0, 2.4}}, cfg), (EventList{{"speech", 1.0, 2.4}}));
}

TEST(Smooth, MergeHappensBeforeDrop) {
  // Two 2 s fragments survive the 3.4 s music minimum only once merged.
  EventList out = smooth({{"music", 0.0, 2.0}, {"music", 2.3, 4.3}}, music_speech_smoothing());
  EXPECT_EQ(out, (EventList{{"music", 0.0, 4.3}}));
}

TEST(Smooth, EqualGapIsNotMerged) {
  SmoothingConfig cfg;
  cfg.fallback = {0.5, std::nullopt};
  EXPECT_EQ(smooth({{"x", 0.0, 1.0}, {"x", 1.5, 2.0}}, cfg).size(), 2u);
}

TEST(Smooth, EnvironmentalKeepsShortAndMergesBelowOneSecond) {
  auto cfg = environmental_smoothing();
  EXPECT_EQ(smooth({{"car", 0.0, 0.2}}, cfg), (EventList{{"car", 0.0, 0.2}}));
  EXPECT_EQ(smooth({{"car", 0.0, 1.0}, {"car", 1.9, 3.0}}, cfg), (EventList{{"car", 0.0, 3.0}}));
  EXPECT_EQ(smooth({{"car", 0.0, 1.0}, {"car", 2.0, 3.0}}, cfg).size(), 2u);
}

TEST(Smooth, ClassesAreIndependent) {
  EventList out = smooth({{"speech", 0.0, 1.0}, {"music", 1.2, 5.0}, {"speech", 1.3, 2.0}}, music_speech_smoothing());
  EXPECT_EQ(out, (EventList{{"speech", 0.0, 2.0}, {"music", 1.2, 5.0}}));
}

TEST(Smooth, RandomListProperties) {
  std::mt19937_64 rng(21);
  const std::vector<std::string> classes = {"speech", "music", "other"};
  auto cfg = music_speech_smoothing();
  for (int trial = 0; trial < 1000; ++trial) {
    EventList in = test::random_ms_events(rng, classes, 20.0, 12);
    EventList once = smooth(in, cfg);
    ASSERT_EQ(smooth(once, cfg), once) << "trial " << trial;

    SmoothingConfig merge_only = cfg;
    for (auto& [k, v] : merge_only.per_class) v.min_duration.reset();
    EventList merged = smooth(in, merge_only);
    for (const auto& c : classes) {
      EXPECT_GE(covered(merged, c) + 1e-9, covered(in, c));
      EXPECT_LE(covered(once, c), covered(merged, c) + 1e-9);
      const auto& rule = cfg.rule(c);
      const Event* prev = nullptr;
      for (const Event& e : once) {
        if (e.label != c) continue;
        if (rule.min_duration) {
          EXPECT_GE(e.duration(), *rule.min_duration);
        }
        if (prev) {
          EXPECT_GE(e.onset, prev->offset);
          EXPECT_GE(e.onset - prev->offset, rule.min_gap);
          EXPECT_GE(e.onset, prev->onset);
        }
        prev = &e;
      }
    }
  }
}

TEST(FramesToEvents, RunsAboveThreshold) {
  // 6 frames x 2 classes.
  std::vector<float> p = {0.9f, 0.1f, 0.8f, 0.1f, 0.2f, 0.6f, 0.7f, 0.6f, 0.1f, 0.1f, 0.5f, 0.1f};
  EventList ev = frames_to_events<float>(p, 6, {"a", "b"}, 0.01);
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_EQ(ev[0].label, "a");
  EXPECT_NEAR(ev[0].offset, 0.02, 1e-12);
  EXPECT_EQ(ev[1].label, "b");
  EXPECT_NEAR(ev[1].onset, 0.02, 1e-12);
  EXPECT_NEAR(ev[1].offset, 0.04, 1e-12);
  EXPECT_NEAR(ev[2].onset, 0.03, 1e-12);
  EXPECT_NEAR(ev[3].onset, 0.05, 1e-12);
  EXPECT_NEAR(ev[3].offset, 0.06, 1e-12);
  EXPECT_THROW(frames_to_events<float>(std::span<const float>(p.data(), 5), 6, {"a", "b"}, 0.01), ShapeError);
}

}  // namespace
}  // namespace yoho
