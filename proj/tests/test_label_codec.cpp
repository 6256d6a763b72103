// tests/test_label_codec.cpp

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
#include <sstream>

#include "label_example.hpp"
#include "test_util.hpp"
#include "yoho/label_codec.hpp"

namespace yoho {
namespace {

TEST(Encode, ExampleGridPresence) {
  YohoGrid g = encode(test::example_events(), 8.0, 26, test::example_classes());
  ASSERT_EQ(g.steps, 26u);
  for (std::size_t k = 0; k < 26; ++k)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(g.presence(k, c), test::kExamplePresence[k][c]) << "step " << k;
}

TEST(Encode, ExampleGridFractions) {
  YohoGrid g = encode(test::example_events(), 8.0, 26, test::example_classes());
  for (const auto& v : test::kExampleFractions) {
    const std::size_t c = class_index(g.classes, v.cls);
    EXPECT_NEAR(g.at(v.step, c, v.slot), v.value, 5e-3) << v.cls << " step " << v.step;
  }
  // Exact values: 0.2 / (8/26) = 0.65, 4.3 * 26/8 - 13 = 0.975.
  EXPECT_NEAR(g.start(0, 1), 0.65, 1e-12);
  EXPECT_NEAR(g.stop(13, 1), 0.975, 1e-12);
  EXPECT_NEAR(g.start(11, 0), 0.7, 1e-12);
  EXPECT_NEAR(g.stop(19, 0), 0.5, 1e-12);
  // Interior steps are whole.
  EXPECT_EQ(g.start(5, 1), 0.0);
  EXPECT_EQ(g.stop(5, 1), 1.0);
  EXPECT_EQ(g.stop(0, 1), 1.0);
}

TEST(Encode, EmptyListHasNoPresence) {
  YohoGrid g = encode({}, 8.0, 26, {"speech", "music"});
  for (std::size_t k = 0; k < g.steps; ++k)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(g.presence(k, c), 0.0);
}

TEST(Encode, Errors) {
  EXPECT_THROW(encode({{"music", -0.5, 1.0}}, 8.0, 26, {"music"}), DataError);
  EXPECT_THROW(encode({{"music", 7.0, 8.5}}, 8.0, 26, {"music"}), DataError);
  EXPECT_THROW(encode({{"dog", 1.0, 2.0}}, 8.0, 26, {"music"}), DataError);
  EXPECT_THROW(encode({}, 8.0, 0, {"music"}), ArgumentError);
}

TEST(Encode, SameClassCollisionSharesStep) {
  // Two music events inside step 0 of a 1 s / 2 step grid.
  YohoGrid g = encode({{"m", 0.05, 0.1}, {"m", 0.3, 0.4}}, 1.0, 2, {"m"});
  EXPECT_EQ(g.presence(0, 0), 1.0);
  EXPECT_NEAR(g.start(0, 0), 0.1, 1e-12);
  EXPECT_NEAR(g.stop(0, 0), 0.8, 1e-12);
  EXPECT_EQ(g.presence(1, 0), 0.0);
}

TEST(Encode, BoundaryTouchIsNotPresence) {
  // Ends exactly where step 1 starts: zero-length overlap.
  YohoGrid g = encode({{"m", 0.0, 0.5}}, 1.0, 2, {"m"});
  EXPECT_EQ(g.presence(0, 0), 1.0);
  EXPECT_EQ(g.presence(1, 0), 0.0);
}

// Presence against an intersection-length oracle.
TEST(Encode, PresenceMatchesIntersectionOracle) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> classes = {"a", "b", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    const double clip = test::uniform(rng, 1.0, 12.0);
    const std::size_t steps = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    const double d = clip / steps;
    EventList ev = test::random_events(rng, classes, clip, 4, d);
    YohoGrid g = encode(ev, clip, steps, classes);
    for (std::size_t k = 0; k < steps; ++k)
      for (std::size_t c = 0; c < classes.size(); ++c) {
        bool hit = false;
        for (const Event& e : ev)
          if (e.label == classes[c] && std::min(e.offset, (k + 1) * d) - std::max(e.onset, k * d) > 0) hit = true;
        ASSERT_EQ(g.presence(k, c), hit ? 1.0 : 0.0) << "trial " << trial << " step " << k;
      }
  }
}

TEST(Decode, ExampleRoundTrip) {
  EventList out = decode(encode(test::example_events(), 8.0, 26, test::example_classes()));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].label, "music");
  EXPECT_NEAR(out[0].onset, 0.2, 1e-6);
  EXPECT_NEAR(out[0].offset, 4.3, 1e-6);
  EXPECT_EQ(out[1].label, "speech");
  EXPECT_NEAR(out[1].onset, 3.6, 1e-6);
  EXPECT_NEAR(out[1].offset, 6.0, 1e-6);
}

TEST(Decode, BelowThresholdIsEmpty) {
  YohoGrid g({"m", "s"}, 26, 8.0 / 26);
  for (std::size_t k = 0; k < 26; ++k) {
    g.at(k, 0, 0) = 0.49;
    g.at(k, 1, 0) = 0.1;
    g.at(k, 0, 2) = g.at(k, 1, 2) = 1.0;
  }
  EXPECT_TRUE(decode(g, 0.5).empty());
}

TEST(Decode, SingleStepArithmetic) {
  YohoGrid g({"m"}, 26, 8.0 / 26);
  g.at(0, 0, 0) = 1.0;
  g.at(0, 0, 1) = 0.25;
  g.at(0, 0, 2) = 0.75;
  EventList out = decode(g);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].onset, 0.0769, 1e-4);
  EXPECT_NEAR(out[0].offset, 0.2308, 1e-4);
}

TEST(Decode, GapsLargerThanEpsilonStaySplit) {
  YohoGrid g({"m"}, 2, 1.0);
  g.at(0, 0, 0) = g.at(1, 0, 0) = 1.0;
  g.at(0, 0, 2) = 0.9;
  g.at(1, 0, 2) = 1.0;
  EXPECT_EQ(decode(g).size(), 2u);
  g.at(0, 0, 2) = 1.0;
  EXPECT_EQ(decode(g).size(), 1u);
}

TEST(Codec, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> classes = {"speech", "music", "noise"};
  for (int trial = 0; trial < 1000; ++trial) {
    const double clip = test::uniform(rng, 2.0, 10.0);
    const std::size_t steps = std::uniform_int_distribution<std::size_t>(4, 32)(rng);
    EventList ev = test::random_events(rng, classes, clip, 4, clip / steps);
    EventList back = decode(encode(ev, clip, steps, classes));
    ASSERT_EQ(back.size(), ev.size()) << "trial " << trial;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      EXPECT_EQ(back[i].label, ev[i].label);
      EXPECT_NEAR(back[i].onset, ev[i].onset, 1e-6);
      EXPECT_NEAR(back[i].offset, ev[i].offset, 1e-6);
    }
  }
}

TEST(Codec, ReencodeIsIdempotent) {
  std::mt19937_64 rng(12);
  const std::vector<std::string> classes = {"a", "b"};
  for (int trial = 0; trial < 200; ++trial) {
    EventList ev = test::random_events(rng, classes, 8.0, 5, 8.0 / 26);
    YohoGrid g1 = encode(ev, 8.0, 26, classes);
    YohoGrid g2 = encode(decode(g1), 8.0, 26, classes);
    for (std::size_t i = 0; i < g1.values.size(); ++i) ASSERT_NEAR(g1.values[i], g2.values[i], 1e-9);
  }
}

TEST(Grid, FlattenLayoutIsStepClassTriplet) {
  YohoGrid g({"speech", "music"}, 3, 1.0);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<double>(i);
  auto flat = g.flatten<float>();
  // Neuron index = step * 3 * classes + class * 3 + slot.
  EXPECT_EQ(flat[1 * 6 + 1 * 3 + 2], static_cast<float>(g.at(1, 1, 2)));
  YohoGrid back = YohoGrid::unflatten<float>(flat, g.classes, 1.0);
  EXPECT_EQ(back.values, g.values);
  EXPECT_THROW(YohoGrid::unflatten<float>(std::span<const float>(flat.data(), 5), g.classes, 1.0), ShapeError);
}

TEST(Tsv, RoundTripAndErrors) {
  EventList ev = {{"music", 0.2, 4.3}, {"speech", 3.6, 6.0}};
  std::stringstream ss;
  write_events_tsv(ss, ev);
  EXPECT_EQ(ss.str(), "0.200000\t4.300000\tmusic\n3.600000\t6.000000\tspeech\n");
  EXPECT_EQ(read_events_tsv(ss), ev);

  std::istringstream bad1("0.1 0.2 music\n");
  EXPECT_THROW(read_events_tsv(bad1), DataError);
  std::istringstream bad2("x\t0.2\tmusic\n");
  EXPECT_THROW(read_events_tsv(bad2), DataError);
  std::istringstream bad3("0.5\t0.2\tmusic\n");
  EXPECT_THROW(read_events_tsv(bad3), DataError);
  std::istringstream labels_with_spaces("0\t1\tpeople speaking\r\n\n");
  EXPECT_EQ(read_events_tsv(labels_with_spaces)[0].label, "people speaking");
}

TEST(FrameTargets, MidpointRule) {
  const std::vector<std::string> cls = {"speech", "music"};
  auto t = frame_targets({{"music", 0.02, 0.051}, {"speech", 0.0, 0.005}}, 8, 0.01, cls);
  ASSERT_EQ(t.size(), 16u);
  // speech [0, 0.005): frame 0 midpoint 0.005 is outside the half-open event.
  for (std::size_t f = 0; f < 8; ++f) EXPECT_EQ(t[f * 2], 0.0f) << f;
  // music [0.02, 0.051): midpoints 0.025, 0.035, 0.045 -> frames 2..4.
  for (std::size_t f = 0; f < 8; ++f) EXPECT_EQ(t[f * 2 + 1], (f >= 2 && f <= 4) ? 1.0f : 0.0f) << f;
  EXPECT_THROW(frame_targets({{"dog", 0.0, 1.0}}, 8, 0.01, cls), DataError);
  EXPECT_THROW(frame_targets({}, 8, 0.0, cls), ArgumentError);
}

}  // namespace
}  // namespace yoho
