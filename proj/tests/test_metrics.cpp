// tests/test_metrics.cpp

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

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "yoho/metrics.hpp"

namespace yoho {
namespace {

using test::brute_force_counts;
using Oracle = test::OracleCounts;

TEST(Segmentize, Examples) {
  auto m = segmentize({{"a", 0.0, 1.0}}, 1.0, 3.0, {"a"});
  ASSERT_EQ(m.rows, 3u);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(1, 0), 0);
  EXPECT_EQ(m(2, 0), 0);
  m = segmentize({{"a", 0.999, 1.001}}, 1.0, 3.0, {"a"});
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(1, 0), 1);
  EXPECT_EQ(m(2, 0), 0);
  m = segmentize({{"a", 1.0, 2.0}}, 1.0, 3.0, {"a"});
  EXPECT_EQ(m(0, 0), 0);
  EXPECT_EQ(m(1, 0), 1);
  EXPECT_EQ(m(2, 0), 0);
  EXPECT_THROW(segmentize({}, 0.0, 1.0, {"a"}), ArgumentError);
  EXPECT_EQ(segmentize({}, 1.0, 2.5, {"a"}).rows, 3u);
}

TEST(SegmentF1, PerfectAndEmpty) {
  EventList ref = {{"music", 0.2, 4.3}, {"speech", 3.6, 6.0}};
  for (double s : {0.01, 1.0}) {
    EXPECT_DOUBLE_EQ(segment_f1(ref, ref, s).f_measure, 1.0);
    EXPECT_DOUBLE_EQ(error_rate(ref, ref, s).er, 0.0);
  }
  PRF empty = segment_f1(ref, {}, 0.01);
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(empty.f_measure, 0.0);
  ErrorRate er = error_rate(ref, {}, 0.01);
  EXPECT_DOUBLE_EQ(er.er, 1.0);
  EXPECT_EQ(er.deletions, er.n_ref);
}

TEST(ErrorRate, ComplementaryActivityHandCount) {
  // Reference active in segments 0-3, estimate in 4-9.
  ErrorRate er = error_rate({{"a", 0.0, 4.0}}, {{"a", 4.0, 10.0}}, 1.0, 10.0);
  EXPECT_EQ(er.substitutions, 0);
  EXPECT_EQ(er.deletions, 4);
  EXPECT_EQ(er.insertions, 6);
  EXPECT_EQ(er.n_ref, 4);
  EXPECT_DOUBLE_EQ(er.er, 2.5);
}

TEST(ErrorRate, SubstitutionWhenClassIsSwapped) {
  ErrorRate er = error_rate({{"a", 0.0, 1.0}}, {{"b", 0.0, 1.0}}, 1.0);
  EXPECT_EQ(er.substitutions, 1);
  EXPECT_EQ(er.deletions, 0);
  EXPECT_EQ(er.insertions, 0);
  EXPECT_DOUBLE_EQ(er.er, 1.0);
}

TEST(ErrorRate, NoReferenceCases) {
  EXPECT_EQ(error_rate({}, {}, 1.0, 5.0).er, 0.0);
  EXPECT_TRUE(std::isinf(error_rate({}, {{"a", 0.0, 1.0}}, 1.0).er));
}

TEST(Metrics, MatchBruteForceOracle) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> classes = {"a", "b", "c"};
  const double sizes[] = {0.01, 0.1, 0.25, 1.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const double seg = sizes[trial % 4];
    EventList ref = test::random_ms_events(rng, classes, 10.0, 10);
    EventList est = test::random_ms_events(rng, classes, 10.0, 10);
    const double dur = test::uniform(rng, 0.0, 1.0) < 0.5 ? 10.0 : default_duration(ref, est);
    SegmentCounts sc = count_segments(ref, est, seg, dur, classes);
    Oracle o = brute_force_counts(ref, est, seg, dur, classes);
    ASSERT_EQ(sc.tp, o.tp) << "trial " << trial;
    ASSERT_EQ(sc.fp, o.fp);
    ASSERT_EQ(sc.fn, o.fn);
    ASSERT_EQ(sc.substitutions, o.s);
    ASSERT_EQ(sc.deletions, o.d);
    ASSERT_EQ(sc.insertions, o.i);
    ASSERT_EQ(sc.n_ref, o.n);
    EXPECT_EQ(sc.tp + sc.fn, sc.n_ref);

    PRF f = segment_f1(ref, est, seg, dur);
    const double p = o.tp + o.fp ? double(o.tp) / (o.tp + o.fp) : 0.0;
    const double r = o.tp + o.fn ? double(o.tp) / (o.tp + o.fn) : 0.0;
    EXPECT_NEAR(f.f_measure, p + r > 0 ? 2 * p * r / (p + r) : 0.0, 1e-12);
    if (o.n > 0) {
      EXPECT_NEAR(error_rate(ref, est, seg, dur).er, double(o.s + o.d + o.i) / o.n, 1e-12);
    }
  }
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 rng(32);
  const std::vector<std::string> classes = {"a", "b"};
  for (int trial = 0; trial < 100; ++trial) {
    EventList ref = test::random_ms_events(rng, classes, 5.0, 8);
    EventList est = test::random_ms_events(rng, classes, 5.0, 8);
    const PRF f = segment_f1(ref, est, 0.1, 5.0);
    const ErrorRate e = error_rate(ref, est, 0.1, 5.0);
    std::shuffle(ref.begin(), ref.end(), rng);
    std::shuffle(est.begin(), est.end(), rng);
    EXPECT_EQ(segment_f1(ref, est, 0.1, 5.0).f_measure, f.f_measure);
    EXPECT_EQ(error_rate(ref, est, 0.1, 5.0).er, e.er);
  }
}

TEST(Metrics, AddingACorrectSegmentNeverLowersF) {
  std::mt19937_64 rng(33);
  const std::vector<std::string> classes = {"a", "b"};
  for (int trial = 0; trial < 300; ++trial) {
    EventList ref = test::random_ms_events(rng, classes, 5.0, 6);
    EventList est = test::random_ms_events(rng, classes, 5.0, 6);
    auto r = segmentize(ref, 0.1, 5.0, classes), e = segmentize(est, 0.1, 5.0, classes);
    std::vector<std::pair<std::size_t, std::size_t>> missed;
    for (std::size_t k = 0; k < r.rows; ++k)
      for (std::size_t c = 0; c < 2; ++c)
        if (r(k, c) && !e(k, c)) missed.push_back({k, c});
    if (missed.empty()) continue;
    auto [k, c] = missed[rng() % missed.size()];
    const double before = segment_f1(ref, est, 0.1, 5.0).f_measure;
    est.push_back({classes[c], k * 0.1 + 0.01, k * 0.1 + 0.09});
    EXPECT_GE(segment_f1(ref, est, 0.1, 5.0).f_measure, before);
  }
}

TEST(ClassWise, Examples) {
  auto f = class_wise_f1({{"a", 0.0, 2.0}}, {{"a", 0.0, 2.0}}, 1.0);
  EXPECT_DOUBLE_EQ(f.at("a"), 1.0);
  f = class_wise_f1({{"a", 0.0, 2.0}}, {{"a", 0.0, 2.0}, {"b", 0.0, 1.0}}, 1.0);
  EXPECT_DOUBLE_EQ(f.at("b"), 0.0);
  // Classes absent from both lists are left out.
  SegmentCounts sc = count_segments({{"a", 0.0, 1.0}}, {}, 1.0, 2.0, std::vector<std::string>{"a", "z"});
  auto m = class_wise_f1_from_counts(sc);
  EXPECT_EQ(m.count("z"), 0u);
  EXPECT_EQ(m.count("a"), 1u);
}

TEST(ClassWise, AgreesWithSingleClassOverall) {
  std::mt19937_64 rng(34);
  const std::vector<std::string> classes = {"speech", "music"};
  for (int trial = 0; trial < 200; ++trial) {
    EventList ref = test::random_ms_events(rng, classes, 8.0, 8);
    EventList est = test::random_ms_events(rng, classes, 8.0, 8);
    auto cw = class_wise_f1(ref, est, 0.01, 8.0);
    for (const auto& c : classes) {
      EventList r1, e1;
      for (const auto& e : ref)
        if (e.label == c) r1.push_back(e);
      for (const auto& e : est)
        if (e.label == c) e1.push_back(e);
      if (r1.empty() && e1.empty()) {
        EXPECT_EQ(cw.count(c), 0u);
        continue;
      }
      EXPECT_NEAR(cw.at(c), segment_f1(r1, e1, 0.01, 8.0).f_measure, 1e-12);
    }
  }
}

TEST(Counts, FilesAddBeforeRatios) {
  EventList r1 = {{"a", 0.0, 2.0}}, e1 = {{"a", 0.0, 1.0}};
  EventList r2 = {{"a", 0.0, 1.0}}, e2 = {{"a", 0.0, 3.0}};
  SegmentCounts total = count_segments(r1, e1, 1.0, 4.0);
  total.add(count_segments(r2, e2, 1.0, 4.0));
  // Same as one 8 s file with the second shifted by 4 s.
  EventList rc = {{"a", 0.0, 2.0}, {"a", 4.0, 5.0}}, ec = {{"a", 0.0, 1.0}, {"a", 4.0, 7.0}};
  SegmentCounts joined = count_segments(rc, ec, 1.0, 8.0);
  EXPECT_EQ(total.tp, joined.tp);
  EXPECT_EQ(total.fp, joined.fp);
  EXPECT_EQ(total.fn, joined.fn);
  EXPECT_EQ(total.insertions, joined.insertions);
  EXPECT_EQ(total.deletions, joined.deletions);
}

TEST(Report, TextAndJson) {
  SegmentCounts sc = count_segments({{"a", 0.0, 4.0}}, {{"a", 0.0, 2.0}}, 1.0, 4.0);
  MetricsReport r = make_report(sc, 1.0);
  const std::string text = report_to_text(r);
  EXPECT_NE(text.find("f_overall=66.67\n"), std::string::npos) << text;
  EXPECT_NE(text.find("precision=100.00\n"), std::string::npos);
  EXPECT_NE(text.find("error_rate=0.50\n"), std::string::npos);
  EXPECT_NE(text.find("f_class.a=66.67\n"), std::string::npos);
  auto j = report_to_json(r);
  EXPECT_NEAR(j["overall"]["f_measure"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(j["error_rate"]["deletions"].get<int>(), 2);
  MetricsReport inf = make_report(count_segments({}, {{"a", 0.0, 1.0}}, 1.0), 1.0);
  EXPECT_TRUE(report_to_json(inf)["error_rate"]["er"].is_null());
  EXPECT_NE(report_to_text(inf).find("error_rate=inf"), std::string::npos);
}

}  // namespace
}  // namespace yoho
