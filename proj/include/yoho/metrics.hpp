// yoho/metrics.hpp

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
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "yoho/features.hpp"
#include "yoho/label_codec.hpp"

namespace yoho {

// Segment-based metrics. Event lists are rasterized onto fixed segments
// [k*s, (k+1)*s); a (segment, class) cell is active when an event of that
// class overlaps the segment with nonzero length. Overall scores are
// micro-averaged over all cells; counts from several files add up before any
// ratio is taken.

inline bool segment_active(const Event& e, std::size_t k, double segment_size) {
  return e.onset < (k + 1) * segment_size && e.offset > k * segment_size;
}

/// Whole segments needed to cover `duration`.
inline std::size_t segment_count(double duration, double segment_size) {
  if (duration <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(duration / segment_size - 1e-9));
}

/// Default evaluation length: the latest offset in either list.
inline double default_duration(const EventList& a, const EventList& b) {
  double d = 0.0;
  for (const auto& e : a) d = std::max(d, e.offset);
  for (const auto& e : b) d = std::max(d, e.offset);
  return d;
}

/// Sorted union of labels from both lists.
inline std::vector<std::string> label_union(const EventList& a, const EventList& b) {
  std::set<std::string> s;
  for (const auto& e : a) s.insert(e.label);
  for (const auto& e : b) s.insert(e.label);
  return {s.begin(), s.end()};
}

/// Activity matrix, segments x classes (1 = active).
inline Matrix<std::uint8_t> segmentize(const EventList& events, double segment_size, double total_duration,
                                       const std::vector<std::string>& classes) {
  if (!(segment_size > 0.0)) throw ArgumentError("segmentize: segment size must be positive");
  const std::size_t n_seg = segment_count(total_duration, segment_size);
  Matrix<std::uint8_t> act(n_seg, classes.size(), 0);
  for (const Event& e : events) {
    auto it = std::find(classes.begin(), classes.end(), e.label);
    if (it == classes.end() || n_seg == 0 || !(e.offset > e.onset)) continue;
    const std::size_t c = static_cast<std::size_t>(it - classes.begin());
    // Index estimate from floor/ceil, then settled with the exact predicate.
    std::int64_t lo = static_cast<std::int64_t>(std::floor(e.onset / segment_size)) - 1;
    std::int64_t hi = static_cast<std::int64_t>(std::ceil(e.offset / segment_size)) + 1;
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(n_seg) - 1);
    for (std::int64_t k = lo; k <= hi; ++k)
      if (segment_active(e, static_cast<std::size_t>(k), segment_size)) act(static_cast<std::size_t>(k), c) = 1;
  }
  return act;
}

struct ClassCounts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

/// Raw counts; add() them across files, then derive the scores.
struct SegmentCounts {
  std::int64_t tp = 0, fp = 0, fn = 0;
  std::int64_t substitutions = 0, deletions = 0, insertions = 0, n_ref = 0;
  std::int64_t segments = 0;
  std::map<std::string, ClassCounts> per_class;

  void add(const SegmentCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    n_ref += o.n_ref;
    segments += o.segments;
    for (const auto& [k, v] : o.per_class) {
      auto& d = per_class[k];
      d.tp += v.tp;
      d.fp += v.fp;
      d.fn += v.fn;
    }
  }
};

/// Counts for one file. When total_duration is empty, the latest offset is used
/// (rounded up to a whole segment by the rasterization).
inline SegmentCounts count_segments(const EventList& reference, const EventList& estimate, double segment_size,
                                    std::optional<double> total_duration = std::nullopt,
                                    std::optional<std::vector<std::string>> classes = std::nullopt) {
  const double dur = total_duration.value_or(default_duration(reference, estimate));
  const std::vector<std::string> cls = classes.value_or(label_union(reference, estimate));
  auto ref = segmentize(reference, segment_size, dur, cls);
  auto est = segmentize(estimate, segment_size, dur, cls);
  SegmentCounts sc;
  sc.segments = static_cast<std::int64_t>(ref.rows);
  for (std::size_t k = 0; k < ref.rows; ++k) {
    std::int64_t fn_k = 0, fp_k = 0, n_k = 0;
    for (std::size_t c = 0; c < cls.size(); ++c) {
      const bool r = ref(k, c) != 0, e = est(k, c) != 0;
      auto& pc = sc.per_class[cls[c]];
      if (r) ++n_k;
      if (r && e) {
        ++sc.tp;
        ++pc.tp;
      } else if (r) {
        ++fn_k;
        ++pc.fn;
      } else if (e) {
        ++fp_k;
        ++pc.fp;
      }
    }
    sc.fn += fn_k;
    sc.fp += fp_k;
    sc.n_ref += n_k;
    sc.substitutions += std::min(fn_k, fp_k);
    sc.deletions += std::max<std::int64_t>(0, fn_k - fp_k);
    sc.insertions += std::max<std::int64_t>(0, fp_k - fn_k);
  }
  return sc;
}

struct PRF {
  double precision = 0.0, recall = 0.0, f_measure = 0.0;
};

struct ErrorRate {
  double er = 0.0;
  std::int64_t substitutions = 0, deletions = 0, insertions = 0, n_ref = 0;
};

inline PRF prf_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  PRF r;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f_measure = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

/// ER = (S + D + I) / N. With N == 0 the rate is 0 without insertions and
/// +infinity with them.
inline ErrorRate error_rate_from_counts(const SegmentCounts& sc) {
  ErrorRate e{0.0, sc.substitutions, sc.deletions, sc.insertions, sc.n_ref};
  const std::int64_t errors = sc.substitutions + sc.deletions + sc.insertions;
  if (sc.n_ref > 0) e.er = static_cast<double>(errors) / sc.n_ref;
  else e.er = errors > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return e;
}

inline PRF segment_f1(const EventList& reference, const EventList& estimate, double segment_size,
                      std::optional<double> total_duration = std::nullopt) {
  auto sc = count_segments(reference, estimate, segment_size, total_duration);
  return prf_from_counts(sc.tp, sc.fp, sc.fn);
}

inline ErrorRate error_rate(const EventList& reference, const EventList& estimate, double segment_size,
                            std::optional<double> total_duration = std::nullopt) {
  return error_rate_from_counts(count_segments(reference, estimate, segment_size, total_duration));
}

/// F per class; classes with no active cell in either list are left out.
inline std::map<std::string, double> class_wise_f1_from_counts(const SegmentCounts& sc) {
  std::map<std::string, double> out;
  for (const auto& [name, c] : sc.per_class) {
    if (c.tp + c.fp + c.fn == 0) continue;
    out[name] = prf_from_counts(c.tp, c.fp, c.fn).f_measure;
  }
  return out;
}

inline std::map<std::string, double> class_wise_f1(const EventList& reference, const EventList& estimate,
                                                   double segment_size,
                                                   std::optional<double> total_duration = std::nullopt) {
  return class_wise_f1_from_counts(count_segments(reference, estimate, segment_size, total_duration));
}

struct MetricsReport {
  double segment_size = 0.0;
  PRF overall;
  ErrorRate error;
  std::map<std::string, double> per_class;
  std::int64_t files = 0;
};

inline MetricsReport make_report(const SegmentCounts& sc, double segment_size, std::int64_t files = 1) {
  return {segment_size, prf_from_counts(sc.tp, sc.fp, sc.fn), error_rate_from_counts(sc), class_wise_f1_from_counts(sc),
          files};
}

/// key=value lines; F, P and R as percentages with two decimals.
inline std::string report_to_text(const MetricsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "segment_size=" << std::setprecision(3) << r.segment_size << std::setprecision(2) << "\n";
  os << "files=" << r.files << "\n";
  os << "f_overall=" << 100.0 * r.overall.f_measure << "\n";
  os << "precision=" << 100.0 * r.overall.precision << "\n";
  os << "recall=" << 100.0 * r.overall.recall << "\n";
  if (std::isinf(r.error.er)) os << "error_rate=inf\n";
  else os << "error_rate=" << r.error.er << "\n";
  os << "substitutions=" << r.error.substitutions << "\ndeletions=" << r.error.deletions
     << "\ninsertions=" << r.error.insertions << "\nn_ref=" << r.error.n_ref << "\n";
  for (const auto& [name, f] : r.per_class) os << "f_class." << name << "=" << 100.0 * f << "\n";
  return os.str();
}

/// JSON schema: {segment_size, files, overall:{precision,recall,f_measure} (fractions),
/// error_rate:{er (null when infinite), substitutions, deletions, insertions, n_ref},
/// class_wise_f:{label: fraction}}.
inline nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["segment_size"] = r.segment_size;
  j["files"] = r.files;
  j["overall"] = {{"precision", r.overall.precision}, {"recall", r.overall.recall}, {"f_measure", r.overall.f_measure}};
  j["error_rate"] = {{"er", std::isinf(r.error.er) ? nlohmann::json(nullptr) : nlohmann::json(r.error.er)},
                     {"substitutions", r.error.substitutions},
                     {"deletions", r.error.deletions},
                     {"insertions", r.error.insertions},
                     {"n_ref", r.error.n_ref}};
  j["class_wise_f"] = r.per_class;
  return j;
}

}  // namespace yoho
