// yoho/loss.hpp

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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "yoho/label_codec.hpp"

namespace yoho {

struct ClassLoss {
  double classification = 0.0;
  double regression = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  std::map<std::string, ClassLoss> per_class;
};

// Sum-squared error per (step, class) triplet:
//   (p1 - t1)^2                                  if t1 == 0
//   (p1 - t1)^2 + (p2 - t2)^2 + (p3 - t3)^2      if t1 == 1
// summed over steps and classes, no averaging. The raw-span forms work on the
// flattened network layout so the training loop can use them on float outputs.

/// Loss over flattened triplets; fills per-class sums when per_class is non-empty.
template <typename T>
double yoho_loss(std::span<const T> pred, std::span<const T> target, std::size_t n_classes,
                 std::span<ClassLoss> per_class = {}) {
  if (pred.size() != target.size() || n_classes == 0 || pred.size() % (3 * n_classes) != 0)
    throw ShapeError("yoho_loss: prediction/target shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); i += 3) {
    const double e1 = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    double cls = e1 * e1, reg = 0.0;
    if (target[i] == T(1)) {
      const double e2 = static_cast<double>(pred[i + 1]) - static_cast<double>(target[i + 1]);
      const double e3 = static_cast<double>(pred[i + 2]) - static_cast<double>(target[i + 2]);
      reg = e2 * e2 + e3 * e3;
    }
    if (!per_class.empty()) {
      auto& pc = per_class[(i / 3) % n_classes];
      pc.classification += cls;
      pc.regression += reg;
    }
    total += cls + reg;
  }
  return total;
}

/// d(loss)/d(pred) over flattened triplets, scaled by `scale`.
template <typename T>
void yoho_loss_grad(std::span<const T> pred, std::span<const T> target, std::span<T> grad,
                    double scale = 1.0) {
  if (pred.size() != target.size() || grad.size() != pred.size() || pred.size() % 3 != 0)
    throw ShapeError("yoho_loss_grad: shape mismatch");
  for (std::size_t i = 0; i < pred.size(); i += 3) {
    const bool present = target[i] == T(1);
    grad[i] = static_cast<T>(scale * 2.0 * (static_cast<double>(pred[i]) - target[i]));
    grad[i + 1] = present ? static_cast<T>(scale * 2.0 * (static_cast<double>(pred[i + 1]) - target[i + 1])) : T(0);
    grad[i + 2] = present ? static_cast<T>(scale * 2.0 * (static_cast<double>(pred[i + 2]) - target[i + 2])) : T(0);
  }
}

// Binary cross-entropy for the frame-classification head, summed over frames
// and classes. Probabilities are clipped to [1e-7, 1 - 1e-7].

inline constexpr double kBceEpsilon = 1e-7;

template <typename T>
double frame_bce_loss(std::span<const T> pred, std::span<const T> target) {
  if (pred.size() != target.size()) throw ShapeError("frame_bce_loss: prediction/target shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred[i]), kBceEpsilon, 1.0 - kBceEpsilon);
    const double t = target[i];
    total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return total;
}

/// d(bce)/d(pred), scaled by `scale`; zero where the clip is active.
template <typename T>
void frame_bce_grad(std::span<const T> pred, std::span<const T> target, std::span<T> grad, double scale = 1.0) {
  if (pred.size() != target.size() || grad.size() != pred.size()) throw ShapeError("frame_bce_grad: shape mismatch");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i];
    if (p < kBceEpsilon || p > 1.0 - kBceEpsilon) {
      grad[i] = T(0);
      continue;
    }
    grad[i] = static_cast<T>(scale * (p - static_cast<double>(target[i])) / (p * (1.0 - p)));
  }
}

inline void check_same_layout(const YohoGrid& pred, const YohoGrid& target) {
  if (pred.steps != target.steps || pred.classes != target.classes || pred.values.size() != target.values.size())
    throw ShapeError("yoho grids differ in steps or classes");
}

inline LossBreakdown yoho_loss(const YohoGrid& pred, const YohoGrid& target) {
  check_same_layout(pred, target);
  std::vector<ClassLoss> pc(target.n_classes());
  LossBreakdown out;
  out.total = yoho_loss<double>(pred.values, target.values, target.n_classes(), pc);
  for (std::size_t c = 0; c < pc.size(); ++c) {
    out.per_class[target.classes[c]] = pc[c];
    out.classification += pc[c].classification;
    out.regression += pc[c].regression;
  }
  return out;
}

/// Gradient grid with the same layout as `pred`.
inline YohoGrid yoho_loss_grad(const YohoGrid& pred, const YohoGrid& target) {
  check_same_layout(pred, target);
  YohoGrid g(pred.classes, pred.steps, pred.step_duration);
  yoho_loss_grad<double>(pred.values, target.values, g.values);
  return g;
}

}  // namespace yoho
