// yoho/train.hpp

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
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "yoho/augment.hpp"
#include "yoho/loss.hpp"
#include "yoho/network.hpp"

namespace yoho {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  double l2_first_conv = 0.0;
  double l2_rest = 0.0;
  double spatial_dropout_rate = 0.0;
  std::size_t early_stop_patience = 5;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
  SpecAugmentConfig spec_augment;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (batch_size == 0) throw ArgumentError("batch size must be positive");
    for (double r : {l2_first_conv, l2_rest, spatial_dropout_rate})
      if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("regularization rates must be in [0, 1)");
    if (max_epochs == 0) throw ArgumentError("max_epochs must be positive");
  }
};

/// One training pair: features (time x mels, row-major) and the flattened
/// target (steps x 3*classes triplets, or frames x classes for frame heads).
struct Example {
  std::vector<float> features;
  std::vector<float> target;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool improved = false;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

namespace detail {

template <typename T>
Tensor<T> stack_features(const Network<T>& net, const std::vector<Example>& data, std::span<const std::size_t> idx) {
  const Shape3 in = net.input_shape();
  const std::size_t per = in.h * in.w;
  Tensor<T> batch({idx.size(), in.h, in.w});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& f = data[idx[i]].features;
    if (f.size() != per) throw ShapeError("example features do not match the network input");
    std::copy(f.begin(), f.end(), batch.values.begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return batch;
}

template <typename T>
std::vector<T> stack_targets(const std::vector<Example>& data, std::span<const std::size_t> idx, std::size_t per) {
  std::vector<T> out(idx.size() * per);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& t = data[idx[i]].target;
    if (t.size() != per) throw ShapeError("example target does not match the network output");
    std::copy(t.begin(), t.end(), out.begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return out;
}

template <typename T>
struct Snapshot {
  std::vector<std::vector<T>> params, buffers;

  void take(const Network<T>& net) {
    params.clear();
    buffers.clear();
    for (auto* p : net.params()) params.push_back(p->value.values);
    for (auto& b : net.buffers()) buffers.push_back(b.second->values);
  }
  void restore(Network<T>& net) const {
    auto ps = net.params();
    auto bs = net.buffers();
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value.values = params[i];
    for (std::size_t i = 0; i < bs.size(); ++i) bs[i].second->values = buffers[i];
  }
};

/// The YOHO triplet loss, or per-frame binary cross-entropy for frame heads.
template <typename T>
class BatchObjective {
 public:
  explicit BatchObjective(const Network<T>& net) : frame_(net.architecture().kind == ModelKind::kFrameCnn) {
    const auto [steps, width] = net.output_shape();
    per_ = steps * width;
    n_classes_ = frame_ ? width : width / 3;
    if (!frame_ && width % 3 != 0) throw ShapeError("network output is not a YOHO triplet layout");
  }
  std::size_t per_example() const { return per_; }
  double loss(std::span<const T> out, std::span<const T> tgt) const {
    return frame_ ? frame_bce_loss<T>(out, tgt) : yoho_loss<T>(out, tgt, n_classes_);
  }
  void grad(std::span<const T> out, std::span<const T> tgt, std::span<T> g, double scale) const {
    if (frame_)
      frame_bce_grad<T>(out, tgt, g, scale);
    else
      yoho_loss_grad<T>(out, tgt, g, scale);
  }

 private:
  bool frame_;
  std::size_t per_ = 0, n_classes_ = 0;
};

}  // namespace detail

/// Mean per-example loss in inference mode.
template <typename T>
double evaluate_loss(Network<T>& net, const std::vector<Example>& data, std::size_t batch_size = 32) {
  if (data.empty()) return 0.0;
  const detail::BatchObjective<T> objective(net);
  const std::size_t per = objective.per_example();
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  for (std::size_t lo = 0; lo < idx.size(); lo += batch_size) {
    std::span<const std::size_t> chunk(idx.data() + lo, std::min(batch_size, idx.size() - lo));
    Tensor<T> out = net.forward(detail::stack_features(net, data, chunk), Mode::kInference);
    std::vector<T> tgt = detail::stack_targets<T>(data, chunk, per);
    total += objective.loss(out.values, tgt);
  }
  return total / static_cast<double>(data.size());
}

/// Mini-batch Adam on the summed per-example loss (YOHO triplet loss, or
/// frame-wise cross-entropy for frame heads), averaged over the batch.
///
/// Stops once validation loss has failed to improve for more than
/// early_stop_patience consecutive epochs (patience 0 stops at the first
/// non-improving epoch) or after max_epochs, then restores the weights of the
/// best validation epoch. on_epoch, when set, sees every epoch as it finishes.
template <typename T>
TrainHistory train(Network<T>& net, const std::vector<Example>& train_set, const std::vector<Example>& val_set,
                   const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) throw ArgumentError("train: empty training or validation set");
  const detail::BatchObjective<T> objective(net);
  const std::size_t per = objective.per_example();

  net.configure_dropout(cfg.spatial_dropout_rate, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 rng(cfg.seed);
  const Regularization reg{cfg.l2_first_conv, cfg.l2_rest};
  const AdamConfig adam{cfg.learning_rate};
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  detail::Snapshot<T> best;
  best.take(net);
  std::size_t step = 0, stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Fisher-Yates with our own draws so the order does not depend on the
    // standard library's shuffle.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    double total = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      std::span<const std::size_t> chunk(order.data() + lo, std::min(cfg.batch_size, order.size() - lo));
      Tensor<T> batch = detail::stack_features(net, train_set, chunk);
      if (cfg.spec_augment.enabled()) spec_augment(batch, cfg.spec_augment, rng);
      std::vector<T> tgt = detail::stack_targets<T>(train_set, chunk, per);
      Tensor<T> out = net.forward(std::move(batch), Mode::kTraining);
      total += objective.loss(out.values, tgt);
      Tensor<T> grad(out.shape);
      objective.grad(out.values, tgt, grad.values, 1.0 / static_cast<double>(chunk.size()));
      net.backward(std::move(grad), reg);
      adam_step(net, adam, ++step);
    }
    EpochStats st;
    st.epoch = epoch;
    st.train_loss = total / static_cast<double>(train_set.size());
    st.val_loss = evaluate_loss(net, val_set, cfg.batch_size);
    st.improved = st.val_loss < history.best_val_loss;
    if (st.improved) {
      history.best_val_loss = st.val_loss;
      history.best_epoch = epoch;
      best.take(net);
      stale = 0;
    } else {
      ++stale;
    }
    history.epochs.push_back(st);
    if (on_epoch) on_epoch(st);
    if (stale > cfg.early_stop_patience) break;
  }
  best.restore(net);
  net.clear_caches();
  return history;
}

}  // namespace yoho
