// yoho/network.hpp

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
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "yoho/layers.hpp"

namespace yoho {

enum class ModelKind { kYoho, kFrameCnn, kCustom };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kYoho: return "yoho";
    case ModelKind::kFrameCnn: return "frame_cnn";
    case ModelKind::kCustom: return "custom";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "yoho") return ModelKind::kYoho;
  if (s == "frame_cnn") return ModelKind::kFrameCnn;
  if (s == "custom") return ModelKind::kCustom;
  throw DataError("unknown model kind '" + s + "'");
}

/// What a network was built from; enough to rebuild it from a checkpoint.
struct Architecture {
  ModelKind kind = ModelKind::kYoho;
  std::size_t input_time = 0;
  std::size_t n_mels = 0;
  std::size_t n_classes = 0;
  std::size_t width_divisor = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> classes;

  bool operator==(const Architecture&) const = default;
};

/// L2 coefficients; the penalty is coeff * sum(w^2) over conv kernels.
struct Regularization {
  double first_conv = 0.0;
  double rest = 0.0;
};

template <typename T>
class Network {
 public:
  Network() = default;
  Network(Architecture arch, Shape3 input) : arch_(std::move(arch)), input_(input) {}
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const Architecture& architecture() const { return arch_; }
  Shape3 input_shape() const { return input_; }
  const std::vector<std::unique_ptr<Layer<T>>>& layers() const { return layers_; }

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  /// Per-example output shape (steps, 1, outputs) before the final squeeze.
  Shape3 output_shape3() const {
    Shape3 s = input_;
    for (const auto& l : layers_) s = l->output_shape(s);
    return s;
  }
  /// (steps, outputs per step).
  std::pair<std::size_t, std::size_t> output_shape() const {
    Shape3 s = output_shape3();
    return {s.h, s.w * s.c};
  }

  std::vector<Param<T>*> params() const {
    std::vector<Param<T>*> out;
    for (const auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }

  std::vector<std::pair<std::string, Tensor<T>*>> buffers() const {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (const auto& l : layers_)
      for (auto& b : l->buffers()) out.push_back(b);
    return out;
  }

  /// Trainable scalars (kernels, biases, batch-norm gamma and beta).
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (auto* p : params()) n += p->size();
    return n;
  }

  /// batch is (B, time, mels) or (B, time, mels, 1); returns (B, steps, outputs).
  Tensor<T> forward(Tensor<T> batch, Mode mode) {
    if (batch.rank() == 3) batch.reshape({batch.dim(0), batch.dim(1), batch.dim(2), 1});
    if (batch.rank() != 4 || batch.dim(1) != input_.h || batch.dim(2) != input_.w || batch.dim(3) != input_.c)
      throw ShapeError("network input " + shape_string(batch.shape) + " does not match (B, " +
                       std::to_string(input_.h) + ", " + std::to_string(input_.w) + ")");
    const std::size_t b = batch.dim(0);
    for (auto& l : layers_) batch = l->forward(std::move(batch), mode);
    trained_forward_ = mode == Mode::kTraining;
    auto [steps, outs] = output_shape();
    batch.reshape({b, steps, outs});
    return batch;
  }

  /// Backpropagates loss_grad (B, steps, outputs). Gradients are reset first,
  /// so after the call every Param::grad holds d(loss + L2)/d(param).
  void backward(Tensor<T> loss_grad, const Regularization& reg = {}) {
    if (!trained_forward_) throw Error("backward called without a training-mode forward");
    zero_grad();
    Shape3 out = output_shape3();
    loss_grad.reshape({loss_grad.size() / (out.h * out.w * out.c), out.h, out.w, out.c});
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) loss_grad = (*it)->backward(std::move(loss_grad));
    trained_forward_ = false;
    for (auto* p : params()) {
      const double k = l2_coefficient(*p, reg);
      if (k == 0.0) continue;
      for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += static_cast<T>(2.0 * k * p->value.values[i]);
    }
  }

  double l2_penalty(const Regularization& reg) const {
    double s = 0.0;
    for (auto* p : params()) {
      const double k = l2_coefficient(*p, reg);
      if (k == 0.0) continue;
      double sq = 0.0;
      for (T v : p->value.values) sq += static_cast<double>(v) * v;
      s += k * sq;
    }
    return s;
  }

  void zero_grad() {
    for (auto* p : params()) std::fill(p->grad.begin(), p->grad.end(), T(0));
  }

  void clear_caches() {
    for (auto& l : layers_) l->clear_cache();
    trained_forward_ = false;
  }

  /// Sets every spatial-dropout layer's rate; layer i draws from seed + i.
  void configure_dropout(double rate, std::uint64_t seed) {
    std::uint64_t i = 0;
    for (auto& l : layers_)
      if (auto* d = dynamic_cast<SpatialDropout<T>*>(l.get())) d->configure(rate, seed + 1000003 * ++i);
  }

  /// Copies parameter and buffer values from a network of identical structure.
  void copy_weights_from(const Network& other) {
    auto dst = params();
    auto src = other.params();
    auto dbuf = buffers();
    auto sbuf = other.buffers();
    if (dst.size() != src.size() || dbuf.size() != sbuf.size()) throw ShapeError("copy_weights_from: structure differs");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value.values = src[i]->value.values;
    for (std::size_t i = 0; i < dbuf.size(); ++i) dbuf[i].second->values = sbuf[i].second->values;
  }

 private:
  static double l2_coefficient(const Param<T>& p, const Regularization& reg) {
    switch (p.l2_group) {
      case Param<T>::L2Group::kFirstConv: return reg.first_conv;
      case Param<T>::L2Group::kRest: return reg.rest;
      default: return 0.0;
    }
  }

  Architecture arch_;
  Shape3 input_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  bool trained_forward_ = false;
};

/// Appends layers while tracking shape, names and initialization.
///
/// Kernels get He-uniform init (limit sqrt(6 / fan_in)), biases and beta are
/// zero, gamma is one.
template <typename T>
class NetworkBuilder {
 public:
  using L2 = typename Param<T>::L2Group;

  NetworkBuilder(Architecture arch, Shape3 input)
      : net_(std::move(arch), input), shape_(input), rng_(net_.architecture().seed) {}

  Shape3 shape() const { return shape_; }

  NetworkBuilder& conv2d(std::size_t filters, std::size_t k, std::size_t stride, L2 l2 = L2::kRest) {
    auto& l = net_.template add<Conv2d<T>>(next_name("conv2d"), shape_.c, filters, k, k, stride, stride, l2);
    he_uniform(l.weight(), l.fan_in());
    return advance(l);
  }
  NetworkBuilder& depthwise(std::size_t k, std::size_t stride, L2 l2 = L2::kRest) {
    auto& l = net_.template add<DepthwiseConv2d<T>>(next_name("depthwise_conv2d"), shape_.c, k, k, stride, stride, l2);
    he_uniform(l.weight(), l.fan_in());
    return advance(l);
  }
  NetworkBuilder& batch_norm() { return advance(net_.template add<BatchNorm<T>>(next_name("batch_norm"), shape_.c)); }
  NetworkBuilder& relu() { return advance(net_.template add<Relu<T>>(next_name("relu"))); }
  NetworkBuilder& sigmoid() { return advance(net_.template add<Sigmoid<T>>(next_name("sigmoid"))); }
  NetworkBuilder& reshape() { return advance(net_.template add<Reshape<T>>(next_name("reshape"))); }
  NetworkBuilder& max_pool_freq() { return advance(net_.template add<MaxPoolFreq<T>>(next_name("max_pool2d"))); }
  NetworkBuilder& spatial_dropout() {
    return advance(net_.template add<SpatialDropout<T>>(next_name("spatial_dropout")));
  }
  NetworkBuilder& conv1d(std::size_t filters) {
    if (shape_.w != 1) throw ShapeError("conv1d needs a reshaped (time, 1, features) activation");
    auto& l = net_.template add<Conv2d<T>>(next_name("conv1d"), shape_.c, filters, 1, 1, 1, 1, L2::kNone,
                                           LayerKind::kConv1d);
    he_uniform(l.weight(), l.fan_in());
    return advance(l);
  }

  Network<T> build() { return std::move(net_); }

 private:
  NetworkBuilder& advance(Layer<T>& l) {
    shape_ = l.output_shape(shape_);
    if (shape_.h == 0 || shape_.w == 0 || shape_.c == 0) throw ShapeError(l.name() + ": empty output");
    return *this;
  }
  std::string next_name(const std::string& kind) { return kind + "_" + std::to_string(counters_[kind]++); }
  void he_uniform(Param<T>& p, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (T& v : p.value.values) v = static_cast<T>(u(rng_));
  }

  Network<T> net_;
  Shape3 shape_;
  std::mt19937_64 rng_;
  std::map<std::string, std::size_t> counters_;
};

/// Depthwise/pointwise stages after the first 3x3 convolution:
/// MobileNet body (with 512 channels in the repeated block) followed by the
/// 1024 -> 512 -> 256 -> 128 reduction head.
struct SeparableStage {
  std::size_t stride;
  std::size_t filters;
};

inline std::vector<SeparableStage> yoho_stages() {
  std::vector<SeparableStage> s = {{1, 64}, {2, 128}, {1, 128}, {2, 256}, {1, 256}, {2, 512}};
  for (int i = 0; i < 5; ++i) s.push_back({1, 512});
  s.insert(s.end(), {{2, 1024}, {1, 1024}, {1, 512}, {1, 256}, {1, 128}});
  return s;
}

inline constexpr std::size_t kFirstConvFilters = 32;

inline std::size_t ceil_halvings(std::size_t n, int times) {
  for (int i = 0; i < times; ++i) n = (n + 1) / 2;
  return n;
}

namespace detail {

template <typename T>
Network<T> build_mobilenet_sed(Architecture arch, bool frame_head) {
  if (arch.input_time < 32) throw ArgumentError("input time must be >= 32 for five stride-2 stages");
  if (arch.n_mels < 1 || arch.n_classes < 1) throw ArgumentError("need n_mels >= 1 and n_classes >= 1");
  if (arch.width_divisor < 1) throw ArgumentError("width divisor must be >= 1");
  if (!arch.classes.empty() && arch.classes.size() != arch.n_classes)
    throw ArgumentError("class list length differs from n_classes");
  using L2 = typename Param<T>::L2Group;
  const auto width = [&](std::size_t c) { return std::max<std::size_t>(1, c / arch.width_divisor); };
  NetworkBuilder<T> b(arch, {arch.input_time, arch.n_mels, 1});

  // Frame head: every stride-2 stage becomes stride 1 + (1, 2) max pooling.
  const auto stage_stride = [&](std::size_t s) { return frame_head ? std::size_t{1} : s; };
  const auto maybe_pool = [&](std::size_t s) {
    if (frame_head && s == 2) b.max_pool_freq();
  };

  b.conv2d(width(kFirstConvFilters), 3, stage_stride(2), L2::kFirstConv).batch_norm().relu();
  maybe_pool(2);
  for (const auto& st : yoho_stages()) {
    b.depthwise(3, stage_stride(st.stride)).batch_norm().relu();
    maybe_pool(st.stride);
    b.conv2d(width(st.filters), 1, 1).batch_norm().relu().spatial_dropout();
  }
  b.reshape();
  b.conv1d(frame_head ? arch.n_classes : 3 * arch.n_classes).sigmoid();
  return b.build();
}

}  // namespace detail

/// The regression network: output (ceil-halved-five-times time, 3 * classes).
template <typename T = float>
Network<T> build_yoho(std::size_t input_time, std::size_t n_mels, std::size_t n_classes, std::size_t width_divisor = 1,
                      std::uint64_t seed = 0, std::vector<std::string> classes = {}) {
  Architecture a{ModelKind::kYoho, input_time, n_mels, n_classes, width_divisor, seed, std::move(classes)};
  return detail::build_mobilenet_sed<T>(std::move(a), false);
}

/// Frame-classification baseline with the same layer stack: output (time, classes).
template <typename T = float>
Network<T> build_frame_cnn(std::size_t input_time, std::size_t n_mels, std::size_t n_classes,
                           std::size_t width_divisor = 1, std::uint64_t seed = 0,
                           std::vector<std::string> classes = {}) {
  Architecture a{ModelKind::kFrameCnn, input_time, n_mels, n_classes, width_divisor, seed, std::move(classes)};
  return detail::build_mobilenet_sed<T>(std::move(a), true);
}

template <typename T = float>
Network<T> build_network(const Architecture& arch) {
  switch (arch.kind) {
    case ModelKind::kYoho: return detail::build_mobilenet_sed<T>(arch, false);
    case ModelKind::kFrameCnn: return detail::build_mobilenet_sed<T>(arch, true);
    default: throw ModelMismatchError("cannot rebuild a custom architecture");
  }
}

/// Parameters shared by both heads: everything except the final conv1d.
template <typename T>
std::size_t body_parameter_count(const Network<T>& net) {
  std::size_t n = 0;
  for (const auto& l : net.layers())
    if (l->kind() != LayerKind::kConv1d)
      for (auto* p : l->params()) n += p->size();
  return n;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// One Adam update from the current gradients; step is 1-based.
template <typename T>
void adam_step(Network<T>& net, const AdamConfig& cfg, std::size_t step) {
  if (step < 1) throw ArgumentError("adam_step: step index starts at 1");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (auto* p : net.params()) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      const double m = cfg.beta1 * p->adam_m[i] + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * p->adam_v[i] + (1.0 - cfg.beta2) * g * g;
      p->adam_m[i] = static_cast<T>(m);
      p->adam_v[i] = static_cast<T>(v);
      const double update = cfg.learning_rate * (m / c1) / (std::sqrt(v / c2) + cfg.epsilon);
      p->value.values[i] = static_cast<T>(p->value.values[i] - update);
    }
  }
}

}  // namespace yoho
