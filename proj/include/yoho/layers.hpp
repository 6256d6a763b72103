// yoho/layers.hpp

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
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "yoho/tensor.hpp"

namespace yoho {

enum class Mode { kInference, kTraining };

enum class LayerKind {
  kConv2d,
  kDepthwiseConv2d,
  kBatchNorm,
  kRelu,
  kSigmoid,
  kReshape,
  kConv1d,
  kMaxPool2d,
  kSpatialDropout,
};

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kDepthwiseConv2d: return "depthwise_conv2d";
    case LayerKind::kBatchNorm: return "batch_norm";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kReshape: return "reshape";
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kMaxPool2d: return "max_pool2d";
    case LayerKind::kSpatialDropout: return "spatial_dropout";
  }
  return "?";
}

/// Per-example activation shape (time, frequency, channels).
struct Shape3 {
  std::size_t h = 0, w = 0, c = 0;
  bool operator==(const Shape3&) const = default;
};

/// TensorFlow "same" padding along one axis.
struct SamePadding {
  std::size_t out = 0;
  std::int64_t before = 0;
};

inline SamePadding same_padding(std::size_t in, std::size_t kernel, std::size_t stride) {
  SamePadding p;
  p.out = (in + stride - 1) / stride;
  std::int64_t total = static_cast<std::int64_t>((p.out - 1) * stride + kernel) - static_cast<std::int64_t>(in);
  p.before = std::max<std::int64_t>(total, 0) / 2;
  return p;
}

template <typename T>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual Shape3 output_shape(Shape3 in) const = 0;
  /// x is (batch, h, w, c); training mode caches what backward needs.
  virtual Tensor<T> forward(Tensor<T> x, Mode mode) = 0;
  /// Takes d(loss)/d(output), accumulates parameter gradients, returns d(loss)/d(input).
  virtual Tensor<T> backward(Tensor<T> dy) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  /// Non-trainable state saved with checkpoints (batch-norm running stats).
  virtual std::vector<std::pair<std::string, Tensor<T>*>> buffers() { return {}; }
  virtual void clear_cache() {}

  const std::string& name() const { return name_; }

 protected:
  void require_cache(bool has) const {
    if (!has) throw Error(name_ + ": backward called without a training-mode forward");
  }
  static Shape3 shape3(const Tensor<T>& x) {
    if (x.rank() != 4) throw ShapeError("expected a rank-4 activation, got " + shape_string(x.shape));
    return {x.dim(1), x.dim(2), x.dim(3)};
  }

 private:
  std::string name_;
};

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

/// Dense 2D convolution with same padding, weights (kh, kw, cin, cout) and a
/// bias. Also serves as the kernel-1 Conv1D head after the reshape, where the
/// activation is (batch, time, 1, features).
template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(std::string name, std::size_t cin, std::size_t cout, std::size_t kh, std::size_t kw, std::size_t sh,
         std::size_t sw, typename Param<T>::L2Group l2, LayerKind kind = LayerKind::kConv2d)
      : Layer<T>(name),
        cin_(cin), cout_(cout), kh_(kh), kw_(kw), sh_(sh), sw_(sw), kind_(kind),
        weight_(name + "/kernel", {kh, kw, cin, cout}, l2),
        bias_(name + "/bias", {cout}) {
    if (sh < 1 || sh > 2 || sw < 1 || sw > 2) throw ArgumentError(name + ": strides must be 1 or 2");
    if (kind == LayerKind::kConv1d && (kh != 1 || kw != 1 || sh != 1 || sw != 1))
      throw ArgumentError(name + ": conv1d head supports kernel width 1 only");
  }

  LayerKind kind() const override { return kind_; }
  Shape3 output_shape(Shape3 in) const override {
    return {same_padding(in.h, kh_, sh_).out, same_padding(in.w, kw_, sw_).out, cout_};
  }
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  std::size_t fan_in() const { return kh_ * kw_ * cin_; }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    const Shape3 in = this->shape3(x);
    if (in.c != cin_) throw ShapeError(this->name() + ": expected " + std::to_string(cin_) + " input channels");
    const std::size_t batch = x.dim(0);
    const auto ph = same_padding(in.h, kh_, sh_), pw = same_padding(in.w, kw_, sw_);
    const std::size_t rows = batch * ph.out * pw.out, k = kh_ * kw_ * cin_;
    std::vector<T> cols;
    if (!pointwise()) cols = im2col(x, in, ph, pw);
    const T* a = pointwise() ? x.data() : cols.data();

    Tensor<T> y({batch, ph.out, pw.out, cout_});
    Eigen::Map<const RowMatrix<T>> am(a, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
    Eigen::Map<const RowMatrix<T>> wm(weight_.value.data(), static_cast<Eigen::Index>(k),
                                      static_cast<Eigen::Index>(cout_));
    Eigen::Map<RowMatrix<T>> ym(y.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cout_));
    ym.noalias() = am * wm;
    ym.rowwise() += Eigen::Map<const RowVector<T>>(bias_.value.data(), static_cast<Eigen::Index>(cout_));

    if (mode == Mode::kTraining) {
      in_shape_ = x.shape;
      cache_ = pointwise() ? std::move(x.values) : std::move(cols);
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    const Shape3 in{in_shape_[1], in_shape_[2], in_shape_[3]};
    const std::size_t batch = in_shape_[0];
    const auto ph = same_padding(in.h, kh_, sh_), pw = same_padding(in.w, kw_, sw_);
    const auto rows = static_cast<Eigen::Index>(batch * ph.out * pw.out);
    const auto k = static_cast<Eigen::Index>(kh_ * kw_ * cin_);
    const auto co = static_cast<Eigen::Index>(cout_);
    if (dy.size() != static_cast<std::size_t>(rows * co)) throw ShapeError(this->name() + ": gradient shape mismatch");

    Eigen::Map<const RowMatrix<T>> am(cache_.data(), rows, k);
    Eigen::Map<const RowMatrix<T>> dym(dy.data(), rows, co);
    Eigen::Map<RowMatrix<T>> dwm(weight_.grad.data(), k, co);
    dwm.noalias() += am.transpose() * dym;
    // Plain row loop: Eigen's vectorized reductions peel by address alignment,
    // which would make the sum order (and the result) vary between runs.
    for (Eigen::Index r = 0; r < rows; ++r) {
      const T* g = dy.data() + r * co;
      for (Eigen::Index c = 0; c < co; ++c) bias_.grad[static_cast<std::size_t>(c)] += g[c];
    }

    Eigen::Map<const RowMatrix<T>> wm(weight_.value.data(), k, co);
    std::vector<T> dcols(static_cast<std::size_t>(rows * k));
    Eigen::Map<RowMatrix<T>> dam(dcols.data(), rows, k);
    dam.noalias() = dym * wm.transpose();
    has_cache_ = false;
    cache_.clear();
    if (pointwise()) return Tensor<T>(in_shape_, std::move(dcols));
    return col2im(dcols, batch, in, ph, pw);
  }

  void clear_cache() override {
    cache_.clear();
    cache_.shrink_to_fit();
    has_cache_ = false;
  }

 private:
  bool pointwise() const { return kh_ == 1 && kw_ == 1 && sh_ == 1 && sw_ == 1; }

  std::vector<T> im2col(const Tensor<T>& x, Shape3 in, SamePadding ph, SamePadding pw) const {
    const std::size_t batch = x.dim(0), k = kh_ * kw_ * cin_;
    std::vector<T> cols(batch * ph.out * pw.out * k, T(0));
    parallel_for(batch, [&](std::size_t b) {
      for (std::size_t oh = 0; oh < ph.out; ++oh)
        for (std::size_t ow = 0; ow < pw.out; ++ow) {
          T* row = &cols[((b * ph.out + oh) * pw.out + ow) * k];
          for (std::size_t i = 0; i < kh_; ++i) {
            const std::int64_t ih = static_cast<std::int64_t>(oh * sh_ + i) - ph.before;
            if (ih < 0 || ih >= static_cast<std::int64_t>(in.h)) continue;
            for (std::size_t j = 0; j < kw_; ++j) {
              const std::int64_t iw = static_cast<std::int64_t>(ow * sw_ + j) - pw.before;
              if (iw < 0 || iw >= static_cast<std::int64_t>(in.w)) continue;
              const T* src = &x.values[((b * in.h + ih) * in.w + iw) * in.c];
              std::copy(src, src + cin_, row + (i * kw_ + j) * cin_);
            }
          }
        }
    });
    return cols;
  }

  Tensor<T> col2im(const std::vector<T>& dcols, std::size_t batch, Shape3 in, SamePadding ph, SamePadding pw) const {
    const std::size_t k = kh_ * kw_ * cin_;
    Tensor<T> dx({batch, in.h, in.w, in.c});
    parallel_for(batch, [&](std::size_t b) {
      for (std::size_t oh = 0; oh < ph.out; ++oh)
        for (std::size_t ow = 0; ow < pw.out; ++ow) {
          const T* row = &dcols[((b * ph.out + oh) * pw.out + ow) * k];
          for (std::size_t i = 0; i < kh_; ++i) {
            const std::int64_t ih = static_cast<std::int64_t>(oh * sh_ + i) - ph.before;
            if (ih < 0 || ih >= static_cast<std::int64_t>(in.h)) continue;
            for (std::size_t j = 0; j < kw_; ++j) {
              const std::int64_t iw = static_cast<std::int64_t>(ow * sw_ + j) - pw.before;
              if (iw < 0 || iw >= static_cast<std::int64_t>(in.w)) continue;
              T* dst = &dx.values[((b * in.h + ih) * in.w + iw) * in.c];
              const T* src = row + (i * kw_ + j) * cin_;
              for (std::size_t c = 0; c < cin_; ++c) dst[c] += src[c];
            }
          }
        }
    });
    return dx;
  }

  std::size_t cin_, cout_, kh_, kw_, sh_, sw_;
  LayerKind kind_;
  Param<T> weight_, bias_;
  Shape in_shape_;
  std::vector<T> cache_;
  bool has_cache_ = false;
};

/// Per-channel 2D convolution (depth multiplier 1), weights (kh, kw, c), bias.
template <typename T>
class DepthwiseConv2d : public Layer<T> {
 public:
  DepthwiseConv2d(std::string name, std::size_t channels, std::size_t kh, std::size_t kw, std::size_t sh,
                  std::size_t sw, typename Param<T>::L2Group l2)
      : Layer<T>(name),
        c_(channels), kh_(kh), kw_(kw), sh_(sh), sw_(sw),
        weight_(name + "/kernel", {kh, kw, channels}, l2),
        bias_(name + "/bias", {channels}) {
    if (sh < 1 || sh > 2 || sw < 1 || sw > 2) throw ArgumentError(name + ": strides must be 1 or 2");
  }

  LayerKind kind() const override { return LayerKind::kDepthwiseConv2d; }
  Shape3 output_shape(Shape3 in) const override {
    return {same_padding(in.h, kh_, sh_).out, same_padding(in.w, kw_, sw_).out, c_};
  }
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  Param<T>& weight() { return weight_; }
  std::size_t fan_in() const { return kh_ * kw_; }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    const Shape3 in = this->shape3(x);
    if (in.c != c_) throw ShapeError(this->name() + ": channel mismatch");
    const std::size_t batch = x.dim(0);
    const auto ph = same_padding(in.h, kh_, sh_), pw = same_padding(in.w, kw_, sw_);
    Tensor<T> y({batch, ph.out, pw.out, c_});
    const T* w = weight_.value.data();
    const T* bias = bias_.value.data();
    parallel_for(batch, [&](std::size_t b) {
      for (std::size_t oh = 0; oh < ph.out; ++oh)
        for (std::size_t ow = 0; ow < pw.out; ++ow) {
          T* out = &y.values[((b * ph.out + oh) * pw.out + ow) * c_];
          std::copy(bias, bias + c_, out);
          for (std::size_t i = 0; i < kh_; ++i) {
            const std::int64_t ih = static_cast<std::int64_t>(oh * sh_ + i) - ph.before;
            if (ih < 0 || ih >= static_cast<std::int64_t>(in.h)) continue;
            for (std::size_t j = 0; j < kw_; ++j) {
              const std::int64_t iw = static_cast<std::int64_t>(ow * sw_ + j) - pw.before;
              if (iw < 0 || iw >= static_cast<std::int64_t>(in.w)) continue;
              const T* src = &x.values[((b * in.h + ih) * in.w + iw) * c_];
              const T* wk = w + (i * kw_ + j) * c_;
              for (std::size_t c = 0; c < c_; ++c) out[c] += src[c] * wk[c];
            }
          }
        }
    });
    if (mode == Mode::kTraining) {
      input_ = std::move(x);
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    const Shape3 in = this->shape3(input_);
    const std::size_t batch = input_.dim(0);
    const auto ph = same_padding(in.h, kh_, sh_), pw = same_padding(in.w, kw_, sw_);
    if (dy.size() != batch * ph.out * pw.out * c_) throw ShapeError(this->name() + ": gradient shape mismatch");
    Tensor<T> dx({batch, in.h, in.w, c_});
    const std::size_t nw = kh_ * kw_ * c_;
    // Per-example partial sums, reduced in example order below.
    std::vector<T> partial(batch * (nw + c_), T(0));
    const T* w = weight_.value.data();
    parallel_for(batch, [&](std::size_t b) {
      T* dw = &partial[b * (nw + c_)];
      T* db = dw + nw;
      for (std::size_t oh = 0; oh < ph.out; ++oh)
        for (std::size_t ow = 0; ow < pw.out; ++ow) {
          const T* g = &dy.values[((b * ph.out + oh) * pw.out + ow) * c_];
          for (std::size_t c = 0; c < c_; ++c) db[c] += g[c];
          for (std::size_t i = 0; i < kh_; ++i) {
            const std::int64_t ih = static_cast<std::int64_t>(oh * sh_ + i) - ph.before;
            if (ih < 0 || ih >= static_cast<std::int64_t>(in.h)) continue;
            for (std::size_t j = 0; j < kw_; ++j) {
              const std::int64_t iw = static_cast<std::int64_t>(ow * sw_ + j) - pw.before;
              if (iw < 0 || iw >= static_cast<std::int64_t>(in.w)) continue;
              const std::size_t off = ((b * in.h + ih) * in.w + iw) * c_;
              const T* src = &input_.values[off];
              T* dst = &dx.values[off];
              const T* wk = w + (i * kw_ + j) * c_;
              T* dwk = dw + (i * kw_ + j) * c_;
              for (std::size_t c = 0; c < c_; ++c) {
                dst[c] += g[c] * wk[c];
                dwk[c] += g[c] * src[c];
              }
            }
          }
        }
    });
    for (std::size_t b = 0; b < batch; ++b) {
      const T* dw = &partial[b * (nw + c_)];
      for (std::size_t i = 0; i < nw; ++i) weight_.grad[i] += dw[i];
      for (std::size_t c = 0; c < c_; ++c) bias_.grad[c] += dw[nw + c];
    }
    clear_cache();
    return dx;
  }

  void clear_cache() override {
    input_ = Tensor<T>();
    has_cache_ = false;
  }

 private:
  std::size_t c_, kh_, kw_, sh_, sw_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
  bool has_cache_ = false;
};

/// Batch normalization over (batch, h, w) per channel. Momentum 0.99,
/// epsilon 1e-3; inference uses the running statistics.
template <typename T>
class BatchNorm : public Layer<T> {
 public:
  static constexpr double kMomentum = 0.99;
  static constexpr double kEpsilon = 1e-3;

  BatchNorm(std::string name, std::size_t channels)
      : Layer<T>(name),
        c_(channels),
        gamma_(name + "/gamma", {channels}),
        beta_(name + "/beta", {channels}),
        running_mean_({channels}, T(0)),
        running_var_({channels}, T(1)) {
    std::fill(gamma_.value.values.begin(), gamma_.value.values.end(), T(1));
  }

  LayerKind kind() const override { return LayerKind::kBatchNorm; }
  Shape3 output_shape(Shape3 in) const override { return in; }
  std::vector<Param<T>*> params() override { return {&gamma_, &beta_}; }
  std::vector<std::pair<std::string, Tensor<T>*>> buffers() override {
    return {{this->name() + "/moving_mean", &running_mean_}, {this->name() + "/moving_variance", &running_var_}};
  }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    const Shape3 in = this->shape3(x);
    if (in.c != c_) throw ShapeError(this->name() + ": channel mismatch");
    const std::size_t n = x.size() / c_;
    const T* g = gamma_.value.data();
    const T* bt = beta_.value.data();
    if (mode == Mode::kInference) {
      std::vector<T> scale(c_), shift(c_);
      for (std::size_t c = 0; c < c_; ++c) {
        const double s = g[c] / std::sqrt(static_cast<double>(running_var_.values[c]) + kEpsilon);
        scale[c] = static_cast<T>(s);
        shift[c] = static_cast<T>(bt[c] - s * running_mean_.values[c]);
      }
      for (std::size_t r = 0; r < n; ++r) {
        T* row = &x.values[r * c_];
        for (std::size_t c = 0; c < c_; ++c) row[c] = row[c] * scale[c] + shift[c];
      }
      return x;
    }

    std::vector<double> mean(c_, 0.0), var(c_, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const T* row = &x.values[r * c_];
      for (std::size_t c = 0; c < c_; ++c) mean[c] += row[c];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const T* row = &x.values[r * c_];
      for (std::size_t c = 0; c < c_; ++c) {
        const double d = row[c] - mean[c];
        var[c] += d * d;
      }
    }
    for (auto& v : var) v /= static_cast<double>(n);
    inv_std_.assign(c_, T(0));
    std::vector<T> mean_t(c_);
    for (std::size_t c = 0; c < c_; ++c) {
      inv_std_[c] = static_cast<T>(1.0 / std::sqrt(var[c] + kEpsilon));
      mean_t[c] = static_cast<T>(mean[c]);
      running_mean_.values[c] = static_cast<T>(kMomentum * running_mean_.values[c] + (1.0 - kMomentum) * mean[c]);
      running_var_.values[c] = static_cast<T>(kMomentum * running_var_.values[c] + (1.0 - kMomentum) * var[c]);
    }
    // x becomes x_hat in place; y is built from it.
    Tensor<T> y(x.shape);
    for (std::size_t r = 0; r < n; ++r) {
      T* row = &x.values[r * c_];
      T* out = &y.values[r * c_];
      for (std::size_t c = 0; c < c_; ++c) {
        row[c] = (row[c] - mean_t[c]) * inv_std_[c];
        out[c] = g[c] * row[c] + bt[c];
      }
    }
    x_hat_ = std::move(x);
    has_cache_ = true;
    return y;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    if (dy.size() != x_hat_.size()) throw ShapeError(this->name() + ": gradient shape mismatch");
    const std::size_t n = dy.size() / c_;
    std::vector<double> dbeta(c_, 0.0), dgamma(c_, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const T* g = &dy.values[r * c_];
      const T* xh = &x_hat_.values[r * c_];
      for (std::size_t c = 0; c < c_; ++c) {
        dbeta[c] += g[c];
        dgamma[c] += static_cast<double>(g[c]) * xh[c];
      }
    }
    std::vector<T> k1(c_), k2(c_), k3(c_);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < c_; ++c) {
      gamma_.grad[c] += static_cast<T>(dgamma[c]);
      beta_.grad[c] += static_cast<T>(dbeta[c]);
      const double s = gamma_.value.values[c] * static_cast<double>(inv_std_[c]);
      k1[c] = static_cast<T>(s);
      k2[c] = static_cast<T>(s * dbeta[c] * inv_n);
      k3[c] = static_cast<T>(s * dgamma[c] * inv_n);
    }
    for (std::size_t r = 0; r < n; ++r) {
      T* g = &dy.values[r * c_];
      const T* xh = &x_hat_.values[r * c_];
      for (std::size_t c = 0; c < c_; ++c) g[c] = k1[c] * g[c] - k2[c] - xh[c] * k3[c];
    }
    clear_cache();
    return dy;
  }

  void clear_cache() override {
    x_hat_ = Tensor<T>();
    has_cache_ = false;
  }

 private:
  std::size_t c_;
  Param<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> x_hat_;
  std::vector<T> inv_std_;
  bool has_cache_ = false;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  using Layer<T>::Layer;
  LayerKind kind() const override { return LayerKind::kRelu; }
  Shape3 output_shape(Shape3 in) const override { return in; }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    for (T& v : x.values) v = v > T(0) ? v : T(0);
    if (mode == Mode::kTraining) {
      mask_.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) mask_[i] = x.values[i] > T(0);
      has_cache_ = true;
    }
    return x;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    if (dy.size() != mask_.size()) throw ShapeError(this->name() + ": gradient shape mismatch");
    for (std::size_t i = 0; i < dy.size(); ++i)
      if (!mask_[i]) dy.values[i] = T(0);
    clear_cache();
    return dy;
  }

  void clear_cache() override {
    mask_.clear();
    has_cache_ = false;
  }

 private:
  std::vector<std::uint8_t> mask_;
  bool has_cache_ = false;
};

/// Logistic activation; outputs are kept strictly inside (0, 1).
template <typename T>
class Sigmoid : public Layer<T> {
 public:
  using Layer<T>::Layer;
  LayerKind kind() const override { return LayerKind::kSigmoid; }
  Shape3 output_shape(Shape3 in) const override { return in; }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    const T lo = std::numeric_limits<T>::min();
    const T hi = T(1) - std::numeric_limits<T>::epsilon() / 2;
    for (T& v : x.values) v = std::clamp(static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v)))), lo, hi);
    if (mode == Mode::kTraining) {
      out_ = x.values;
      has_cache_ = true;
    }
    return x;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    if (dy.size() != out_.size()) throw ShapeError(this->name() + ": gradient shape mismatch");
    for (std::size_t i = 0; i < dy.size(); ++i) dy.values[i] *= out_[i] * (T(1) - out_[i]);
    clear_cache();
    return dy;
  }

  void clear_cache() override {
    out_.clear();
    has_cache_ = false;
  }

 private:
  std::vector<T> out_;
  bool has_cache_ = false;
};

/// (batch, h, w, c) -> (batch, h, 1, w*c): flattens frequency and channels per step.
template <typename T>
class Reshape : public Layer<T> {
 public:
  using Layer<T>::Layer;
  LayerKind kind() const override { return LayerKind::kReshape; }
  Shape3 output_shape(Shape3 in) const override { return {in.h, 1, in.w * in.c}; }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    const Shape3 in = this->shape3(x);
    if (mode == Mode::kTraining) {
      in_shape_ = x.shape;
      has_cache_ = true;
    }
    x.reshape({x.dim(0), in.h, 1, in.w * in.c});
    return x;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    dy.reshape(in_shape_);
    has_cache_ = false;
    return dy;
  }

 private:
  Shape in_shape_;
  bool has_cache_ = false;
};

/// Max pooling with a (1, 2) window and stride over frequency, same padding.
template <typename T>
class MaxPoolFreq : public Layer<T> {
 public:
  using Layer<T>::Layer;
  LayerKind kind() const override { return LayerKind::kMaxPool2d; }
  Shape3 output_shape(Shape3 in) const override { return {in.h, (in.w + 1) / 2, in.c}; }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    const Shape3 in = this->shape3(x);
    const std::size_t batch = x.dim(0), wo = (in.w + 1) / 2;
    Tensor<T> y({batch, in.h, wo, in.c});
    if (mode == Mode::kTraining) argmax_.assign(y.size(), 0);
    const std::size_t rows = batch * in.h;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t o = 0; o < wo; ++o) {
        const std::size_t a = (r * in.w + 2 * o) * in.c;
        const bool pair = 2 * o + 1 < in.w;
        T* out = &y.values[(r * wo + o) * in.c];
        for (std::size_t c = 0; c < in.c; ++c) {
          std::size_t src = a + c;
          if (pair && x.values[a + in.c + c] > x.values[src]) src = a + in.c + c;
          out[c] = x.values[src];
          if (mode == Mode::kTraining) argmax_[(r * wo + o) * in.c + c] = static_cast<std::uint32_t>(src);
        }
      }
    if (mode == Mode::kTraining) {
      in_shape_ = x.shape;
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    if (dy.size() != argmax_.size()) throw ShapeError(this->name() + ": gradient shape mismatch");
    Tensor<T> dx(in_shape_);
    for (std::size_t i = 0; i < dy.size(); ++i) dx.values[argmax_[i]] += dy.values[i];
    clear_cache();
    return dx;
  }

  void clear_cache() override {
    argmax_.clear();
    has_cache_ = false;
  }

 private:
  Shape in_shape_;
  std::vector<std::uint32_t> argmax_;
  bool has_cache_ = false;
};

/// Drops whole channels per example during training (inverted scaling).
template <typename T>
class SpatialDropout : public Layer<T> {
 public:
  SpatialDropout(std::string name, double rate = 0.0, std::uint64_t seed = 0)
      : Layer<T>(std::move(name)), rate_(rate), rng_(seed) {}

  LayerKind kind() const override { return LayerKind::kSpatialDropout; }
  Shape3 output_shape(Shape3 in) const override { return in; }
  double rate() const { return rate_; }
  void configure(double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError(this->name() + ": rate must be in [0, 1)");
    rate_ = rate;
    rng_.seed(seed);
  }

  Tensor<T> forward(Tensor<T> x, Mode mode) override {
    active_ = mode == Mode::kTraining && rate_ > 0.0;
    if (mode == Mode::kTraining) has_cache_ = true;
    if (!active_) return x;
    const Shape3 in = this->shape3(x);
    const std::size_t batch = x.dim(0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    keep_.assign(batch * in.c, T(0));
    for (auto& k : keep_) k = u(rng_) >= rate_ ? scale : T(0);
    apply(x, in);
    return x;
  }

  Tensor<T> backward(Tensor<T> dy) override {
    this->require_cache(has_cache_);
    has_cache_ = false;
    if (!active_) return dy;
    apply(dy, this->shape3(dy));
    return dy;
  }

 private:
  void apply(Tensor<T>& x, Shape3 in) const {
    const std::size_t batch = x.dim(0), per = in.h * in.w;
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t p = 0; p < per; ++p) {
        T* row = &x.values[(b * per + p) * in.c];
        const T* k = &keep_[b * in.c];
        for (std::size_t c = 0; c < in.c; ++c) row[c] *= k[c];
      }
  }

  double rate_;
  std::mt19937_64 rng_;
  std::vector<T> keep_;
  bool active_ = false;
  bool has_cache_ = false;
};

}  // namespace yoho
