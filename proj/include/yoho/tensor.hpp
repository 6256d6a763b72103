// yoho/tensor.hpp

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

#include <cstddef>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "yoho/common.hpp"

namespace yoho {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << ")";
  return os.str();
}

/// Dense row-major tensor. Activations inside the network are NHWC:
/// (batch, time, frequency, channels).
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T{}) : shape(std::move(s)), values(shape_size(shape), fill) {}
  Tensor(Shape s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    if (values.size() != shape_size(shape)) throw ShapeError("tensor: values do not match shape " + shape_string(shape));
  }

  std::size_t size() const { return values.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }
  T* data() { return values.data(); }
  const T* data() const { return values.data(); }

  void reshape(Shape s) {
    if (shape_size(s) != values.size())
      throw ShapeError("reshape " + shape_string(shape) + " -> " + shape_string(s) + " changes element count");
    shape = std::move(s);
  }
};

/// A trainable tensor with its gradient and Adam moments.
template <typename T>
struct Param {
  enum class L2Group { kNone, kFirstConv, kRest };

  std::string name;
  Tensor<T> value;
  std::vector<T> grad;
  std::vector<T> adam_m;
  std::vector<T> adam_v;
  L2Group l2_group = L2Group::kNone;

  Param(std::string n, Shape s, L2Group g = L2Group::kNone)
      : name(std::move(n)), value(std::move(s)), grad(value.size()), adam_m(value.size()), adam_v(value.size()),
        l2_group(g) {}

  std::size_t size() const { return value.size(); }
};

}  // namespace yoho
