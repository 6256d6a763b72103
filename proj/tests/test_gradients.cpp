// tests/test_gradients.cpp

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

#include "oracles.hpp"

namespace yoho {
namespace {

using Dims = std::pair<std::size_t, std::size_t>;

void expect_agreement(const test::GradientReport& r) {
  ASSERT_GE(r.probes.size(), 200u);
  for (const auto& p : r.probes)
    EXPECT_TRUE(test::gradients_agree(p.analytic, p.numeric))
        << p.name << "[" << p.index << "] analytic " << p.analytic << " numeric " << p.numeric;
  EXPECT_GT(r.nonzero, r.probes.size() / 2);
}

TEST(GradientCheck, StridedConvBatchNormDepthwiseDropoutHead) {
  Network<double> net = test::strided_mini_net();
  EXPECT_EQ(net.output_shape(), Dims(2, 6));
  expect_agreement(test::check_network_gradients(net, 21));
}

TEST(GradientCheck, FrequencyMaxPooling) {
  Network<double> net = test::pooled_mini_net();
  EXPECT_EQ(net.output_shape(), Dims(8, 6));
  expect_agreement(test::check_network_gradients(net, 22));
}

TEST(GradientCheck, LossGradientAlone) {
  expect_agreement(test::check_loss_gradients(24, 300));
}

TEST(GradientCheck, DropoutMaskFollowsSeed) {
  // The finite differences above rely on reseeding giving the same mask.
  Network<double> net = test::strided_mini_net();
  test::GradientProblem p = test::make_gradient_problem(net, 23);
  const double a = test::gradient_objective(net, p), b = test::gradient_objective(net, p);
  EXPECT_EQ(a, b);
  net.configure_dropout(test::kDropoutRate, test::kDropoutSeed + 1);
  Tensor<double> y = net.forward(p.x, Mode::kTraining);
  net.clear_caches();
  EXPECT_NE(yoho_loss<double>(y.values, p.target, 2) + net.l2_penalty(p.reg), a);
}

}  // namespace
}  // namespace yoho
