// Copyright 2026 The sbtts Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/nnet/generator.hpp"
#include "sbtts/nnet/kernels.hpp"
#include "sbtts/nnet/layers.hpp"
#include "test_util.hpp"

namespace sbtts::nn {
namespace {

using testing::random_matrix;

TEST(DilatedConv, IdentityKernel) {
  std::mt19937_64 gen(1);
  const Mat<double> x = random_matrix(3, 10, gen);
  const Mat<double> eye = Mat<double>::Identity(3, 3);
  const Mat<double> y = causal_dilated_conv(x, Mat<double>::Zero(3, 3).eval(), eye, 2);
  EXPECT_EQ((y - x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DilatedConv, ImpulseResponse) {
  Mat<double> x = Mat<double>::Zero(1, 16);
  x(0, 5) = 1.0;
  const Mat<double> a = Mat<double>::Constant(1, 1, 0.25), b = Mat<double>::Constant(1, 1, -2.0);
  const Mat<double> y = causal_dilated_conv(x, a, b, 4);
  for (Index t = 0; t < 16; ++t) {
    const double expect = t == 5 ? -2.0 : t == 9 ? 0.25 : 0.0;
    EXPECT_EQ(y(0, t), expect) << t;
  }
}

TEST(DilatedConv, MatchesNaiveLoop) {
  std::mt19937_64 gen(2);
  for (Index d : {1, 2, 8}) {
    const Mat<double> x = random_matrix(4, 23, gen), wp = random_matrix(5, 4, gen),
                      wn = random_matrix(5, 4, gen);
    const Mat<double> y = causal_dilated_conv(x, wp, wn, d);
    for (Index c = 0; c < 5; ++c) {
      for (Index t = 0; t < 23; ++t) {
        double acc = 0.0;
        for (Index i = 0; i < 4; ++i) {
          acc += wn(c, i) * x(i, t);
          if (t - d >= 0) acc += wp(c, i) * x(i, t - d);
        }
        EXPECT_NEAR(y(c, t), acc, 1e-12);
      }
    }
  }
  EXPECT_THROW(causal_dilated_conv(Mat<double>::Zero(2, 4).eval(), Mat<double>::Zero(1, 3).eval(),
                                   Mat<double>::Zero(1, 3).eval(), 1),
               StructuralError);
}

TEST(GatedUnit, ZeroWeightsPassThrough) {
  std::mt19937_64 gen(3);
  const auto layer = DilatedLayer<double>::zeros(4, 2, 2);
  const Mat<double> x = random_matrix(4, 12, gen), h = random_matrix(2, 3, gen);
  Mat<double> res, skip;
  gated_unit(layer, x, h, 4, res, skip);
  EXPECT_EQ((res - x).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(skip.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GatedUnit, ClosedGateLeavesResidual) {
  std::mt19937_64 gen(4);
  auto layer = DilatedLayer<double>::zeros(4, 2, 1);
  layer.for_each("", [&](const std::string&, Mat<double>& m) { m = random_matrix(m.rows(), m.cols(), gen, 0.3); });
  layer.bias.bottomRows(4).setConstant(-40.0);
  const Mat<double> x = random_matrix(4, 12, gen), h = random_matrix(2, 3, gen);
  Mat<double> res, skip;
  gated_unit(layer, x, h, 4, res, skip);
  // With z = 0 only the projection biases remain.
  for (Index t = 0; t < 12; ++t) {
    EXPECT_LT((res.col(t) - x.col(t) - layer.res_bias).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(GatedUnit, MisalignedConditioningIsStructural) {
  const auto layer = DilatedLayer<double>::zeros(2, 1, 1);
  Mat<double> res, skip;
  EXPECT_THROW(gated_unit(layer, Mat<double>::Zero(2, 100).eval(), Mat<double>::Zero(1, 2).eval(),
                          10, res, skip),
               StructuralError);
  EXPECT_THROW(DilatedLayer<double>::zeros(2, 1, 3), ConfigError);
}

TEST(Gradients, DilatedConv) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto r = testing::check_dilated_conv(seed);
    EXPECT_LT(r.worst, 1e-4) << r.shape;
  }
}

TEST(Gradients, GatedUnit) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto r = testing::check_gated_unit(seed);
    EXPECT_LT(r.worst, 1e-4) << r.shape;
  }
}

TEST(Gradients, GeneratorAndHead) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto r = testing::check_generator(seed);
    EXPECT_LT(r.worst, 1e-4) << r.shape;
  }
}

TEST(Gradients, EncoderThroughSubbandLoss) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto r = testing::check_encoder(seed);
    EXPECT_LT(r.worst, 1e-4) << r.shape;
  }
}

TEST(Generator, CausalityExhaustive) {
  GeneratorConfig cfg{3, 5, 2, {1, 2, 4}};
  const auto model = testing::random_generator(cfg, 5);
  std::mt19937_64 gen(5);
  const Index t = 14;
  const auto x = testing::random_classes(t, 5, gen);
  const Mat<double> h = random_matrix(2, 4, gen);
  const Mat<double> base = forward_teacher(model, std::span<const int>(x), h, 4);
  for (Index j = 0; j < t; ++j) {
    auto y = x;
    y[j] = (y[j] + 2) % 5;
    const Mat<double> probe = forward_teacher(model, std::span<const int>(y), h, 4);
    for (Index k = 0; k <= j; ++k) {
      EXPECT_EQ((probe.col(k) - base.col(k)).cwiseAbs().maxCoeff(), 0.0) << "x[" << j << "] -> logits[" << k << "]";
    }
  }
}

TEST(Generator, ReceptiveFieldSubbandSchedule) {
  const GeneratorConfig cfg{4, 64, 1, {1, 2, 4, 8, 16}};
  EXPECT_EQ(receptive_field(std::span<const Index>(cfg.dilations)), 32);
  const auto model = testing::random_generator(cfg, 6, 0.5);
  const Index t = 60;
  std::set<Index> expect;
  for (Index j = t - 32; j < t; ++j) expect.insert(j);
  EXPECT_EQ(testing::influence_set(model, t + 1, t, 6), expect);
  EXPECT_EQ(testing::jacobian_influence(model, t + 1, t, 6), expect);
}

TEST(Generator, ReceptiveFieldFullbandSchedule) {
  const GeneratorConfig cfg{4, 300, 1, dilation_stacks(4, 6)};
  ASSERT_EQ(cfg.dilations.size(), 24u);
  EXPECT_EQ(receptive_field(std::span<const Index>(cfg.dilations)), 253);
  const auto model = testing::random_generator(cfg, 7, 0.5);
  const Index t = 280;
  std::set<Index> expect;
  for (Index j = t - 253; j < t; ++j) expect.insert(j);
  EXPECT_EQ(testing::jacobian_influence(model, t + 1, t, 7), expect);
}

TEST(Generator, SoftmaxSumsToOne) {
  const GeneratorConfig cfg{4, 16, 2, {1, 2}};
  const auto model = testing::random_generator(cfg, 8);
  std::mt19937_64 gen(8);
  const auto x = testing::random_classes(40, 16, gen);
  const Mat<double> logits = forward_teacher(model, std::span<const int>(x), random_matrix(2, 10, gen), 4);
  std::vector<double> lp(16);
  for (Index t = 0; t < logits.cols(); ++t) {
    log_softmax(logits.col(t).data(), 16, lp.data());
    double s = 0.0;
    for (double v : lp) s += std::exp(v);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Encoder, ZeroWeightsGiveConstantBiasField) {
  auto enc = Encoder<double>::zeros(70, 3);
  enc.biases[2] << 0.5, -1.0, 2.0;
  const Mat<double> h = encode_condition(enc, {0, 5, 9, 69, 1});
  ASSERT_EQ(h.cols(), 5);
  for (Index t = 0; t < 5; ++t) {
    EXPECT_DOUBLE_EQ(h(0, t), std::tanh(0.5));
    EXPECT_DOUBLE_EQ(h(1, t), std::tanh(-1.0));
    EXPECT_DOUBLE_EQ(h(2, t), std::tanh(2.0));
  }
}

TEST(Encoder, PreservesFrameCount) {
  SplitMix64 rng(3);
  auto enc = Encoder<double>::zeros(70, 4);
  enc.init(rng);
  EXPECT_EQ(encode_condition(enc, {7}).cols(), 1);
  EXPECT_EQ(encode_condition(enc, std::vector<int>(33, 2)).cols(), 33);
  EXPECT_THROW(encode_condition(enc, {70}), FrontEndError);
}

TEST(Latents, UpsampleAndPool) {
  std::mt19937_64 gen(9);
  const Mat<double> h = random_matrix(3, 3, gen);
  EXPECT_EQ((upsample_latents(h, 1) - h).cwiseAbs().maxCoeff(), 0.0);
  const Mat<double> up = upsample_latents(h, 80);
  ASSERT_EQ(up.cols(), 240);
  for (Index t = 0; t < 80; ++t) EXPECT_EQ((up.col(t) - h.col(0)).cwiseAbs().maxCoeff(), 0.0);
  Mat<double> pooled = detail::pool_to_frames(up, 80, 3) / 80.0;
  EXPECT_LT((pooled - h).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(upsample_latents(h, 80, 250).cols(), 250);
}

}  // namespace
}  // namespace sbtts::nn
