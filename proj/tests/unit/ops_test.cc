// Copyright 2026 The BRAN Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bran/ops.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bran/error.h"
#include "test_util.h"

namespace bran {
namespace {

using testing::OpGradientError;
using testing::RandomTensor;

TEST(LogSumExpTest, SmallVector) {
  Tape tape;
  Var x = tape.Constant(Tensor({3}, {1.0, 2.0, 3.0}));
  const double expected = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  EXPECT_NEAR(LogSumExp(x, 0).value().item(), expected, 1e-12);
  EXPECT_NEAR(LogSumExp(x, 0).value().item(), 3.40760596444438, 1e-12);
}

TEST(LogSumExpTest, LargeValuesStayFinite) {
  Tape tape;
  Var x = tape.Constant(Tensor({2}, {1000.0, 1000.0}));
  EXPECT_NEAR(LogSumExp(x, 0).value().item(), 1000.0 + std::log(2.0), 1e-9);
}

TEST(LogSumExpTest, ReducesRequestedAxis) {
  Tape tape;
  Var x = tape.Constant(Tensor({2, 3}, {0, 0, 0, 1, 2, 3}));
  const Tensor rows = LogSumExp(x, 1).value();
  ASSERT_EQ(rows.shape(), Shape({2}));
  EXPECT_NEAR(rows[0], std::log(3.0), 1e-12);
  const Tensor cols = LogSumExp(x, 0).value();
  ASSERT_EQ(cols.shape(), Shape({3}));
  EXPECT_NEAR(cols[2], std::log(1.0 + std::exp(3.0)), 1e-12);
}

TEST(SoftmaxTest, RowsSumToOne) {
  Tape tape;
  Var x = tape.Constant(Tensor({2, 3}, {1, 2, 3, -5, 0, 5}));
  const Tensor p = Softmax(x, 1).value();
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_NEAR(p[3] + p[4] + p[5], 1.0, 1e-12);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(p[2], std::exp(3.0) / z, 1e-12);
}

TEST(SoftmaxTest, EqualLogitsAreUniform) {
  Tape tape;
  const Tensor p = Softmax(tape.Constant(Tensor({4}, 7.5)), 0).value();
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(MatMulTest, MatchesLoops) {
  std::mt19937_64 rng(1);
  const Tensor a = RandomTensor({3, 4}, rng), b = RandomTensor({4, 2}, rng);
  Tape tape;
  const Tensor c = MatMul(tape.Constant(a), tape.Constant(b)).value();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a.at({i, k}) * b.at({k, j});
      EXPECT_NEAR(c.at({i, j}), s, 1e-12);
    }
  }
}

TEST(MatMulTest, ShapeMismatchThrows) {
  Tape tape;
  EXPECT_THROW(MatMul(tape.Constant(Tensor({2, 3})), tape.Constant(Tensor({2, 3}))),
               DimensionError);
}

TEST(Conv1dTest, HandComputedWidthThree) {
  // y_i = x_{i-1} - x_{i+1} with zero padding.
  Tape tape;
  Var x = tape.Constant(Tensor({3, 1}, {1, 2, 3}));
  Var k = tape.Constant(Tensor({3, 1, 1}, {1, 0, -1}));
  Var b = tape.Constant(Tensor({1}, {0.5}));
  const Tensor y = Conv1d(x, k, b).value();
  EXPECT_DOUBLE_EQ(y[0], -2.0 + 0.5);
  EXPECT_DOUBLE_EQ(y[1], 1.0 - 3.0 + 0.5);
  EXPECT_DOUBLE_EQ(y[2], 2.0 + 0.5);
}

TEST(Conv1dTest, MatchesDirectSum) {
  std::mt19937_64 rng(2);
  const int n = 6, cin = 3, cout = 4, w = 5;
  const Tensor x = RandomTensor({n, cin}, rng), k = RandomTensor({w, cin, cout}, rng),
               b = RandomTensor({cout}, rng);
  Tape tape;
  const Tensor y = Conv1d(tape.Constant(x), tape.Constant(k), tape.Constant(b)).value();
  for (int i = 0; i < n; ++i) {
    for (int o = 0; o < cout; ++o) {
      double s = b[o];
      for (int t = 0; t < w; ++t) {
        const int src = i + t - w / 2;
        if (src < 0 || src >= n) continue;
        for (int c = 0; c < cin; ++c) s += x.at({src, c}) * k.at({t, c, o});
      }
      EXPECT_NEAR(y.at({i, o}), s, 1e-12);
    }
  }
}

TEST(Conv1dTest, EvenWidthThrows) {
  Tape tape;
  EXPECT_THROW(Conv1d(tape.Constant(Tensor({4, 2})), tape.Constant(Tensor({2, 2, 2})),
                      tape.Constant(Tensor({2}))),
               DimensionError);
}

TEST(LayerNormTest, UnitGainGivesStandardizedRows) {
  std::mt19937_64 rng(3);
  Tape tape;
  Var x = tape.Constant(RandomTensor({4, 16}, rng, 3.0));
  const Tensor y =
      LayerNorm(x, tape.Constant(Tensor({16}, 1.0)), tape.Constant(Tensor({16}, 0.0)), 0.0)
          .value();
  for (int r = 0; r < 4; ++r) {
    double mean = 0.0, var = 0.0;
    for (int c = 0; c < 16; ++c) mean += y.at({r, c});
    mean /= 16;
    for (int c = 0; c < 16; ++c) var += (y.at({r, c}) - mean) * (y.at({r, c}) - mean);
    var /= 16;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(LayerNormTest, EpsilonShrinksVarianceByKnownFactor) {
  Tape tape;
  const Tensor in({1, 4}, {1, 2, 3, 4});
  const Tensor y = LayerNorm(tape.Constant(in), tape.Constant(Tensor({4}, 1.0)),
                             tape.Constant(Tensor({4}, 0.0)))
                       .value();
  const double raw_var = 1.25;
  double var = 0.0;
  for (double v : y.values()) var += v * v;
  var /= 4;
  EXPECT_NEAR(var, raw_var / (raw_var + kLayerNormEpsilon), 1e-14);
}

TEST(ConcatTest, JoinsAlongAxis) {
  Tape tape;
  std::vector<Var> parts = {tape.Constant(Tensor({2, 1}, {1, 2})),
                            tape.Constant(Tensor({2, 2}, {3, 4, 5, 6}))};
  const Tensor c = Concat(parts, 1).value();
  EXPECT_EQ(c, Tensor({2, 3}, {1, 3, 4, 2, 5, 6}));
  const Tensor r = Concat(std::vector<Var>{parts[0], parts[0]}, 0).value();
  EXPECT_EQ(r, Tensor({4, 1}, {1, 2, 1, 2}));
}

TEST(StackTest, AddsTrailingAxis) {
  Tape tape;
  std::vector<Var> parts = {tape.Constant(Tensor({2}, {1, 2})), tape.Constant(Tensor({2}, {3, 4}))};
  EXPECT_EQ(Stack(parts).value(), Tensor({2, 2}, {1, 3, 2, 4}));
}

TEST(EmbeddingLookupTest, BadIdThrows) {
  Tape tape;
  Var table = tape.Constant(Tensor({3, 2}));
  const std::vector<int> ids = {0, 3};
  EXPECT_THROW(EmbeddingLookup(table, ids), LookupError);
}

TEST(SoftmaxCrossEntropyTest, MatchesScalarFormula) {
  Tape tape;
  Var logits = tape.Constant(Tensor({2, 2}, {0.3, -1.2, 2.0, 0.5}));
  const std::vector<int> labels = {1, 0};
  const std::vector<uint8_t> mask = {1, 1};
  auto ce = [](double a, double b, int y) {
    const double z = std::log(std::exp(a) + std::exp(b));
    return z - (y == 0 ? a : b);
  };
  const double expected = (ce(0.3, -1.2, 1) + ce(2.0, 0.5, 0)) / 2.0;
  EXPECT_NEAR(SoftmaxCrossEntropy(logits, labels, mask).value().item(), expected, 1e-12);
  EXPECT_NEAR(SoftmaxCrossEntropy(logits, labels, mask, 4.0).value().item(), expected / 2.0,
              1e-12);
}

TEST(SoftmaxCrossEntropyTest, AllMaskedThrows) {
  Tape tape;
  Var logits = tape.Constant(Tensor({1, 2}));
  const std::vector<int> labels = {0};
  const std::vector<uint8_t> mask = {0};
  EXPECT_THROW(SoftmaxCrossEntropy(logits, labels, mask), ContractError);
}

// --- gradients ---------------------------------------------------------------

constexpr double kOpTolerance = 1e-7;

TEST(OpGradientTest, MatMulAndTranspose) {
  std::mt19937_64 rng(11);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return MatMul(v[0], v[1]); },
                            {RandomTensor({3, 4}, rng), RandomTensor({4, 2}, rng)}),
            kOpTolerance);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return Transpose(v[0]); },
                            {RandomTensor({3, 4}, rng)}),
            kOpTolerance);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return BatchedMatMul(v[0], v[1]); },
                            {RandomTensor({2, 3, 4}, rng), RandomTensor({2, 4, 2}, rng)}),
            kOpTolerance);
}

TEST(OpGradientTest, Elementwise) {
  std::mt19937_64 rng(12);
  const Tensor a = RandomTensor({3, 4}, rng), b = RandomTensor({3, 4}, rng);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return Add(v[0], v[1]); }, {a, b}),
            kOpTolerance);
  EXPECT_LT(
      OpGradientError([](Tape&, std::vector<Var>& v) { return Multiply(v[0], v[1]); }, {a, b}),
      kOpTolerance);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return Scale(v[0], -2.5); }, {a}),
            kOpTolerance);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return AddBias(v[0], v[1]); },
                            {a, RandomTensor({4}, rng)}),
            kOpTolerance);
  // Keep inputs away from the kink.
  Tensor away = a;
  for (double& x : away.values()) x += x >= 0 ? 0.1 : -0.1;
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return Relu(v[0]); }, {away}),
            kOpTolerance);
}

TEST(OpGradientTest, SoftmaxAndLogSumExp) {
  std::mt19937_64 rng(13);
  const Tensor a = RandomTensor({3, 4}, rng, 2.0);
  for (int axis : {0, 1}) {
    EXPECT_LT(OpGradientError([axis](Tape&, std::vector<Var>& v) { return Softmax(v[0], axis); },
                              {a}),
              kOpTolerance);
    EXPECT_LT(
        OpGradientError([axis](Tape&, std::vector<Var>& v) { return LogSumExp(v[0], axis); },
                        {a}),
        kOpTolerance);
  }
}

TEST(OpGradientTest, LayerNormAndConv) {
  std::mt19937_64 rng(14);
  EXPECT_LT(OpGradientError(
                [](Tape&, std::vector<Var>& v) { return LayerNorm(v[0], v[1], v[2]); },
                {RandomTensor({3, 6}, rng), RandomTensor({6}, rng), RandomTensor({6}, rng)}),
            kOpTolerance);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return Conv1d(v[0], v[1], v[2]); },
                            {RandomTensor({5, 3}, rng), RandomTensor({5, 3, 2}, rng),
                             RandomTensor({2}, rng)}),
            kOpTolerance);
}

TEST(OpGradientTest, Structural) {
  std::mt19937_64 rng(15);
  const Tensor a = RandomTensor({4, 3}, rng), b = RandomTensor({2, 3}, rng);
  EXPECT_LT(OpGradientError(
                [](Tape&, std::vector<Var>& v) {
                  std::vector<Var> parts = {v[0], v[1], v[0]};
                  return Concat(parts, 0);
                },
                {a, b}),
            kOpTolerance);
  EXPECT_LT(OpGradientError(
                [](Tape&, std::vector<Var>& v) {
                  std::vector<Var> parts = {v[0], v[0]};
                  return Stack(parts);
                },
                {a}),
            kOpTolerance);
  EXPECT_LT(OpGradientError(
                [](Tape&, std::vector<Var>& v) {
                  const std::vector<int> ids = {3, 0, 3, 1};
                  return EmbeddingLookup(v[0], ids);
                },
                {a}),
            kOpTolerance);
  EXPECT_LT(OpGradientError(
                [](Tape&, std::vector<Var>& v) {
                  const std::vector<int64_t> rows = {2, 2, 0};
                  return GatherRows(v[0], rows);
                },
                {a}),
            kOpTolerance);
  EXPECT_LT(OpGradientError([](Tape&, std::vector<Var>& v) { return Select(v[0], 2); }, {a}),
            kOpTolerance);
  EXPECT_LT(
      OpGradientError([](Tape&, std::vector<Var>& v) { return Reshape(v[0], {2, 6}); }, {a}),
      kOpTolerance);
  EXPECT_LT(OpGradientError(
                [](Tape&, std::vector<Var>& v) {
                  const std::vector<int> labels = {1, 0, 2, 2};
                  const std::vector<uint8_t> mask = {1, 0, 1, 1};
                  return SoftmaxCrossEntropy(v[0], labels, mask);
                },
                {a}),
            kOpTolerance);
}

}  // namespace
}  // namespace bran
