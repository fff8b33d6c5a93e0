// tests/ctc_test.cc

// Copyright 2026  The unitdsr Authors

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

#include <cmath>

#include "test_util.h"
#include "unitdsr/ctc.h"
#include "unitdsr/errors.h"
#include "unitdsr/random.h"

using namespace unitdsr;

namespace {

Matrix RandomLogits(Rng& rng, int T, int C, double scale = 2.0) {
  Matrix m(T, C);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = scale * (2 * UniformDouble(rng) - 1);
  return m;
}

// Collapse a frame path: merge repeats, drop blanks.
std::vector<int> Collapse(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (t > 0 && path[t] == path[t - 1]) continue;
    if (path[t] != blank) out.push_back(path[t]);
  }
  return out;
}

// -log of the summed probability of every path collapsing to target.
double BruteForceCtc(const Matrix& logits, const std::vector<int>& target) {
  const int T = static_cast<int>(logits.rows());
  const int C = static_cast<int>(logits.cols());
  Matrix prob(T, C);
  for (int t = 0; t < T; ++t) {
    double z = 0;
    for (int k = 0; k < C; ++k) z += std::exp(logits(t, k));
    for (int k = 0; k < C; ++k) prob(t, k) = std::exp(logits(t, k)) / z;
  }
  std::vector<int> path(T, 0);
  double total = 0;
  while (true) {
    if (Collapse(path, C - 1) == target) {
      double p = 1;
      for (int t = 0; t < T; ++t) p *= prob(t, path[t]);
      total += p;
    }
    int t = 0;
    while (t < T && ++path[t] == C) path[t++] = 0;
    if (t == T) break;
  }
  return -std::log(total);
}

}  // namespace

TEST(Ctc, SingleFrameUniformIsLn2) {
  const Matrix logits = Matrix::Zero(1, 2);
  EXPECT_NEAR(CtcForwardBackward(logits, std::vector<int>{0}).loss, std::log(2.0), 1e-12);
}

TEST(Ctc, InfeasibleTargets) {
  const Matrix logits = Matrix::Zero(2, 5);
  EXPECT_THROW(CtcForwardBackward(logits, std::vector<int>{0, 1, 2}), InfeasibleTargetError);
  // Repeats need a separating blank.
  EXPECT_THROW(CtcForwardBackward(logits, std::vector<int>{1, 1}), InfeasibleTargetError);
  EXPECT_NO_THROW(CtcForwardBackward(logits, std::vector<int>{1, 2}));
  EXPECT_THROW(CtcForwardBackward(logits, std::vector<int>{4}), UnitRangeError);
  EXPECT_EQ(CtcMinFrames(std::vector<int>{1, 1, 2, 2, 2}), 8);
}

TEST(Ctc, MatchesExhaustivePathEnumeration) {
  Rng rng(101);
  int checked = 0;
  while (checked < 300) {
    const int T = 1 + static_cast<int>(UniformIndex(rng, 6));
    const int K = 1 + static_cast<int>(UniformIndex(rng, 4));
    const int L = static_cast<int>(UniformIndex(rng, 4));
    std::vector<int> target(L);
    for (int& u : target) u = static_cast<int>(UniformIndex(rng, K));
    if (CtcMinFrames(target) > T) continue;
    const Matrix logits = RandomLogits(rng, T, K + 1);
    const double fast = CtcForwardBackward(logits, target, false).loss;
    const double slow = BruteForceCtc(logits, target);
    ASSERT_NEAR(fast, slow, 1e-9 * std::max(1.0, slow)) << "T=" << T << " K=" << K;
    ++checked;
  }
}

TEST(Ctc, GradientMatchesFiniteDifferences) {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 3 + static_cast<int>(UniformIndex(rng, 4));
    const int K = 2 + static_cast<int>(UniformIndex(rng, 3));
    std::vector<int> target = Dedup(std::vector<int>{
        static_cast<int>(UniformIndex(rng, K)), static_cast<int>(UniformIndex(rng, K)),
        static_cast<int>(UniformIndex(rng, K))}).units();
    const Matrix logits = RandomLogits(rng, T, K + 1);
    const double err = testing_util::MaxGradRelError(
        logits, [&](const nn::Var& x) { return CtcLoss(x, target); }, 1e-4);
    ASSERT_LT(err, 1e-3) << "trial " << trial;
  }
}

TEST(Ctc, GradientRowsSumToZero) {
  Rng rng(105);
  const Matrix logits = RandomLogits(rng, 8, 6);
  const CtcResult r = CtcForwardBackward(logits, std::vector<int>{1, 3, 1});
  for (Eigen::Index t = 0; t < r.grad.rows(); ++t)
    EXPECT_NEAR(r.grad.row(t).sum(), 0.0, 1e-12);
}

TEST(CtcGreedyDecode, Examples) {
  const int a = 0, b = 1, blank = 2;
  Matrix logits = Matrix::Zero(4, 3);
  const int path[] = {a, a, blank, b};
  for (int t = 0; t < 4; ++t) logits(t, path[t]) = 5.0;
  EXPECT_EQ(CtcGreedyDecode(logits).units(), (std::vector<int>{a, b}));
  Matrix blanks = Matrix::Zero(3, 3);
  blanks.col(blank).setConstant(1.0);
  EXPECT_TRUE(CtcGreedyDecode(blanks).empty());
}

TEST(CtcGreedyDecode, AgreesWithTwoPassOracle) {
  Rng rng(107);
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = static_cast<int>(UniformIndex(rng, 20));
    const int C = 2 + static_cast<int>(UniformIndex(rng, 5));
    const Matrix logits = RandomLogits(rng, T, C);
    std::vector<int> path(T);
    for (int t = 0; t < T; ++t) logits.row(t).maxCoeff(&path[t]);
    std::vector<int> filtered;
    for (int u : Collapse(path, C - 1))
      if (filtered.empty() || filtered.back() != u) filtered.push_back(u);
    ASSERT_EQ(CtcGreedyDecode(logits).units(), filtered);
  }
}

TEST(Ctc, ConfidentValidAlignmentDecodesAndScoresLow) {
  Rng rng(109);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 3 + static_cast<int>(UniformIndex(rng, 5));
    const int T = 4 + static_cast<int>(UniformIndex(rng, 10));
    std::vector<int> path(T);
    for (int& p : path) p = static_cast<int>(UniformIndex(rng, K + 1));
    std::vector<int> y;
    for (int u : Collapse(path, K))
      if (y.empty() || y.back() != u) y.push_back(u);
    // Remove blanks between equal neighbours so the path maps onto y.
    const std::vector<int> raw = Collapse(path, K);
    if (raw != y) continue;
    Matrix logits = Matrix::Zero(T, K + 1);
    for (int t = 0; t < T; ++t) logits(t, path[t]) = std::log(0.995 * K / 0.005);
    EXPECT_EQ(CtcGreedyDecode(logits).units(), y);
    EXPECT_LT(CtcForwardBackward(logits, y, false).loss, 0.1 * T);
  }
}
