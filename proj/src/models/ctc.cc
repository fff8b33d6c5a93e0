// src/models/ctc.cc

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

#include "unitdsr/ctc.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "unitdsr/errors.h"
#include "unitdsr/nn/ops.h"

namespace unitdsr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace

int CtcMinFrames(std::span<const int> target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

CtcResult CtcForwardBackward(const Matrix& logits, std::span<const int> target,
                             bool want_grad) {
  const int T = static_cast<int>(logits.rows());
  const int C = static_cast<int>(logits.cols());
  if (C < 2) throw DomainError("CTC needs at least one unit class and a blank");
  const int blank = C - 1;
  CheckUnitRange(target, blank);
  if (T == 0 || CtcMinFrames(target) > T)
    throw InfeasibleTargetError("target of length " +
                                std::to_string(target.size()) + " needs " +
                                std::to_string(CtcMinFrames(target)) +
                                " frames, have " + std::to_string(T));
  if (!logits.allFinite()) throw DomainError("non-finite CTC logits");

  // Row-wise log-softmax.
  Matrix logp(T, C);
  for (int t = 0; t < T; ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse =
        m + std::log((logits.row(t).array() - m).exp().sum());
    logp.row(t) = logits.row(t).array() - lse;
  }

  // Extended label sequence with blanks: b, y1, b, y2, ..., yL, b.
  const int S = 2 * static_cast<int>(target.size()) + 1;
  std::vector<int> ext(S, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto can_skip = [&](int s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  Matrix alpha = Matrix::Constant(T, S, kNegInf);
  alpha(0, 0) = logp(0, ext[0]);
  if (S > 1) alpha(0, 1) = logp(0, ext[1]);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = LogAdd(a, alpha(t - 1, s - 2));
      if (a != kNegInf) alpha(t, s) = a + logp(t, ext[s]);
    }
  }
  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = LogAdd(log_p, alpha(T - 1, S - 2));

  CtcResult out;
  out.loss = -log_p;
  if (!want_grad) return out;

  Matrix beta = Matrix::Constant(T, S, kNegInf);
  beta(T - 1, S - 1) = logp(T - 1, ext[S - 1]);
  if (S > 1) beta(T - 1, S - 2) = logp(T - 1, ext[S - 2]);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < S) b = LogAdd(b, beta(t + 1, s + 1));
      if (s + 2 < S && can_skip(s + 2)) b = LogAdd(b, beta(t + 1, s + 2));
      if (b != kNegInf) beta(t, s) = b + logp(t, ext[s]);
    }
  }

  // d(-log p)/d logit(t,k) = softmax(t,k) - occupancy(t,k).
  out.grad = logp.array().exp();
  for (int t = 0; t < T; ++t) {
    std::vector<double> occ(C, kNegInf);
    for (int s = 0; s < S; ++s) {
      if (alpha(t, s) == kNegInf || beta(t, s) == kNegInf) continue;
      occ[ext[s]] = LogAdd(occ[ext[s]], alpha(t, s) + beta(t, s) - logp(t, ext[s]));
    }
    for (int k = 0; k < C; ++k)
      if (occ[k] != kNegInf) out.grad(t, k) -= std::exp(occ[k] - log_p);
  }
  return out;
}

nn::Var CtcLoss(const nn::Var& logits, std::span<const int> target) {
  CtcResult r = CtcForwardBackward(logits.value(), target, nn::GradEnabled());
  Matrix loss(1, 1);
  loss(0, 0) = r.loss;
  return nn::MakeResult(
      std::move(loss), {logits},
      [grad = std::move(r.grad)](nn::Node& self) {
        self.inputs[0]->AccumulateGrad(grad * self.grad(0, 0));
      });
}

NormUnitSequence CtcGreedyDecode(const Matrix& logits) {
  const int blank = static_cast<int>(logits.cols()) - 1;
  std::vector<int> out;
  int prev = -1;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.cols(); ++k)
      if (logits(t, k) > logits(t, best)) best = k;
    const int label = static_cast<int>(best);
    if (label != prev && label != blank) out.push_back(label);
    prev = label;
  }
  // A unit repeated across a blank would break the norm-unit invariant.
  return Dedup(out);
}

}  // namespace unitdsr
