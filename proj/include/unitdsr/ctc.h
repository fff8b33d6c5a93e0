// include/unitdsr/ctc.h

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

// Connectionist temporal classification over K + 1 classes, blank = K.

#ifndef UNITDSR_CTC_H_
#define UNITDSR_CTC_H_

#include <span>

#include "unitdsr/codec.h"
#include "unitdsr/matrix.h"
#include "unitdsr/nn/tensor.h"

namespace unitdsr {

/// Frames needed to emit `target`: its length plus one blank between every
/// pair of equal neighbours.
int CtcMinFrames(std::span<const int> target);

struct CtcResult {
  double loss = 0.0;   // -log p(target | logits)
  Matrix grad;         // d loss / d logits, same shape as logits
};

/// Log-space forward-backward.  `logits` is T' x (K + 1) (unnormalised);
/// targets must lie in [0, K).  Throws InfeasibleTargetError when
/// CtcMinFrames(target) > T', UnitRangeError for bad labels.
CtcResult CtcForwardBackward(const Matrix& logits, std::span<const int> target,
                             bool want_grad = true);

/// Same loss as an autodiff node.
nn::Var CtcLoss(const nn::Var& logits, std::span<const int> target);

/// Best path: per-frame argmax (lowest index on ties), merge repeats,
/// drop blanks, then merge any equal neighbours left by blank removal.
NormUnitSequence CtcGreedyDecode(const Matrix& logits);

}  // namespace unitdsr

#endif  // UNITDSR_CTC_H_
