// include/unitdsr/nn/optim.h

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

#ifndef UNITDSR_NN_OPTIM_H_
#define UNITDSR_NN_OPTIM_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "unitdsr/nn/layers.h"

namespace unitdsr::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW)
  double clip_norm = 0.0;     // global grad-norm clip; 0 disables
};

/// Adam over the trainable entries of a ParameterSet.  Moment buffers are
/// keyed by parameter name so they survive checkpointing; parameters that
/// are frozen or received no gradient are left untouched.
class Adam {
 public:
  Adam(ParameterSet* params, AdamOptions opts);

  /// Applies one update and returns the pre-clip gradient norm.
  double Step(double lr);
  long long steps() const { return steps_; }

  std::vector<std::pair<std::string, Matrix>> ExportState() const;
  void ImportState(const std::vector<std::pair<std::string, Matrix>>& state,
                   long long steps);

 private:
  struct Moments {
    Matrix m, v;
  };
  ParameterSet* params_;
  AdamOptions opts_;
  std::map<std::string, Moments> moments_;
  long long steps_ = 0;
};

/// Linear warmup over the first `warmup_fraction` of `total` updates, then
/// linear decay to zero.  `step` is 0-based.
double WarmupLinearDecay(long long step, long long total, double peak_lr,
                         double warmup_fraction);

}  // namespace unitdsr::nn

#endif  // UNITDSR_NN_OPTIM_H_
