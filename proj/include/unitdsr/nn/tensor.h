// include/unitdsr/nn/tensor.h

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

// A small reverse-mode autodiff over 2-D double matrices.  Every value is a
// rows x cols matrix; sequences are laid out time-major (one row per step).
// The graph is built eagerly as ops run and released when the last Var
// referring to it goes away.

#ifndef UNITDSR_NN_TENSOR_H_
#define UNITDSR_NN_TENSOR_H_

#include <functional>
#include <memory>
#include <vector>

#include "unitdsr/matrix.h"

namespace unitdsr::nn {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into inputs that require grad.
  std::function<void(Node&)> backward;

  void AccumulateGrad(const Matrix& g) {
    if (grad.size() == 0)
      grad = g;
    else
      grad += g;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  /// Direct write access; only meaningful for leaves (parameters, inputs).
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  void ZeroGrad() { node_->grad.resize(0, 0); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool r) { node_->requires_grad = r; }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const { return node_->value(0, 0); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Wraps an op's output.  The backward closure is kept only when gradient
/// recording is on and some input requires grad.
Var MakeResult(Matrix value, std::vector<Var> inputs,
               std::function<void(Node&)> backward);

/// Seeds d(loss)/d(loss) = 1 for a 1x1 loss and propagates to every leaf
/// that requires grad.  Gradients accumulate across calls.
void Backward(const Var& loss);

bool GradEnabled();

/// Disables graph recording for its lifetime (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace unitdsr::nn

#endif  // UNITDSR_NN_TENSOR_H_
