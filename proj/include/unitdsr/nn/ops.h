// include/unitdsr/nn/ops.h

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

#ifndef UNITDSR_NN_OPS_H_
#define UNITDSR_NN_OPS_H_

#include <vector>

#include "unitdsr/nn/tensor.h"

namespace unitdsr::nn {

// Linear algebra.
Var MatMul(const Var& a, const Var& b);    // a * b
Var MatMulNT(const Var& a, const Var& b);  // a * b^T

// Elementwise; shapes must match except where noted.
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var AddRow(const Var& a, const Var& row);  // row is 1 x cols, broadcast
Var Scale(const Var& a, double s);
Var AddScalar(const Var& a, double s);

Var Relu(const Var& a);
Var LeakyRelu(const Var& a, double slope);
Var Gelu(const Var& a);
Var Tanh(const Var& a);
Var Softplus(const Var& a);
Var Log(const Var& a);
Var Sqrt(const Var& a);
Var Square(const Var& a);
Var Abs(const Var& a);

// Reductions to 1x1.
Var Sum(const Var& a);
Var Mean(const Var& a);

// Structural.
Var SliceRows(const Var& a, Eigen::Index start, Eigen::Index count);
Var SliceCols(const Var& a, Eigen::Index start, Eigen::Index count);
Var ConcatRows(const std::vector<Var>& parts);
Var ConcatCols(const std::vector<Var>& parts);
/// out.row(i) = a.row(index[i]); gradients scatter-add back.
Var GatherRows(const Var& a, const std::vector<int>& index);
/// Repeats a 1 x C row `count` times.
Var RepeatRow(const Var& row, Eigen::Index count);
/// Constant copy cut off from the graph.
Var Detach(const Var& a);

// Sequence ops on time-major T x C inputs.

/// Row-wise softmax; `causal` masks entries above the diagonal.
Var RowSoftmax(const Var& a, bool causal = false);
Var RowLogSoftmax(const Var& a);
Var LayerNorm(const Var& x, const Var& gamma, const Var& beta,
              double eps = 1e-5);

/// 1-D convolution.  x: T x Cin, w: (K * Cin) x Cout with tap-major rows,
/// bias: 1 x Cout (may be undefined).  Zero padding on both sides.
Var Conv1d(const Var& x, const Var& w, const Var& bias, int kernel, int stride,
           int padding, int dilation = 1);
/// Transposed 1-D convolution.  x: T x Cin, w: Cin x (K * Cout) with
/// tap-major columns.  Output length (T - 1) * stride - 2 * padding + K.
Var ConvTranspose1d(const Var& x, const Var& w, const Var& bias, int kernel,
                    int stride, int padding);
/// Average pooling with zero padding counted in the denominator.
Var AvgPool1d(const Var& x, int kernel, int stride, int padding);
/// Slices an N x 1 signal into overlapping frames, F x frame_len, where
/// F = floor((N - frame_len) / hop) + 1.
Var FrameSignal(const Var& x, int frame_len, int hop);

// Losses returning 1x1.
Var MseLoss(const Var& pred, const Var& target);
Var L1Loss(const Var& pred, const Var& target);
/// Mean negative log-likelihood of `targets` under row-wise softmax(logits).
Var CrossEntropy(const Var& logits, const std::vector<int>& targets);

}  // namespace unitdsr::nn

#endif  // UNITDSR_NN_OPS_H_
