// src/nn/ops.cc

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

#include "unitdsr/nn/ops.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "unitdsr/errors.h"

namespace unitdsr::nn {

namespace {

void CheckSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape " << a.rows() << "x" << a.cols() << " vs "
       << b.rows() << "x" << b.cols();
    throw DimensionMismatchError(os.str());
  }
}

Node& In(Node& n, std::size_t i) { return *n.inputs[i]; }

// Applies f elementwise; df(x, y) is the local derivative.
template <typename F, typename DF>
Var Unary(const Var& a, F f, DF df) {
  Matrix y = a.value().unaryExpr(f);
  return MakeResult(std::move(y), {a}, [df](Node& n) {
    Node& x = In(n, 0);
    if (!x.requires_grad) return;
    Matrix g = n.grad;
    for (Eigen::Index i = 0; i < g.size(); ++i)
      g.data()[i] *= df(x.value.data()[i], n.value.data()[i]);
    x.AccumulateGrad(g);
  });
}

}  // namespace

Var MatMul(const Var& a, const Var& b) {
  if (a.cols() != b.rows())
    throw DimensionMismatchError("MatMul: inner dimensions differ");
  return MakeResult(a.value() * b.value(), {a, b}, [](Node& n) {
    Node& x = In(n, 0);
    Node& y = In(n, 1);
    if (x.requires_grad) x.AccumulateGrad(n.grad * y.value.transpose());
    if (y.requires_grad) y.AccumulateGrad(x.value.transpose() * n.grad);
  });
}

Var MatMulNT(const Var& a, const Var& b) {
  if (a.cols() != b.cols())
    throw DimensionMismatchError("MatMulNT: inner dimensions differ");
  return MakeResult(a.value() * b.value().transpose(), {a, b}, [](Node& n) {
    Node& x = In(n, 0);
    Node& y = In(n, 1);
    if (x.requires_grad) x.AccumulateGrad(n.grad * y.value);
    if (y.requires_grad) y.AccumulateGrad(n.grad.transpose() * x.value);
  });
}

Var Add(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Add");
  return MakeResult(a.value() + b.value(), {a, b}, [](Node& n) {
    for (int i = 0; i < 2; ++i)
      if (In(n, i).requires_grad) In(n, i).AccumulateGrad(n.grad);
  });
}

Var Sub(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Sub");
  return MakeResult(a.value() - b.value(), {a, b}, [](Node& n) {
    if (In(n, 0).requires_grad) In(n, 0).AccumulateGrad(n.grad);
    if (In(n, 1).requires_grad) In(n, 1).AccumulateGrad(-n.grad);
  });
}

Var Mul(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Mul");
  return MakeResult(a.value().cwiseProduct(b.value()), {a, b}, [](Node& n) {
    Node& x = In(n, 0);
    Node& y = In(n, 1);
    if (x.requires_grad) x.AccumulateGrad(n.grad.cwiseProduct(y.value));
    if (y.requires_grad) y.AccumulateGrad(n.grad.cwiseProduct(x.value));
  });
}

Var AddRow(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw DimensionMismatchError("AddRow: bias must be 1 x cols");
  Matrix y = a.value();
  y.rowwise() += row.value().row(0);
  return MakeResult(std::move(y), {a, row}, [](Node& n) {
    if (In(n, 0).requires_grad) In(n, 0).AccumulateGrad(n.grad);
    if (In(n, 1).requires_grad)
      In(n, 1).AccumulateGrad(n.grad.colwise().sum());
  });
}

Var Scale(const Var& a, double s) {
  return MakeResult(a.value() * s, {a}, [s](Node& n) {
    if (In(n, 0).requires_grad) In(n, 0).AccumulateGrad(n.grad * s);
  });
}

Var AddScalar(const Var& a, double s) {
  return MakeResult(a.value().array() + s, {a}, [](Node& n) {
    if (In(n, 0).requires_grad) In(n, 0).AccumulateGrad(n.grad);
  });
}

Var Relu(const Var& a) {
  return Unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var LeakyRelu(const Var& a, double slope) {
  return Unary(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var Gelu(const Var& a) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return Unary(
      a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [inv_sqrt_2pi](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        return cdf + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Var Tanh(const Var& a) {
  return Unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Softplus(const Var& a) {
  return Unary(
      a,
      [](double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var Log(const Var& a) {
  return Unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var Sqrt(const Var& a) {
  return Unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Var Square(const Var& a) {
  return Unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var Abs(const Var& a) {
  return Unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var Sum(const Var& a) {
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  return MakeResult(std::move(y), {a}, [](Node& n) {
    Node& x = In(n, 0);
    if (x.requires_grad)
      x.AccumulateGrad(Matrix::Constant(x.value.rows(), x.value.cols(),
                                        n.grad(0, 0)));
  });
}

Var Mean(const Var& a) {
  const double count = static_cast<double>(a.value().size());
  return Scale(Sum(a), 1.0 / count);
}

Var SliceRows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows())
    throw DimensionMismatchError("SliceRows out of range");
  return MakeResult(a.value().middleRows(start, count), {a},
                    [start, count](Node& n) {
                      Node& x = In(n, 0);
                      if (!x.requires_grad) return;
                      Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
                      g.middleRows(start, count) = n.grad;
                      x.AccumulateGrad(g);
                    });
}

Var SliceCols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols())
    throw DimensionMismatchError("SliceCols out of range");
  return MakeResult(a.value().middleCols(start, count), {a},
                    [start, count](Node& n) {
                      Node& x = In(n, 0);
                      if (!x.requires_grad) return;
                      Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
                      g.middleCols(start, count) = n.grad;
                      x.AccumulateGrad(g);
                    });
}

Var ConcatRows(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionMismatchError("ConcatRows: no inputs");
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != parts[0].cols())
      throw DimensionMismatchError("ConcatRows: column counts differ");
    rows += p.rows();
  }
  Matrix y(rows, parts[0].cols());
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    y.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return MakeResult(std::move(y), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (auto& in : n.inputs) {
      const Eigen::Index r = in->value.rows();
      if (in->requires_grad) in->AccumulateGrad(n.grad.middleRows(at, r));
      at += r;
    }
  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionMismatchError("ConcatCols: no inputs");
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != parts[0].rows())
      throw DimensionMismatchError("ConcatCols: row counts differ");
    cols += p.cols();
  }
  Matrix y(parts[0].rows(), cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    y.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return MakeResult(std::move(y), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (auto& in : n.inputs) {
      const Eigen::Index c = in->value.cols();
      if (in->requires_grad) in->AccumulateGrad(n.grad.middleCols(at, c));
      at += c;
    }
  });
}

Var GatherRows(const Var& a, const std::vector<int>& index) {
  Matrix y(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= a.rows())
      throw DimensionMismatchError("GatherRows: index out of range");
    y.row(i) = a.value().row(index[i]);
  }
  return MakeResult(std::move(y), {a}, [index](Node& n) {
    Node& x = In(n, 0);
    if (!x.requires_grad) return;
    Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
    for (std::size_t i = 0; i < index.size(); ++i) g.row(index[i]) += n.grad.row(i);
    x.AccumulateGrad(g);
  });
}

Var RepeatRow(const Var& row, Eigen::Index count) {
  if (row.rows() != 1) throw DimensionMismatchError("RepeatRow expects 1 x C");
  return GatherRows(row, std::vector<int>(count, 0));
}

Var Detach(const Var& a) { return Var(a.value()); }

Var RowSoftmax(const Var& a, bool causal) {
  Matrix y = a.value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Eigen::Index valid = causal ? std::min(i + 1, y.cols()) : y.cols();
    const double mx = y.row(i).head(valid).maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < valid; ++j) {
      y(i, j) = std::exp(y(i, j) - mx);
      z += y(i, j);
    }
    for (Eigen::Index j = 0; j < valid; ++j) y(i, j) /= z;
    for (Eigen::Index j = valid; j < y.cols(); ++j) y(i, j) = 0.0;
  }
  return MakeResult(std::move(y), {a}, [](Node& n) {
    Node& x = In(n, 0);
    if (!x.requires_grad) return;
    const Matrix gy = n.grad.cwiseProduct(n.value);
    Matrix g = gy;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      g.row(i) -= n.value.row(i) * gy.row(i).sum();
    x.AccumulateGrad(g);
  });
}

Var RowLogSoftmax(const Var& a) {
  Matrix y = a.value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double mx = y.row(i).maxCoeff();
    const double lse =
        mx + std::log((y.row(i).array() - mx).exp().sum());
    y.row(i).array() -= lse;
  }
  return MakeResult(std::move(y), {a}, [](Node& n) {
    Node& x = In(n, 0);
    if (!x.requires_grad) return;
    Matrix g = n.grad;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      g.row(i) -= n.value.row(i).array().exp().matrix() * n.grad.row(i).sum();
    x.AccumulateGrad(g);
  });
}

Var LayerNorm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  if (gamma.cols() != cols || beta.cols() != cols)
    throw DimensionMismatchError("LayerNorm: affine size mismatch");
  Matrix xhat(rows, cols);
  std::vector<double> inv_std(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mu = x.value().row(i).mean();
    const double var =
        (x.value().row(i).array() - mu).square().sum() / static_cast<double>(cols);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.value().row(i).array() - mu) * inv_std[i];
  }
  Matrix y = xhat;
  for (Eigen::Index i = 0; i < rows; ++i)
    y.row(i) = xhat.row(i).cwiseProduct(gamma.value().row(0)) + beta.value().row(0);
  return MakeResult(
      std::move(y), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
        Node& in = In(n, 0);
        Node& g = In(n, 1);
        Node& b = In(n, 2);
        if (g.requires_grad)
          g.AccumulateGrad(n.grad.cwiseProduct(xhat).colwise().sum());
        if (b.requires_grad) b.AccumulateGrad(n.grad.colwise().sum());
        if (!in.requires_grad) return;
        const double c = static_cast<double>(xhat.cols());
        Matrix gx(xhat.rows(), xhat.cols());
        for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
          const RowVector gh = n.grad.row(i).cwiseProduct(g.value.row(0));
          const double s1 = gh.sum();
          const double s2 = gh.cwiseProduct(xhat.row(i)).sum();
          gx.row(i) = (gh * c - RowVector::Constant(xhat.cols(), s1) -
                       xhat.row(i) * s2) *
                      (inv_std[i] / c);
        }
        in.AccumulateGrad(gx);
      });
}

Var Conv1d(const Var& x, const Var& w, const Var& bias, int kernel, int stride,
           int padding, int dilation) {
  const Eigen::Index t_in = x.rows(), c_in = x.cols();
  if (w.rows() != kernel * c_in)
    throw DimensionMismatchError("Conv1d: weight rows != kernel * Cin");
  const Eigen::Index span = static_cast<Eigen::Index>(dilation) * (kernel - 1) + 1;
  const Eigen::Index padded = t_in + 2 * padding;
  if (padded < span) throw DimensionMismatchError("Conv1d: input too short");
  const Eigen::Index t_out = (padded - span) / stride + 1;

  Matrix col = Matrix::Zero(t_out, kernel * c_in);
  for (Eigen::Index t = 0; t < t_out; ++t)
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index src = t * stride + static_cast<Eigen::Index>(k) * dilation - padding;
      if (src >= 0 && src < t_in) col.block(t, k * c_in, 1, c_in) = x.value().row(src);
    }
  Matrix y = col * w.value();
  if (bias.defined()) y.rowwise() += bias.value().row(0);

  std::vector<Var> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return MakeResult(
      std::move(y), inputs,
      [col = std::move(col), kernel, stride, padding, dilation](Node& n) {
        Node& xin = In(n, 0);
        Node& win = In(n, 1);
        if (n.inputs.size() > 2 && In(n, 2).requires_grad)
          In(n, 2).AccumulateGrad(n.grad.colwise().sum());
        if (win.requires_grad) win.AccumulateGrad(col.transpose() * n.grad);
        if (!xin.requires_grad) return;
        const Matrix gcol = n.grad * win.value.transpose();
        const Eigen::Index t_in = xin.value.rows(), c_in = xin.value.cols();
        Matrix gx = Matrix::Zero(t_in, c_in);
        for (Eigen::Index t = 0; t < gcol.rows(); ++t)
          for (int k = 0; k < kernel; ++k) {
            const Eigen::Index src =
                t * stride + static_cast<Eigen::Index>(k) * dilation - padding;
            if (src >= 0 && src < t_in)
              gx.row(src) += gcol.block(t, k * c_in, 1, c_in);
          }
        xin.AccumulateGrad(gx);
      });
}

Var ConvTranspose1d(const Var& x, const Var& w, const Var& bias, int kernel,
                    int stride, int padding) {
  const Eigen::Index t_in = x.rows(), c_in = x.cols();
  if (w.rows() != c_in || w.cols() % kernel != 0)
    throw DimensionMismatchError("ConvTranspose1d: weight shape");
  const Eigen::Index c_out = w.cols() / kernel;
  const Eigen::Index t_out = (t_in - 1) * stride - 2 * padding + kernel;
  if (t_out < 1) throw DimensionMismatchError("ConvTranspose1d: empty output");

  const Matrix cols = x.value() * w.value();  // T_in x (K * Cout)
  Matrix y = Matrix::Zero(t_out, c_out);
  for (Eigen::Index t = 0; t < t_in; ++t)
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index dst = t * stride + k - padding;
      if (dst >= 0 && dst < t_out) y.row(dst) += cols.block(t, k * c_out, 1, c_out);
    }
  if (bias.defined()) y.rowwise() += bias.value().row(0);

  std::vector<Var> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return MakeResult(std::move(y), inputs,
                    [kernel, stride, padding, c_out](Node& n) {
                      Node& xin = In(n, 0);
                      Node& win = In(n, 1);
                      if (n.inputs.size() > 2 && In(n, 2).requires_grad)
                        In(n, 2).AccumulateGrad(n.grad.colwise().sum());
                      const Eigen::Index t_in = xin.value.rows();
                      const Eigen::Index t_out = n.grad.rows();
                      Matrix gcols = Matrix::Zero(t_in, kernel * c_out);
                      for (Eigen::Index t = 0; t < t_in; ++t)
                        for (int k = 0; k < kernel; ++k) {
                          const Eigen::Index dst = t * stride + k - padding;
                          if (dst >= 0 && dst < t_out)
                            gcols.block(t, k * c_out, 1, c_out) = n.grad.row(dst);
                        }
                      if (win.requires_grad)
                        win.AccumulateGrad(xin.value.transpose() * gcols);
                      if (xin.requires_grad)
                        xin.AccumulateGrad(gcols * win.value.transpose());
                    });
}

Var AvgPool1d(const Var& x, int kernel, int stride, int padding) {
  const Eigen::Index t_in = x.rows();
  const Eigen::Index t_out = (t_in + 2 * padding - kernel) / stride + 1;
  if (t_out < 1) throw DimensionMismatchError("AvgPool1d: input too short");
  Matrix y = Matrix::Zero(t_out, x.cols());
  for (Eigen::Index t = 0; t < t_out; ++t)
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index src = t * stride + k - padding;
      if (src >= 0 && src < t_in) y.row(t) += x.value().row(src);
    }
  y /= static_cast<double>(kernel);
  return MakeResult(std::move(y), {x}, [kernel, stride, padding](Node& n) {
    Node& xin = In(n, 0);
    if (!xin.requires_grad) return;
    const Eigen::Index t_in = xin.value.rows();
    Matrix g = Matrix::Zero(t_in, xin.value.cols());
    for (Eigen::Index t = 0; t < n.grad.rows(); ++t)
      for (int k = 0; k < kernel; ++k) {
        const Eigen::Index src = t * stride + k - padding;
        if (src >= 0 && src < t_in) g.row(src) += n.grad.row(t) / kernel;
      }
    xin.AccumulateGrad(g);
  });
}

Var FrameSignal(const Var& x, int frame_len, int hop) {
  if (x.cols() != 1) throw DimensionMismatchError("FrameSignal expects N x 1");
  const Eigen::Index n = x.rows();
  if (n < frame_len) throw DimensionMismatchError("FrameSignal: too short");
  const Eigen::Index frames = (n - frame_len) / hop + 1;
  Matrix y(frames, frame_len);
  for (Eigen::Index f = 0; f < frames; ++f)
    for (int l = 0; l < frame_len; ++l) y(f, l) = x.value()(f * hop + l, 0);
  return MakeResult(std::move(y), {x}, [frame_len, hop](Node& node) {
    Node& xin = In(node, 0);
    if (!xin.requires_grad) return;
    Matrix g = Matrix::Zero(xin.value.rows(), 1);
    for (Eigen::Index f = 0; f < node.grad.rows(); ++f)
      for (int l = 0; l < frame_len; ++l) g(f * hop + l, 0) += node.grad(f, l);
    xin.AccumulateGrad(g);
  });
}

Var MseLoss(const Var& pred, const Var& target) {
  return Mean(Square(Sub(pred, target)));
}

Var L1Loss(const Var& pred, const Var& target) {
  return Mean(Abs(Sub(pred, target)));
}

Var CrossEntropy(const Var& logits, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows())
    throw LengthMismatchError("CrossEntropy: one target per row required");
  const Eigen::Index rows = logits.rows();
  Matrix probs = logits.value();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (targets[i] < 0 || targets[i] >= logits.cols())
      throw UnitRangeError("CrossEntropy: target out of range");
    const double mx = probs.row(i).maxCoeff();
    probs.row(i) = (probs.row(i).array() - mx).exp().matrix();
    const double z = probs.row(i).sum();
    probs.row(i) /= z;
    loss -= logits.value()(i, targets[i]) - mx - std::log(z);
  }
  Matrix y(1, 1);
  y(0, 0) = loss / static_cast<double>(rows);
  return MakeResult(std::move(y), {logits},
                    [probs = std::move(probs), targets](Node& n) {
                      Node& x = In(n, 0);
                      if (!x.requires_grad) return;
                      Matrix g = probs;
                      for (std::size_t i = 0; i < targets.size(); ++i)
                        g(i, targets[i]) -= 1.0;
                      g *= n.grad(0, 0) / static_cast<double>(targets.size());
                      x.AccumulateGrad(g);
                    });
}

}  // namespace unitdsr::nn
