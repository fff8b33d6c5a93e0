// src/nn/layers.cc

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

#include "unitdsr/nn/layers.h"

#include <cmath>
#include <string_view>

#include "unitdsr/errors.h"

namespace unitdsr::nn {

Var ParameterSet::Add(const std::string& name, const std::string& group,
                      Matrix init) {
  for (const auto& e : entries_)
    if (e.name == name) throw ConfigError("duplicate parameter " + name);
  Var v(std::move(init), true);
  entries_.push_back({name, group, v});
  return v;
}

std::vector<Var> ParameterSet::Trainable() const {
  std::vector<Var> out;
  for (const auto& e : entries_)
    if (e.var.requires_grad()) out.push_back(e.var);
  return out;
}

Var ParameterSet::Find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.var;
  return Var();
}

void ParameterSet::SetGroupTrainable(const std::string& group, bool trainable) {
  for (auto& e : entries_)
    if (e.group == group) e.var.set_requires_grad(trainable);
}

void ParameterSet::ZeroGrad() {
  for (auto& e : entries_) e.var.ZeroGrad();
}

std::size_t ParameterSet::NumScalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.var.value().size();
  return n;
}

std::uint64_t ParameterSet::Checksum(const std::string& group) const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& e : entries_) {
    if (!group.empty() && e.group != group) continue;
    h = Fnv1a(e.name, h);
    const Matrix& m = e.var.value();
    h = Fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()),
                               sizeof(double) * m.size()),
              h);
  }
  return h;
}

Matrix XavierUniform(Eigen::Index fan_in, Eigen::Index fan_out,
                     Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = (2.0 * UniformDouble(rng) - 1.0) * bound;
  return m;
}

Linear::Linear(ParameterSet* ps, const std::string& name,
               const std::string& group, int in, int out, Rng& rng, bool bias) {
  w_ = ps->Add(name + ".weight", group, XavierUniform(in, out, in, out, rng));
  if (bias) b_ = ps->Add(name + ".bias", group, Matrix::Zero(1, out));
}

Var Linear::operator()(const Var& x) const {
  Var y = MatMul(x, w_);
  return b_.defined() ? AddRow(y, b_) : y;
}

Conv1dLayer::Conv1dLayer(ParameterSet* ps, const std::string& name,
                         const std::string& group, int in, int out, int kernel,
                         int stride, int padding, Rng& rng, int dilation)
    : kernel_(kernel), stride_(stride), padding_(padding), dilation_(dilation) {
  w_ = ps->Add(name + ".weight", group,
               XavierUniform(in * kernel, out * kernel, in * kernel, out, rng));
  b_ = ps->Add(name + ".bias", group, Matrix::Zero(1, out));
}

Var Conv1dLayer::operator()(const Var& x) const {
  return Conv1d(x, w_, b_, kernel_, stride_, padding_, dilation_);
}

ConvTranspose1dLayer::ConvTranspose1dLayer(ParameterSet* ps,
                                           const std::string& name,
                                           const std::string& group, int in,
                                           int out, int kernel, int stride,
                                           int padding, Rng& rng)
    : kernel_(kernel), stride_(stride), padding_(padding) {
  w_ = ps->Add(name + ".weight", group,
               XavierUniform(in * kernel / stride, out * kernel / stride, in,
                             kernel * out, rng));
  b_ = ps->Add(name + ".bias", group, Matrix::Zero(1, out));
}

Var ConvTranspose1dLayer::operator()(const Var& x) const {
  return ConvTranspose1d(x, w_, b_, kernel_, stride_, padding_);
}

Embedding::Embedding(ParameterSet* ps, const std::string& name,
                     const std::string& group, int count, int dim, Rng& rng) {
  Matrix init(count, dim);
  // N(0, 1/dim)-ish via a scaled uniform so rows start near unit norm.
  const double bound = std::sqrt(3.0 / dim);
  for (Eigen::Index i = 0; i < init.size(); ++i)
    init.data()[i] = (2.0 * UniformDouble(rng) - 1.0) * bound;
  table_ = ps->Add(name + ".table", group, std::move(init));
}

Var Embedding::operator()(const std::vector<int>& ids) const {
  return GatherRows(table_, ids);
}

LayerNormLayer::LayerNormLayer(ParameterSet* ps, const std::string& name,
                               const std::string& group, int dim) {
  gamma_ = ps->Add(name + ".gamma", group, Matrix::Ones(1, dim));
  beta_ = ps->Add(name + ".beta", group, Matrix::Zero(1, dim));
}

Var LayerNormLayer::operator()(const Var& x) const {
  return LayerNorm(x, gamma_, beta_);
}

MultiHeadAttention::MultiHeadAttention(ParameterSet* ps,
                                       const std::string& name,
                                       const std::string& group, int dim,
                                       int heads, Rng& rng)
    : dim_(dim), heads_(heads) {
  if (heads < 1 || dim % heads != 0)
    throw ConfigError("attention width must be divisible by the head count");
  q_ = Linear(ps, name + ".q", group, dim, dim, rng);
  k_ = Linear(ps, name + ".k", group, dim, dim, rng);
  v_ = Linear(ps, name + ".v", group, dim, dim, rng);
  o_ = Linear(ps, name + ".o", group, dim, dim, rng);
}

Var MultiHeadAttention::operator()(const Var& query, const Var& memory,
                                   bool causal) const {
  const Var q = q_(query), k = k_(memory), v = v_(memory);
  const int head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Var> heads;
  heads.reserve(heads_);
  for (int h = 0; h < heads_; ++h) {
    const Var qh = SliceCols(q, h * head_dim, head_dim);
    const Var kh = SliceCols(k, h * head_dim, head_dim);
    const Var vh = SliceCols(v, h * head_dim, head_dim);
    const Var attn = RowSoftmax(Scale(MatMulNT(qh, kh), scale), causal);
    heads.push_back(MatMul(attn, vh));
  }
  return o_(heads_ == 1 ? heads[0] : ConcatCols(heads));
}

TransformerEncoderLayer::TransformerEncoderLayer(ParameterSet* ps,
                                                 const std::string& name,
                                                 const std::string& group,
                                                 int dim, int heads,
                                                 int ff_dim, Rng& rng)
    : ln1_(ps, name + ".ln1", group, dim),
      ln2_(ps, name + ".ln2", group, dim),
      attn_(ps, name + ".attn", group, dim, heads, rng),
      ff1_(ps, name + ".ff1", group, dim, ff_dim, rng),
      ff2_(ps, name + ".ff2", group, ff_dim, dim, rng) {}

Var TransformerEncoderLayer::operator()(const Var& x) const {
  const Var h = ln1_(x);
  const Var y = Add(x, attn_(h, h, false));
  return Add(y, ff2_(Gelu(ff1_(ln2_(y)))));
}

TransformerDecoderLayer::TransformerDecoderLayer(ParameterSet* ps,
                                                 const std::string& name,
                                                 const std::string& group,
                                                 int dim, int heads,
                                                 int ff_dim, Rng& rng)
    : ln1_(ps, name + ".ln1", group, dim),
      ln2_(ps, name + ".ln2", group, dim),
      ln3_(ps, name + ".ln3", group, dim),
      self_attn_(ps, name + ".self_attn", group, dim, heads, rng),
      cross_attn_(ps, name + ".cross_attn", group, dim, heads, rng),
      ff1_(ps, name + ".ff1", group, dim, ff_dim, rng),
      ff2_(ps, name + ".ff2", group, ff_dim, dim, rng) {}

Var TransformerDecoderLayer::operator()(const Var& x, const Var& memory) const {
  const Var h1 = ln1_(x);
  const Var y1 = Add(x, self_attn_(h1, h1, true));
  const Var y2 = Add(y1, cross_attn_(ln2_(y1), memory, false));
  return Add(y2, ff2_(Gelu(ff1_(ln3_(y2)))));
}

Matrix SinusoidalPositions(Eigen::Index rows, int dim) {
  Matrix pe(rows, dim);
  for (Eigen::Index t = 0; t < rows; ++t)
    for (int i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      pe(t, i) = (i % 2 == 0) ? std::sin(t * rate) : std::cos(t * rate);
    }
  return pe;
}

}  // namespace unitdsr::nn
