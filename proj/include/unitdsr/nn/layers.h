// include/unitdsr/nn/layers.h

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

#ifndef UNITDSR_NN_LAYERS_H_
#define UNITDSR_NN_LAYERS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "unitdsr/nn/ops.h"
#include "unitdsr/random.h"

namespace unitdsr::nn {

struct NamedParameter {
  std::string name;
  std::string group;
  Var var;
};

/// Ordered registry of trainable tensors.  Names are unique; the group tag
/// ("frontend", "encoder", "ctc", ...) drives freezing and checksums.
class ParameterSet {
 public:
  Var Add(const std::string& name, const std::string& group, Matrix init);

  std::vector<NamedParameter>& entries() { return entries_; }
  const std::vector<NamedParameter>& entries() const { return entries_; }
  std::vector<Var> Trainable() const;
  /// Null Var if absent.
  Var Find(const std::string& name) const;

  void SetGroupTrainable(const std::string& group, bool trainable);
  void ZeroGrad();
  std::size_t NumScalars() const;
  /// FNV-1a over the raw bytes of every tensor in `group` (all when empty),
  /// in registration order.
  std::uint64_t Checksum(const std::string& group = "") const;

 private:
  std::vector<NamedParameter> entries_;
};

/// Glorot-uniform fill.
Matrix XavierUniform(Eigen::Index fan_in, Eigen::Index fan_out,
                     Eigen::Index rows, Eigen::Index cols, Rng& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet* ps, const std::string& name, const std::string& group,
         int in, int out, Rng& rng, bool bias = true);
  Var operator()(const Var& x) const;

 private:
  Var w_, b_;
};

class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(ParameterSet* ps, const std::string& name,
              const std::string& group, int in, int out, int kernel,
              int stride, int padding, Rng& rng, int dilation = 1);
  Var operator()(const Var& x) const;

 private:
  Var w_, b_;
  int kernel_ = 1, stride_ = 1, padding_ = 0, dilation_ = 1;
};

class ConvTranspose1dLayer {
 public:
  ConvTranspose1dLayer() = default;
  ConvTranspose1dLayer(ParameterSet* ps, const std::string& name,
                       const std::string& group, int in, int out, int kernel,
                       int stride, int padding, Rng& rng);
  Var operator()(const Var& x) const;

 private:
  Var w_, b_;
  int kernel_ = 1, stride_ = 1, padding_ = 0;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParameterSet* ps, const std::string& name, const std::string& group,
            int count, int dim, Rng& rng);
  Var operator()(const std::vector<int>& ids) const;
  const Var& table() const { return table_; }

 private:
  Var table_;
};

class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParameterSet* ps, const std::string& name,
                 const std::string& group, int dim);
  Var operator()(const Var& x) const;

 private:
  Var gamma_, beta_;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet* ps, const std::string& name,
                     const std::string& group, int dim, int heads, Rng& rng);
  /// query: Tq x dim, memory: Tk x dim.
  Var operator()(const Var& query, const Var& memory, bool causal) const;

 private:
  Linear q_, k_, v_, o_;
  int dim_ = 0, heads_ = 1;
};

/// Pre-norm transformer encoder block.
class TransformerEncoderLayer {
 public:
  TransformerEncoderLayer() = default;
  TransformerEncoderLayer(ParameterSet* ps, const std::string& name,
                          const std::string& group, int dim, int heads,
                          int ff_dim, Rng& rng);
  Var operator()(const Var& x) const;

 private:
  LayerNormLayer ln1_, ln2_;
  MultiHeadAttention attn_;
  Linear ff1_, ff2_;
};

/// Pre-norm transformer decoder block: causal self-attention, then
/// attention over the encoder memory, then the feed-forward net.
class TransformerDecoderLayer {
 public:
  TransformerDecoderLayer() = default;
  TransformerDecoderLayer(ParameterSet* ps, const std::string& name,
                          const std::string& group, int dim, int heads,
                          int ff_dim, Rng& rng);
  Var operator()(const Var& x, const Var& memory) const;

 private:
  LayerNormLayer ln1_, ln2_, ln3_;
  MultiHeadAttention self_attn_, cross_attn_;
  Linear ff1_, ff2_;
};

/// Standard sinusoidal table, rows x dim.
Matrix SinusoidalPositions(Eigen::Index rows, int dim);

}  // namespace unitdsr::nn

#endif  // UNITDSR_NN_LAYERS_H_
