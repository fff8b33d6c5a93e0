// include/unitdsr/text_to_unit.h

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

// Character-to-norm-unit transducer: a small transformer encoder-decoder
// trained with teacher forcing and decoded greedily.

#ifndef UNITDSR_TEXT_TO_UNIT_H_
#define UNITDSR_TEXT_TO_UNIT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "unitdsr/checkpoint.h"
#include "unitdsr/codec.h"
#include "unitdsr/nn/layers.h"
#include "unitdsr/text.h"
#include "unitdsr/train_log.h"

namespace unitdsr {

/// Character ids: 0 pad, 1 out-of-vocabulary, then a-z, 0-9, space, '.
class CharVocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kOov = 1;
  static int Size() { return 40; }
  static int Id(char c);
  /// Normalises, then maps; throws EmptyTextError if nothing is left.
  static std::vector<int> Encode(const std::string& text);
};

struct TextToUnitConfig {
  int num_units = 64;  // K; BOS = K, EOS = K + 1
  int model_dim = 128;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int num_heads = 4;
  int ff_dim = 512;

  void Validate() const;
};

class TextToUnitModel {
 public:
  TextToUnitModel(const TextToUnitConfig& cfg, std::uint64_t init_seed);

  const TextToUnitConfig& config() const { return cfg_; }
  nn::ParameterSet& params() { return *params_; }
  const nn::ParameterSet& params() const { return *params_; }
  int Bos() const { return cfg_.num_units; }
  int Eos() const { return cfg_.num_units + 1; }

  nn::Var Encode(const std::vector<int>& chars) const;
  /// Logits over K + 2 tokens for every decoder position.
  nn::Var Decode(const nn::Var& memory, const std::vector<int>& prefix) const;

  long long updates = 0;
  Checkpoint ToCheckpoint() const;
  static TextToUnitModel FromCheckpoint(const Checkpoint& ckpt);

 private:
  TextToUnitConfig cfg_;
  std::unique_ptr<nn::ParameterSet> params_;
  nn::Embedding char_emb_, unit_emb_;
  std::vector<nn::TransformerEncoderLayer> enc_;
  std::vector<nn::TransformerDecoderLayer> dec_;
  nn::LayerNormLayer enc_norm_, dec_norm_;
  nn::Linear out_;
};

struct TextUnitPair {
  std::string id;
  std::string text;
  std::vector<int> units;  // may contain repeats; training uses Dedup
};

/// TSV `<id>\t<text>\t<space-separated units>`.  Throws FieldCountError,
/// DuplicateIdError, ManifestError.
std::vector<TextUnitPair> ReadTextUnitCorpus(const std::string& path);
void WriteTextUnitCorpus(const std::string& path,
                         const std::vector<TextUnitPair>& corpus);

struct TextToUnitTrainOptions {
  long long max_updates = 2000;
  double learning_rate = 1e-3;
  double warmup_fraction = 0.1;
  int batch_size = 8;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
};

/// Teacher-forced cross-entropy on (text, Dedup(units)).  Throws
/// EmptyDatasetError, UnitRangeError, EmptyTextError.
std::vector<TrainLogEntry> TrainTextToUnit(TextToUnitModel* model,
                                           const std::vector<TextUnitPair>& corpus,
                                           const TextToUnitTrainOptions& opts);

/// Greedy decoding until EOS or max_len units, then Dedup.
NormUnitSequence TranslateTextToUnits(const TextToUnitModel& model,
                                      const std::string& text, int max_len);

}  // namespace unitdsr

#endif  // UNITDSR_TEXT_TO_UNIT_H_
