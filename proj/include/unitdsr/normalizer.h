// include/unitdsr/normalizer.h

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

// Speech unit normalizer: a frozen convolutional front end, a transformer
// encoder and a CTC projection onto K units plus blank, fine-tuned in
// stages on (random-speaker input, reference-speaker norm units) pairs.

#ifndef UNITDSR_NORMALIZER_H_
#define UNITDSR_NORMALIZER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "unitdsr/checkpoint.h"
#include "unitdsr/codec.h"
#include "unitdsr/dsp.h"
#include "unitdsr/nn/layers.h"
#include "unitdsr/train_log.h"

namespace unitdsr {

struct NormalizerConfig {
  int input_dim = 80;
  int num_units = 64;  // K; the model emits K + 1 classes
  int model_dim = 256;
  int num_layers = 4;
  int num_heads = 4;
  int ff_dim = 1024;
  int downsample = 2;  // S: T' = floor(T / S)

  void Validate() const;
};

/// Identifies the codebook a model's output classes refer to.
struct CodebookFingerprint {
  int k = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const CodebookFingerprint&,
                         const CodebookFingerprint&) = default;
};

class NormalizerModel {
 public:
  NormalizerModel(const NormalizerConfig& cfg, std::uint64_t init_seed);

  const NormalizerConfig& config() const { return cfg_; }
  nn::ParameterSet& params() { return *params_; }
  const nn::ParameterSet& params() const { return *params_; }
  int NumClasses() const { return cfg_.num_units + 1; }
  int Blank() const { return cfg_.num_units; }

  /// frames: T x input_dim, returns T' x (K + 1) logits.  Records the
  /// autodiff graph when gradient mode is on.  Throws TooShortError when
  /// T < S and DimensionMismatchError on a width mismatch.
  nn::Var Forward(const Matrix& frames) const;
  /// Inference-mode logits.
  Matrix ForwardLogits(const FrameFeatures& f) const;

  CodebookFingerprint fingerprint;
  int last_stage = 0;
  long long updates = 0;  // cumulative over all stages
  /// Adam moments at the end of the last stage ("adam.m.<param>", ...).
  std::vector<std::pair<std::string, Matrix>> optimizer_state;
  long long optimizer_steps = 0;

  Checkpoint ToCheckpoint() const;
  /// Throws CorruptFileError when tensors are missing or misshapen.
  static NormalizerModel FromCheckpoint(const Checkpoint& ckpt);
  /// As above, and throws ConfigMismatchError unless the stored codebook
  /// fingerprint equals `expected`.
  static NormalizerModel FromCheckpoint(const Checkpoint& ckpt,
                                        const CodebookFingerprint& expected);

 private:
  NormalizerConfig cfg_;
  std::unique_ptr<nn::ParameterSet> params_;
  nn::Conv1dLayer conv_in_, conv_down_;
  std::vector<nn::TransformerEncoderLayer> layers_;
  nn::LayerNormLayer final_norm_;
  nn::Linear ctc_;
};

/// Per-utterance mean and variance normalisation over time.
Matrix NormalizeFrames(const Matrix& frames);

/// Training perturbations; each kind is off at probability 0.  Speed and
/// noise are rendered once per stage into `variants` perturbed copies of
/// every pair; each draw picks one copy and masking is applied per draw.
struct AugmentConfig {
  int variants = 6;
  double speed_probability = 0.0;
  double speed_min = 1.0;
  double speed_max = 1.0;
  double noise_probability = 0.0;
  double snr_min_db = 30.0;
  double snr_max_db = 30.0;
  /// Spans of frames / mel bands replaced by the utterance mean.
  double mask_probability = 0.0;
  int time_masks = 2;
  int time_mask_width = 4;
  int freq_masks = 2;
  int freq_mask_width = 8;
};

struct TrainingPair {
  std::string utterance_id;
  std::string speaker;            // random speaker producing the input
  std::string reference_speaker;  // whose units form the target
  std::string content_key;
  std::string block;
  FrameFeatures features;
  NormUnitSequence target;
  Waveform audio;  // untrimmed recording; only needed for augmentation
};

struct StageConfig {
  int stage_id = 1;
  std::string reference_speaker;
  std::set<std::string> random_speakers;
  /// Speakers in the filter known to be dysarthric.
  std::set<std::string> dysarthric_speakers;
  long long max_updates = 10000;
  double learning_rate = 5e-4;
  double warmup_fraction = 0.1;
  int batch_size = 8;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  long long checkpoint_interval = 0;  // 0: only the caller's final save
  AugmentConfig augment;
  FeatureConfig features;  // used to re-extract augmented audio

  /// stage_id in {1,2,3}, max_updates >= 1; stage 3 has exactly one random
  /// speaker and it is dysarthric; stages 1 and 2 have none.
  void Validate() const;
};

struct BatchAuditEntry {
  long long step = 0;
  std::string utterance_id;
  std::string block;
};

struct StageResult {
  std::vector<TrainLogEntry> log;
  std::vector<BatchAuditEntry> audit;
  std::uint64_t frontend_checksum_before = 0;
  std::uint64_t frontend_checksum_after = 0;
  std::uint64_t init_checksum = 0;   // all parameters at entry
  std::uint64_t final_checksum = 0;  // all parameters at exit
};

using CheckpointCallback =
    std::function<void(long long step, const NormalizerModel& model)>;

/// Adam updates on the encoder and CTC groups only; the front end is frozen
/// for the whole stage.  Throws EmptyDatasetError, SpeakerFilterViolation,
/// UnitRangeError (targets outside [0, K)), ConfigError.
StageResult RunFinetuneStage(NormalizerModel* model, const StageConfig& cfg,
                             const std::vector<TrainingPair>& pairs,
                             const CheckpointCallback& on_checkpoint = {});

/// ctc_greedy_decode(forward_logits(extract_features(trim_silence(w)))).
NormUnitSequence Normalize(const NormalizerModel& model, const Waveform& w,
                           const FeatureConfig& feat_cfg,
                           const std::string& utterance_id = {});

}  // namespace unitdsr

#endif  // UNITDSR_NORMALIZER_H_
