// include/unitdsr/vocoder.h

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

// Unit vocoder: unit and speaker lookup tables, a per-unit duration
// predictor, a transposed-convolution generator that turns each 20 ms frame
// into 320 samples, and multi-period / multi-scale discriminators trained
// with least-squares adversarial, log-mel L1 and feature-matching losses.

#ifndef UNITDSR_VOCODER_H_
#define UNITDSR_VOCODER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "unitdsr/checkpoint.h"
#include "unitdsr/codec.h"
#include "unitdsr/dsp.h"
#include "unitdsr/nn/layers.h"

namespace unitdsr {

struct VocoderConfig {
  int num_units = 64;
  int unit_dim = 64;     // E_u
  int speaker_dim = 16;  // E_s
  int sample_rate = kCanonicalSampleRate;
  double hop_ms = kCanonicalHopMs;
  std::vector<int> upsample_factors = {8, 5, 4, 2};
  int generator_channels = 64;  // halved after each upsample, floor 8
  int duration_channels = 64;
  std::vector<int> mpd_periods = {2, 3, 5};
  int msd_scales = 2;
  int disc_channels = 8;
  int mel_fft = 512;
  int mel_hop = 128;
  int mel_bands = 80;

  int HopSamples() const;
  /// Throws ConfigError, including when the upsample factors do not
  /// multiply to HopSamples().
  void Validate() const;
};

/// Rounds half up with a floor of one frame.
std::vector<int> RoundDurations(const std::vector<double>& durations);

/// mean_i (ln pred_i - ln target_i)^2.  pred is n x 1.  Throws
/// LengthMismatchError; DomainError for targets < 1.
nn::Var DurationLoss(const nn::Var& pred, const DurationSequence& target);
double DurationLoss(const std::vector<double>& pred,
                    const DurationSequence& target);

/// Log mel energies of an N x 1 signal, differentiable; frames x bands.
class LogMelLoss {
 public:
  LogMelLoss() = default;
  LogMelLoss(int sample_rate, int n_fft, int hop, int n_mels);
  nn::Var LogMel(const nn::Var& signal) const;
  /// L1 between log mels; both N x 1 with N >= n_fft.
  nn::Var operator()(const nn::Var& fake, const nn::Var& real) const;

 private:
  int n_fft_ = 0, hop_ = 0;
  nn::Var cos_, sin_, fb_t_;
};

/// Output of one sub-discriminator: intermediate activations and the final
/// score map.
struct DiscriminatorOutput {
  std::vector<nn::Var> features;
  nn::Var score;
};

class UnitVocoder {
 public:
  UnitVocoder(const VocoderConfig& cfg, std::vector<std::string> speakers,
              std::uint64_t init_seed);

  const VocoderConfig& config() const { return cfg_; }
  const std::vector<std::string>& speakers() const { return speakers_; }
  /// Throws UnknownSpeakerError.
  int SpeakerIndex(const std::string& id) const;

  nn::ParameterSet& generator_params() { return *gen_; }
  const nn::ParameterSet& generator_params() const { return *gen_; }
  nn::ParameterSet& discriminator_params() { return *disc_; }
  const nn::ParameterSet& discriminator_params() const { return *disc_; }

  /// n x 1, every entry softplus(.) + 0.1.  Throws UnitRangeError,
  /// EmptySequenceError.
  nn::Var PredictDurationsVar(const NormUnitSequence& units) const;
  std::vector<double> PredictDurations(const NormUnitSequence& units) const;

  /// sum(durations) x (E_u + E_s): row j is the embedding of the unit owning
  /// frame j followed by the speaker embedding.  Throws LengthMismatchError,
  /// UnknownSpeakerError, DomainError for durations < 1.
  nn::Var UpsampleWithSpeaker(const NormUnitSequence& units,
                              const std::vector<int>& durations,
                              const std::string& speaker) const;
  /// F x (E_u + E_s) -> (F * HopSamples()) x 1 in [-1, 1].
  nn::Var Generate(const nn::Var& frames) const;
  /// Uses predicted, rounded durations when none are given.
  Waveform GenerateWaveform(const NormUnitSequence& units,
                            const std::string& speaker,
                            const std::optional<std::vector<int>>& durations =
                                std::nullopt) const;

  std::vector<DiscriminatorOutput> Discriminate(const nn::Var& signal) const;

  long long updates = 0;
  Checkpoint ToCheckpoint() const;
  static UnitVocoder FromCheckpoint(const Checkpoint& ckpt);

 private:
  struct ConvStack {
    std::vector<nn::Conv1dLayer> convs;
    nn::Conv1dLayer post;
  };
  struct ResBlock {
    std::vector<nn::Conv1dLayer> convs;  // pairs: dilated conv, plain conv
  };
  DiscriminatorOutput RunStack(const ConvStack& s, const nn::Var& x) const;

  VocoderConfig cfg_;
  std::vector<std::string> speakers_;
  std::unique_ptr<nn::ParameterSet> gen_, disc_;
  nn::Embedding unit_lut_, speaker_lut_;
  nn::Conv1dLayer dur_conv1_, dur_conv2_;
  nn::LayerNormLayer dur_norm1_, dur_norm2_;
  nn::Linear dur_out_;
  nn::Conv1dLayer conv_pre_, conv_post_;
  std::vector<nn::ConvTranspose1dLayer> ups_;
  std::vector<ResBlock> res_;
  std::vector<ConvStack> mpd_, msd_;
};

struct VocoderTrainItem {
  std::string id;
  std::string speaker;
  NormUnitSequence units;
  DurationSequence durations;  // frames per norm unit
  Waveform audio;              // trimmed, aligned with the unit frames
};

/// Run-length encodes the frame units of an utterance into a train item.
VocoderTrainItem MakeVocoderTrainItem(const std::string& id,
                                      const std::string& speaker,
                                      const UnitSequence& frame_units,
                                      const Waveform& trimmed_audio);

struct VocoderTrainConfig {
  long long max_updates = 2000;
  double generator_lr = 2e-4;
  double discriminator_lr = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double lambda_mel = 45.0;
  double lambda_fm = 2.0;
  double lambda_dur = 1.0;
  int segment_frames = 8;
  int batch_size = 2;
  std::uint64_t seed = 0;
};

struct VocoderLogEntry {
  long long step = 0;
  double generator_total = 0.0;
  double adversarial = 0.0;
  double mel = 0.0;
  double feature_matching = 0.0;
  double duration = 0.0;
  double discriminator = 0.0;
  double wall_ms = 0.0;
};

/// Alternating discriminator / generator Adam updates on random
/// teacher-forced segments; both learning rates decay linearly to zero.  Throws EmptyDatasetError,
/// UnknownSpeakerError, UnitRangeError.
std::vector<VocoderLogEntry> TrainVocoder(UnitVocoder* vocoder,
                                          const std::vector<VocoderTrainItem>& items,
                                          const VocoderTrainConfig& cfg);

/// CSV `step,generator_total,adversarial,mel,feature_matching,duration,
/// discriminator,wall_ms`.
void WriteVocoderLog(const std::string& path,
                     const std::vector<VocoderLogEntry>& log);

}  // namespace unitdsr

#endif  // UNITDSR_VOCODER_H_
