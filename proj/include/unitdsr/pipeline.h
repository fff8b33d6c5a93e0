// include/unitdsr/pipeline.h

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

// Manifest ingestion, key=value configuration and the staged training
// driver: codebook, unit extraction, chained normalizer stages, vocoder and
// held-out evaluation, plus the stage-subset ablation runner.

#ifndef UNITDSR_PIPELINE_H_
#define UNITDSR_PIPELINE_H_

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "unitdsr/codec.h"
#include "unitdsr/dsp.h"
#include "unitdsr/eval.h"
#include "unitdsr/normalizer.h"
#include "unitdsr/vocoder.h"

namespace unitdsr {

enum class HealthTag { kHealthy, kDysarthric };
std::string ToString(HealthTag tag);

struct ManifestRecord {
  std::string utterance_id;
  std::string audio_path;  // as written in the manifest
  std::string speaker_id;
  std::string transcript;
  std::string block_tag;
  HealthTag health_tag = HealthTag::kHealthy;
  int line = 0;
};

std::set<std::string> DefaultBlockVocabulary();  // B1, B2, B3

/// `id\taudio\tspeaker\ttranscript\tblock\thealth` per non-empty line.
/// Errors carry "<path>:<line>".  Throws IoError, FieldCountError,
/// DuplicateIdError, ManifestError (empty path, unknown tag, a speaker with
/// two health tags).
std::vector<ManifestRecord> ParseManifest(
    const std::string& path,
    const std::set<std::string>& blocks = DefaultBlockVocabulary());

/// Absolute paths are kept.  Relative ones resolve against UNITDSR_DATA_DIR
/// when set, else against `manifest_dir`.
std::string ResolveAudioPath(const std::string& audio_path,
                             const std::string& manifest_dir);

struct StageSpec {
  std::string reference_speaker;
  std::set<std::string> random_speakers;
  long long max_updates = 10000;
  double learning_rate = 5e-4;
  double warmup_fraction = 0.1;
  int batch_size = 8;
  double clip_norm = 5.0;
  long long checkpoint_interval = 0;
  double nominal_hours = 0.0;  // metadata only
  AugmentConfig augment;
};

struct PipelineConfig {
  std::string manifest;
  std::string output_dir = "unitdsr_out";
  std::uint64_t seed = 1;
  FeatureConfig features;
  KMeansOptions codebook;  // seed is derived, not read
  NormalizerConfig normalizer;  // num_units and input_dim follow the codebook
  std::array<StageSpec, 3> stages;
  std::set<std::string> train_blocks = {"B1", "B3"};
  std::string test_block = "B2";
  std::string target_block = "B1";  // reference take used as the target
  bool vocoder_enabled = true;
  VocoderConfig vocoder;
  VocoderTrainConfig vocoder_train;
  std::string eval_reference;  // empty: stage 3 reference
  std::set<std::string> eval_speakers;  // empty: stage 3 random speakers
  bool eval_robustness = true;
  std::vector<double> eval_speed_ratios;  // empty: the default axis
  std::vector<double> eval_snr_db;

  const std::string& EvalReference() const;
  const std::set<std::string>& EvalSpeakers() const;
};

/// Desk-scale defaults with the toy corpus speaker ids.
PipelineConfig DefaultPipelineConfig();
/// The small configuration the toy corpus is tuned for.
PipelineConfig ToyPipelineConfig();

/// Every accepted key, sorted.
std::vector<std::string> ConfigKeys();
/// Sets one dotted key.  Throws ConfigError on an unknown key or bad value.
void SetConfigValue(PipelineConfig* cfg, const std::string& key,
                    const std::string& value);
std::string GetConfigValue(const PipelineConfig& cfg, const std::string& key);
/// `key=value` lines, `#` comments.  Later files and lines override earlier
/// ones.  Errors carry "<path>:<line>".  Throws IoError, ConfigError.
void ApplyConfigFile(PipelineConfig* cfg, const std::string& path);
/// One `key=value` string.
void ApplyConfigOverride(PipelineConfig* cfg, const std::string& assignment);
/// `key=value` for every key, sorted; the canonical form that is hashed.
std::string DumpConfig(const PipelineConfig& cfg);

/// A manifest utterance loaded from disk with its features.
struct LoadedUtterance {
  ManifestRecord record;
  Waveform audio;    // as read
  Waveform trimmed;  // silence-trimmed; features and units come from this
  FrameFeatures features;
};

/// Throws MissingPrerequisiteError when an audio file is absent.
std::vector<LoadedUtterance> LoadUtterances(
    const std::vector<ManifestRecord>& records, const std::string& manifest_dir,
    const FeatureConfig& feat_cfg);

/// Target norm units per transcript: Dedup(Quantize) of `reference`'s take
/// in `target_block`.
std::map<std::string, NormUnitSequence> ReferenceTargets(
    const std::vector<LoadedUtterance>& utts, const UnitCodebook& codebook,
    const std::string& reference, const std::string& target_block);

/// Pairs for utterances of `speakers` in `blocks`.  Utterances whose
/// transcript has no reference take are skipped with a warning.
std::vector<TrainingPair> BuildPairs(
    const std::vector<LoadedUtterance>& utts,
    const std::map<std::string, NormUnitSequence>& targets,
    const std::string& reference, const std::set<std::string>& speakers,
    const std::set<std::string>& blocks);

/// Speakers tagged dysarthric anywhere in the manifest.
std::set<std::string> DysarthricSpeakers(
    const std::vector<ManifestRecord>& records);

/// "1", "1+3", "1+2+3", ...
std::string StageLabel(const std::vector<int>& stages);
/// Accepts "1,2,3" or "1+2+3".  Throws ConfigError unless the result is a
/// sorted subset of {1,2,3} containing 1.
std::vector<int> ParseStageList(const std::string& text);

struct RunOptions {
  /// Load artifacts already present in the output directory when their
  /// recorded configuration hash matches.
  bool reuse_artifacts = true;
  /// When false, a missing codebook or stage prefix checkpoint is an error
  /// instead of being trained.
  bool build_prerequisites = true;
};

struct StageRun {
  int stage = 0;
  std::string label;       // stage prefix, e.g. "1+3"
  std::string checkpoint;  // path
  bool reused = false;
  std::uint64_t seed = 0;
  long long pairs = 0;
  std::uint64_t init_checksum = 0;
  std::uint64_t final_checksum = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

struct PipelineResult {
  std::vector<int> stages;
  std::string label;
  std::string run_dir;
  std::string summary_path;
  std::vector<StageRun> stage_runs;
  /// Final model on the evaluation speakers.
  double train_uer = 0.0;  // training blocks
  double test_uer = 0.0;   // held-out block, same content
  std::vector<EvalRecord> wer_records;
  std::vector<RobustnessGrid> grids;
  std::map<std::string, std::string> artifacts;  // name -> path
  std::map<std::string, std::uint64_t> seeds;    // component -> derived seed
};

/// train-kmeans, extract-units, chained normalizer stages, vocoder and
/// held-out evaluation.  Stage prefixes are stored as
/// `<out>/normalizer/s<prefix>.ckpt` so ablation rows share them.
/// Throws ConfigError, MissingPrerequisiteError, ConfigMismatchError.
PipelineResult RunPipeline(const PipelineConfig& cfg,
                           const std::vector<int>& stages,
                           const RunOptions& opts = {});

struct AblationRow {
  std::string label;
  double test_uer = 0.0;
  double train_uer = 0.0;
  std::optional<double> wer;  // normalizer-units system, percent
};

/// Runs each stage subset and writes `<out>/ablation.csv`.
std::vector<AblationRow> RunAblation(const PipelineConfig& cfg,
                                     const std::vector<std::vector<int>>& rows,
                                     const RunOptions& opts = {});

/// FNV-1a of a file's bytes.  Throws IoError.
std::uint64_t HashFile(const std::string& path);
std::string HexHash(std::uint64_t h);

}  // namespace unitdsr

#endif  // UNITDSR_PIPELINE_H_
