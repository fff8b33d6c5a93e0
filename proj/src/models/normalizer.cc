// src/models/normalizer.cc

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

#include "unitdsr/normalizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "unitdsr/ctc.h"
#include "unitdsr/errors.h"
#include "unitdsr/log.h"
#include "unitdsr/nn/optim.h"
#include "unitdsr/random.h"

namespace unitdsr {

void NormalizerConfig::Validate() const {
  if (input_dim < 1 || num_units < 2 || model_dim < 1 || num_layers < 0 ||
      num_heads < 1 || ff_dim < 1 || downsample < 1)
    throw ConfigError("normalizer config has non-positive sizes");
  if (model_dim % num_heads != 0)
    throw ConfigError("normalizer model_dim must be divisible by num_heads");
}

NormalizerModel::NormalizerModel(const NormalizerConfig& cfg,
                                 std::uint64_t init_seed)
    : cfg_(cfg), params_(std::make_unique<nn::ParameterSet>()) {
  cfg_.Validate();
  Rng rng(init_seed);
  nn::ParameterSet* ps = params_.get();
  const int h = cfg_.model_dim;
  conv_in_ = nn::Conv1dLayer(ps, "frontend.conv_in", "frontend", cfg_.input_dim, h, 3, 1, 1, rng);
  conv_down_ = nn::Conv1dLayer(ps, "frontend.conv_down", "frontend", h, h,
                               cfg_.downsample, cfg_.downsample, 0, rng);
  for (int i = 0; i < cfg_.num_layers; ++i)
    layers_.emplace_back(ps, "encoder.layer" + std::to_string(i), "encoder", h,
                         cfg_.num_heads, cfg_.ff_dim, rng);
  final_norm_ = nn::LayerNormLayer(ps, "encoder.final_norm", "encoder", h);
  ctc_ = nn::Linear(ps, "ctc.proj", "ctc", h, cfg_.num_units + 1, rng);
  fingerprint.k = cfg_.num_units;
}

Matrix NormalizeFrames(const Matrix& frames) {
  if (frames.rows() == 0) return frames;
  const RowVector mean = frames.colwise().mean();
  Matrix centred = frames.rowwise() - mean;
  const RowVector var = centred.array().square().colwise().mean().matrix();
  const RowVector inv = (var.array() + 1e-2).rsqrt().matrix();
  return centred.array().rowwise() * inv.array();
}

nn::Var NormalizerModel::Forward(const Matrix& frames) const {
  if (frames.cols() != cfg_.input_dim)
    throw DimensionMismatchError("normalizer expects " + std::to_string(cfg_.input_dim) +
                                 "-dim frames, got " + std::to_string(frames.cols()));
  if (frames.rows() < cfg_.downsample)
    throw TooShortError("normalizer needs at least " + std::to_string(cfg_.downsample) +
                        " frames, got " + std::to_string(frames.rows()));
  nn::Var x(NormalizeFrames(frames));
  nn::Var h = nn::Gelu(conv_in_(x));
  h = nn::Gelu(conv_down_(h));
  h = nn::Add(h, nn::Var(nn::SinusoidalPositions(h.rows(), cfg_.model_dim)));
  for (const auto& layer : layers_) h = layer(h);
  return ctc_(final_norm_(h));
}

Matrix NormalizerModel::ForwardLogits(const FrameFeatures& f) const {
  nn::NoGradGuard guard;
  return Forward(f.frames).value();
}

Checkpoint NormalizerModel::ToCheckpoint() const {
  Checkpoint c;
  c.meta["kind"] = "normalizer";
  c.meta["normalizer.input_dim"] = std::to_string(cfg_.input_dim);
  c.meta["normalizer.num_units"] = std::to_string(cfg_.num_units);
  c.meta["normalizer.model_dim"] = std::to_string(cfg_.model_dim);
  c.meta["normalizer.num_layers"] = std::to_string(cfg_.num_layers);
  c.meta["normalizer.num_heads"] = std::to_string(cfg_.num_heads);
  c.meta["normalizer.ff_dim"] = std::to_string(cfg_.ff_dim);
  c.meta["normalizer.downsample"] = std::to_string(cfg_.downsample);
  c.meta["codebook.k"] = std::to_string(fingerprint.k);
  c.meta["codebook.seed"] = std::to_string(fingerprint.seed);
  c.meta["stage"] = std::to_string(last_stage);
  c.meta["updates"] = std::to_string(updates);
  c.meta["optimizer.steps"] = std::to_string(optimizer_steps);
  for (const auto& e : params_->entries()) c.tensors.emplace_back(e.name, e.var.value());
  for (const auto& t : optimizer_state) c.tensors.push_back(t);
  return c;
}

NormalizerModel NormalizerModel::FromCheckpoint(const Checkpoint& c) {
  if (c.Meta("kind") != "normalizer")
    throw CorruptFileError("checkpoint holds a '" + c.Meta("kind") + "', not a normalizer");
  NormalizerConfig cfg;
  cfg.input_dim = static_cast<int>(c.MetaInt("normalizer.input_dim"));
  cfg.num_units = static_cast<int>(c.MetaInt("normalizer.num_units"));
  cfg.model_dim = static_cast<int>(c.MetaInt("normalizer.model_dim"));
  cfg.num_layers = static_cast<int>(c.MetaInt("normalizer.num_layers"));
  cfg.num_heads = static_cast<int>(c.MetaInt("normalizer.num_heads"));
  cfg.ff_dim = static_cast<int>(c.MetaInt("normalizer.ff_dim"));
  cfg.downsample = static_cast<int>(c.MetaInt("normalizer.downsample"));
  NormalizerModel m(cfg, 0);
  for (auto& e : m.params().entries()) {
    const Matrix* t = c.FindTensor(e.name);
    if (t == nullptr) throw CorruptFileError("checkpoint lacks tensor " + e.name);
    if (t->rows() != e.var.rows() || t->cols() != e.var.cols())
      throw CorruptFileError("tensor " + e.name + " has the wrong shape");
    e.var.mutable_value() = *t;
  }
  for (const auto& [name, t] : c.tensors)
    if (name.rfind("adam.", 0) == 0) m.optimizer_state.emplace_back(name, t);
  m.fingerprint.k = static_cast<int>(c.MetaInt("codebook.k"));
  m.fingerprint.seed = std::stoull(c.Meta("codebook.seed"));
  m.last_stage = static_cast<int>(c.MetaInt("stage"));
  m.updates = c.MetaInt("updates");
  m.optimizer_steps = c.MetaInt("optimizer.steps");
  return m;
}

NormalizerModel NormalizerModel::FromCheckpoint(const Checkpoint& c,
                                                const CodebookFingerprint& expected) {
  NormalizerModel m = FromCheckpoint(c);
  if (!(m.fingerprint == expected))
    throw ConfigMismatchError(
        "normalizer was trained on codebook (K=" + std::to_string(m.fingerprint.k) +
        ", seed=" + std::to_string(m.fingerprint.seed) + "), expected (K=" +
        std::to_string(expected.k) + ", seed=" + std::to_string(expected.seed) + ")");
  return m;
}

void StageConfig::Validate() const {
  if (stage_id < 1 || stage_id > 3)
    throw ConfigError("stage_id must be 1, 2 or 3, got " + std::to_string(stage_id));
  if (max_updates < 1) throw ConfigError("max_updates must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (warmup_fraction < 0 || warmup_fraction > 1)
    throw ConfigError("warmup_fraction must lie in [0, 1]");
  if (reference_speaker.empty()) throw ConfigError("stage needs a reference speaker");
  if (random_speakers.empty()) throw ConfigError("stage needs random speakers");
  int dys = 0;
  for (const auto& s : random_speakers) dys += dysarthric_speakers.count(s) > 0;
  if (stage_id == 3 && (random_speakers.size() != 1 || dys != 1))
    throw ConfigError("stage 3 must use exactly one dysarthric random speaker");
  if (stage_id != 3 && dys != 0)
    throw ConfigError("stages 1 and 2 use healthy random speakers only");
  const AugmentConfig& a = augment;
  if (a.speed_probability < 0 || a.speed_probability > 1 || a.noise_probability < 0 ||
      a.noise_probability > 1 || a.mask_probability < 0 || a.mask_probability > 1 ||
      a.time_masks < 0 || a.variants < 1 || a.freq_masks < 0 || a.time_mask_width < 0 || a.freq_mask_width < 0 || a.speed_min > a.speed_max || !(a.speed_min >= 0.25) || !(a.speed_max <= 4.0) || a.snr_min_db > a.snr_max_db)
    throw ConfigError("invalid augmentation ranges");
}

namespace {

// One speed/noise draw on the raw recording, then the inference path (trim,
// features).  Falls back to the clean features when the perturbed input is
// unusable or too short for the target.
Matrix PerturbedFrames(const TrainingPair& p, const StageConfig& cfg, int downsample,
                       Rng& rng) {
  const AugmentConfig& a = cfg.augment;
  const bool speed = a.speed_probability > 0 && UniformDouble(rng) < a.speed_probability;
  // Log-uniform, so slowing and speeding by the same factor are equally likely.
  const double ratio = a.speed_min * std::pow(a.speed_max / a.speed_min, UniformDouble(rng));
  const bool noise = a.noise_probability > 0 && UniformDouble(rng) < a.noise_probability;
  const double snr = a.snr_min_db + (a.snr_max_db - a.snr_min_db) * UniformDouble(rng);
  const std::uint64_t noise_seed = rng();
  if ((!speed && !noise) || p.audio.empty()) return p.features.frames;
  Waveform w = p.audio;
  if (speed) w = SpeedPerturb(w, ratio);
  if (noise) w = AddNoiseAtSnr(w, snr, noise_seed);
  try {
    Matrix frames = ExtractFeatures(TrimSilence(w), cfg.features).frames;
    if (frames.rows() / downsample >= CtcMinFrames(p.target.units())) return frames;
  } catch (const TooShortError&) {
  } catch (const AllSilentError&) {
  }
  return p.features.frames;
}

void MaskFrames(const AugmentConfig& a, Matrix* frames, Rng& rng) {
  const RowVector mean = frames->colwise().mean();
  const Eigen::Index T = frames->rows(), D = frames->cols();
  for (int m = 0; m < a.time_masks; ++m) {
    const Eigen::Index w = std::min<Eigen::Index>(T, UniformIndex(rng, a.time_mask_width + 1));
    const Eigen::Index t0 = UniformIndex(rng, T - w + 1);
    for (Eigen::Index t = t0; t < t0 + w; ++t) frames->row(t) = mean;
  }
  for (int m = 0; m < a.freq_masks; ++m) {
    const Eigen::Index w = std::min<Eigen::Index>(D, UniformIndex(rng, a.freq_mask_width + 1));
    const Eigen::Index d0 = UniformIndex(rng, D - w + 1);
    for (Eigen::Index d = d0; d < d0 + w; ++d) frames->col(d).setConstant(mean(d));
  }
}

}  // namespace

StageResult RunFinetuneStage(NormalizerModel* model, const StageConfig& cfg,
                             const std::vector<TrainingPair>& pairs,
                             const CheckpointCallback& on_checkpoint) {
  cfg.Validate();
  if (pairs.empty())
    throw EmptyDatasetError("stage " + std::to_string(cfg.stage_id) + " has no training pairs");
  const int s = model->config().downsample;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const TrainingPair& p = pairs[i];
    if (p.reference_speaker != cfg.reference_speaker)
      throw SpeakerFilterViolation(p.utterance_id + ": target speaker " + p.reference_speaker +
                                   " is not the stage reference " + cfg.reference_speaker);
    if (!cfg.random_speakers.count(p.speaker))
      throw SpeakerFilterViolation(p.utterance_id + ": speaker " + p.speaker +
                                   " is outside the stage " + std::to_string(cfg.stage_id) +
                                   " filter");
    CheckUnitRange(p.target.units(), model->config().num_units);
    if (p.features.NumFrames() / s < CtcMinFrames(p.target.units()) || p.target.empty()) {
      LogWarning("skipping " + p.utterance_id + ": target of " +
                 std::to_string(p.target.size()) + " units does not fit " +
                 std::to_string(p.features.NumFrames() / s) + " output frames");
      continue;
    }
    usable.push_back(i);
  }
  if (usable.empty())
    throw EmptyDatasetError("stage " + std::to_string(cfg.stage_id) + " has no usable pairs");

  nn::ParameterSet& ps = model->params();
  ps.SetGroupTrainable("frontend", false);
  ps.SetGroupTrainable("encoder", true);
  ps.SetGroupTrainable("ctc", true);

  StageResult result;
  result.frontend_checksum_before = ps.Checksum("frontend");
  result.init_checksum = ps.Checksum();

  nn::AdamOptions aopt;
  aopt.clip_norm = cfg.clip_norm;
  nn::Adam adam(&ps, aopt);
  Rng order_rng(cfg.seed);
  Rng aug_rng(DeriveSeed(cfg.seed, "augment", cfg.stage_id));
  std::vector<std::size_t> order = usable;
  Shuffle(&order, order_rng);
  std::size_t cursor = 0;
  const AugmentConfig& aug = cfg.augment;
  std::vector<std::vector<Matrix>> pool(pairs.size());
  if (aug.speed_probability > 0 || aug.noise_probability > 0)
    for (std::size_t i : usable)
      for (int v = 0; v < aug.variants; ++v)
        pool[i].push_back(PerturbedFrames(pairs[i], cfg, s, aug_rng));

  const auto start = std::chrono::steady_clock::now();
  for (long long step = 0; step < cfg.max_updates; ++step) {
    const double lr = nn::WarmupLinearDecay(step, cfg.max_updates, cfg.learning_rate,
                                            cfg.warmup_fraction);
    ps.ZeroGrad();
    double total = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        Shuffle(&order, order_rng);
        cursor = 0;
      }
      const TrainingPair& p = pairs[order[cursor++]];
      result.audit.push_back({step + 1, p.utterance_id, p.block});
      const std::size_t idx = order[cursor - 1];
      const Matrix* frames = &p.features.frames;
      if (!pool[idx].empty()) frames = &pool[idx][UniformIndex(aug_rng, pool[idx].size())];
      nn::Var logits;
      if (aug.mask_probability > 0 && UniformDouble(aug_rng) < aug.mask_probability) {
        Matrix masked = *frames;
        MaskFrames(aug, &masked, aug_rng);
        logits = model->Forward(masked);
      } else {
        logits = model->Forward(*frames);
      }
      nn::Var loss = CtcLoss(logits, p.target.units());
      total += loss.item();
      nn::Backward(nn::Scale(loss, 1.0 / cfg.batch_size));
    }
    adam.Step(lr);
    ++model->updates;
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start).count();
    result.log.push_back({step + 1, total / cfg.batch_size, lr, ms});
    if (on_checkpoint && cfg.checkpoint_interval > 0 &&
        (step + 1) % cfg.checkpoint_interval == 0 && step + 1 < cfg.max_updates) {
      model->optimizer_state = adam.ExportState();
      model->optimizer_steps = adam.steps();
      on_checkpoint(step + 1, *model);
    }
  }
  ps.ZeroGrad();
  model->optimizer_state = adam.ExportState();
  model->optimizer_steps = adam.steps();
  model->last_stage = cfg.stage_id;
  result.frontend_checksum_after = ps.Checksum("frontend");
  result.final_checksum = ps.Checksum();
  if (result.frontend_checksum_after != result.frontend_checksum_before)
    throw Error("front-end parameters changed during stage " + std::to_string(cfg.stage_id));
  return result;
}

NormUnitSequence Normalize(const NormalizerModel& model, const Waveform& w,
                           const FeatureConfig& feat_cfg,
                           const std::string& utterance_id) {
  const FrameFeatures f = ExtractFeatures(TrimSilence(w), feat_cfg, utterance_id);
  return CtcGreedyDecode(model.ForwardLogits(f));
}

}  // namespace unitdsr
