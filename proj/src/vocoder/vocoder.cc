// src/vocoder/vocoder.cc

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

#include "unitdsr/vocoder.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "unitdsr/errors.h"
#include "unitdsr/nn/ops.h"
#include "unitdsr/nn/optim.h"
#include "unitdsr/random.h"

namespace unitdsr {

namespace {

constexpr double kLeak = 0.1;
constexpr double kMinDuration = 0.1;
constexpr double kMelFloor = 1e-5;

// Transposed-conv geometry giving exactly stride * T outputs.
std::pair<int, int> UpsampleKernel(int stride) {
  if (stride % 2 == 0) return {2 * stride, stride / 2};
  return {2 * stride + 1, (stride + 1) / 2};
}

}  // namespace

int VocoderConfig::HopSamples() const {
  return static_cast<int>(std::lround(sample_rate * hop_ms / 1000.0));
}

void VocoderConfig::Validate() const {
  if (num_units < 1 || unit_dim < 1 || speaker_dim < 1 || generator_channels < 1 ||
      duration_channels < 1 || disc_channels < 1 || msd_scales < 0 || mel_bands < 1)
    throw ConfigError("vocoder config has non-positive sizes");
  if (sample_rate <= 0 || !(hop_ms > 0)) throw ConfigError("vocoder needs a positive rate and hop");
  long long product = 1;
  for (int f : upsample_factors) {
    if (f < 1) throw ConfigError("upsample factors must be positive");
    product *= f;
  }
  if (product != HopSamples())
    throw ConfigError("upsample factors multiply to " + std::to_string(product) +
                      ", expected " + std::to_string(HopSamples()) + " samples per frame");
  for (int p : mpd_periods)
    if (p < 2) throw ConfigError("discriminator periods must be >= 2");
  if (mel_hop < 1 || mel_fft < 2) throw ConfigError("bad mel loss geometry");
}

std::vector<int> RoundDurations(const std::vector<double>& durations) {
  std::vector<int> out;
  out.reserve(durations.size());
  for (double d : durations) {
    if (!std::isfinite(d)) throw DomainError("non-finite duration");
    out.push_back(std::max(1, static_cast<int>(std::floor(d + 0.5))));
  }
  return out;
}

static void CheckDurationTargets(std::size_t n, const DurationSequence& target) {
  if (n != target.size())
    throw LengthMismatchError("duration loss: " + std::to_string(n) + " predictions, " +
                              std::to_string(target.size()) + " targets");
  for (int d : target.durations)
    if (d < 1) throw DomainError("duration targets must be >= 1");
}

nn::Var DurationLoss(const nn::Var& pred, const DurationSequence& target) {
  CheckDurationTargets(static_cast<std::size_t>(pred.rows()), target);
  Matrix log_t(target.size(), 1);
  for (std::size_t i = 0; i < target.size(); ++i) log_t(i, 0) = std::log(target.durations[i]);
  return nn::Mean(nn::Square(nn::Sub(nn::Log(pred), nn::Var(log_t))));
}

double DurationLoss(const std::vector<double>& pred, const DurationSequence& target) {
  CheckDurationTargets(pred.size(), target);
  if (pred.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] > 0)) throw DomainError("predicted durations must be positive");
    const double d = std::log(pred[i] / target.durations[i]);
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

LogMelLoss::LogMelLoss(int sample_rate, int n_fft, int hop, int n_mels)
    : n_fft_(n_fft), hop_(hop) {
  DftBasis b = MakeDftBasis(n_fft, n_fft, HannWindow(n_fft));
  cos_ = nn::Var(std::move(b.cos_part));
  sin_ = nn::Var(std::move(b.sin_part));
  fb_t_ = nn::Var(Matrix(MelFilterbank(n_mels, n_fft, sample_rate).transpose()));
}

nn::Var LogMelLoss::LogMel(const nn::Var& signal) const {
  nn::Var frames = nn::FrameSignal(signal, n_fft_, hop_);
  nn::Var power = nn::Add(nn::Square(nn::MatMul(frames, cos_)),
                          nn::Square(nn::MatMul(frames, sin_)));
  return nn::Log(nn::AddScalar(nn::MatMul(power, fb_t_), kMelFloor));
}

nn::Var LogMelLoss::operator()(const nn::Var& fake, const nn::Var& real) const {
  return nn::L1Loss(LogMel(fake), LogMel(real));
}

UnitVocoder::UnitVocoder(const VocoderConfig& cfg, std::vector<std::string> speakers,
                         std::uint64_t init_seed)
    : cfg_(cfg), speakers_(std::move(speakers)),
      gen_(std::make_unique<nn::ParameterSet>()),
      disc_(std::make_unique<nn::ParameterSet>()) {
  cfg_.Validate();
  if (speakers_.empty()) throw ConfigError("vocoder needs at least one speaker");
  for (std::size_t i = 0; i < speakers_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (speakers_[i] == speakers_[j]) throw ConfigError("duplicate speaker " + speakers_[i]);
  Rng rng(init_seed);
  nn::ParameterSet* g = gen_.get();
  unit_lut_ = nn::Embedding(g, "unit_lut", "lut", cfg_.num_units, cfg_.unit_dim, rng);
  speaker_lut_ = nn::Embedding(g, "speaker_lut", "lut", static_cast<int>(speakers_.size()),
                               cfg_.speaker_dim, rng);
  const int dc = cfg_.duration_channels;
  dur_conv1_ = nn::Conv1dLayer(g, "duration.conv1", "duration", cfg_.unit_dim, dc, 3, 1, 1, rng);
  dur_norm1_ = nn::LayerNormLayer(g, "duration.norm1", "duration", dc);
  dur_conv2_ = nn::Conv1dLayer(g, "duration.conv2", "duration", dc, dc, 3, 1, 1, rng);
  dur_norm2_ = nn::LayerNormLayer(g, "duration.norm2", "duration", dc);
  dur_out_ = nn::Linear(g, "duration.out", "duration", dc, 1, rng);

  int ch = cfg_.generator_channels;
  conv_pre_ = nn::Conv1dLayer(g, "generator.conv_pre", "generator",
                              cfg_.unit_dim + cfg_.speaker_dim, ch, 7, 1, 3, rng);
  for (std::size_t i = 0; i < cfg_.upsample_factors.size(); ++i) {
    const int s = cfg_.upsample_factors[i];
    const auto [k, p] = UpsampleKernel(s);
    const int next = std::max(8, ch / 2);
    const std::string name = "generator.up" + std::to_string(i);
    ups_.emplace_back(g, name, "generator", ch, next, k, s, p, rng);
    ResBlock rb;
    for (int d : {1, 3}) {
      const std::string rn = "generator.res" + std::to_string(i) + ".d" + std::to_string(d);
      rb.convs.emplace_back(g, rn + ".a", "generator", next, next, 3, 1, d, rng, d);
      rb.convs.emplace_back(g, rn + ".b", "generator", next, next, 3, 1, 1, rng);
    }
    res_.push_back(std::move(rb));
    ch = next;
  }
  conv_post_ = nn::Conv1dLayer(g, "generator.conv_post", "generator", ch, 1, 7, 1, 3, rng);

  nn::ParameterSet* d = disc_.get();
  const int c = cfg_.disc_channels;
  for (int period : cfg_.mpd_periods) {
    const std::string n = "mpd.p" + std::to_string(period);
    ConvStack s;
    s.convs.emplace_back(d, n + ".conv0", "mpd", 1, c, 5, 3, 2, rng);
    s.convs.emplace_back(d, n + ".conv1", "mpd", c, 2 * c, 5, 3, 2, rng);
    s.convs.emplace_back(d, n + ".conv2", "mpd", 2 * c, 2 * c, 5, 1, 2, rng);
    s.post = nn::Conv1dLayer(d, n + ".post", "mpd", 2 * c, 1, 3, 1, 1, rng);
    mpd_.push_back(std::move(s));
  }
  for (int i = 0; i < cfg_.msd_scales; ++i) {
    const std::string n = "msd.s" + std::to_string(i);
    ConvStack s;
    s.convs.emplace_back(d, n + ".conv0", "msd", 1, c, 15, 1, 7, rng);
    s.convs.emplace_back(d, n + ".conv1", "msd", c, 2 * c, 11, 4, 5, rng);
    s.convs.emplace_back(d, n + ".conv2", "msd", 2 * c, 2 * c, 11, 4, 5, rng);
    s.convs.emplace_back(d, n + ".conv3", "msd", 2 * c, 2 * c, 5, 1, 2, rng);
    s.post = nn::Conv1dLayer(d, n + ".post", "msd", 2 * c, 1, 3, 1, 1, rng);
    msd_.push_back(std::move(s));
  }
}

int UnitVocoder::SpeakerIndex(const std::string& id) const {
  for (std::size_t i = 0; i < speakers_.size(); ++i)
    if (speakers_[i] == id) return static_cast<int>(i);
  throw UnknownSpeakerError("speaker '" + id + "' is not registered with the vocoder");
}

nn::Var UnitVocoder::PredictDurationsVar(const NormUnitSequence& units) const {
  if (units.empty()) throw EmptySequenceError("cannot predict durations of no units");
  CheckUnitRange(units.units(), cfg_.num_units);
  nn::Var h = unit_lut_(units.units());
  h = dur_norm1_(nn::Relu(dur_conv1_(h)));
  h = dur_norm2_(nn::Relu(dur_conv2_(h)));
  return nn::AddScalar(nn::Softplus(dur_out_(h)), kMinDuration);
}

std::vector<double> UnitVocoder::PredictDurations(const NormUnitSequence& units) const {
  nn::NoGradGuard guard;
  const Matrix d = PredictDurationsVar(units).value();
  return std::vector<double>(d.data(), d.data() + d.size());
}

nn::Var UnitVocoder::UpsampleWithSpeaker(const NormUnitSequence& units,
                                         const std::vector<int>& durations,
                                         const std::string& speaker) const {
  const int spk = SpeakerIndex(speaker);
  if (units.size() != durations.size())
    throw LengthMismatchError(std::to_string(units.size()) + " units but " +
                              std::to_string(durations.size()) + " durations");
  CheckUnitRange(units.units(), cfg_.num_units);
  std::vector<int> owner;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (durations[i] < 1) throw DomainError("durations must be >= 1 frame");
    owner.insert(owner.end(), durations[i], units[i]);
  }
  if (owner.empty()) throw EmptySequenceError("nothing to upsample");
  nn::Var zc = unit_lut_(owner);
  nn::Var zs = nn::RepeatRow(speaker_lut_({spk}), zc.rows());
  return nn::ConcatCols({zc, zs});
}

nn::Var UnitVocoder::Generate(const nn::Var& frames) const {
  if (frames.cols() != cfg_.unit_dim + cfg_.speaker_dim)
    throw DimensionMismatchError("generator input has the wrong width");
  nn::Var x = conv_pre_(frames);
  for (std::size_t i = 0; i < ups_.size(); ++i) {
    x = ups_[i](nn::LeakyRelu(x, kLeak));
    const auto& convs = res_[i].convs;
    for (std::size_t j = 0; j + 1 < convs.size(); j += 2) {
      nn::Var r = convs[j](nn::LeakyRelu(x, kLeak));
      x = nn::Add(x, convs[j + 1](nn::LeakyRelu(r, kLeak)));
    }
  }
  return nn::Tanh(conv_post_(nn::LeakyRelu(x, kLeak)));
}

Waveform UnitVocoder::GenerateWaveform(const NormUnitSequence& units, const std::string& speaker,
                                       const std::optional<std::vector<int>>& durations) const {
  nn::NoGradGuard guard;
  const std::vector<int> d = durations ? *durations : RoundDurations(PredictDurations(units));
  const Matrix y = Generate(UpsampleWithSpeaker(units, d, speaker)).value();
  Waveform w;
  w.sample_rate_hz = cfg_.sample_rate;
  w.samples.assign(y.data(), y.data() + y.size());
  return w;
}

DiscriminatorOutput UnitVocoder::RunStack(const ConvStack& s, const nn::Var& x) const {
  DiscriminatorOutput out;
  nn::Var h = x;
  for (const auto& conv : s.convs) {
    h = nn::LeakyRelu(conv(h), kLeak);
    out.features.push_back(h);
  }
  out.score = s.post(h);
  return out;
}

std::vector<DiscriminatorOutput> UnitVocoder::Discriminate(const nn::Var& signal) const {
  std::vector<DiscriminatorOutput> outs;
  const Eigen::Index n = signal.rows();
  for (std::size_t k = 0; k < mpd_.size(); ++k) {
    // Each phase of the period is its own sequence; weights are shared.
    const int p = cfg_.mpd_periods[k];
    DiscriminatorOutput merged;
    std::vector<nn::Var> scores;
    std::vector<std::vector<nn::Var>> feats;
    for (int phase = 0; phase < p && phase < n; ++phase) {
      std::vector<int> idx;
      for (Eigen::Index i = phase; i < n; i += p) idx.push_back(static_cast<int>(i));
      DiscriminatorOutput o = RunStack(mpd_[k], nn::GatherRows(signal, idx));
      scores.push_back(o.score);
      feats.push_back(std::move(o.features));
    }
    merged.score = nn::ConcatRows(scores);
    for (std::size_t l = 0; l < feats.front().size(); ++l) {
      std::vector<nn::Var> layer;
      for (const auto& f : feats) layer.push_back(f[l]);
      merged.features.push_back(nn::ConcatRows(layer));
    }
    outs.push_back(std::move(merged));
  }
  nn::Var x = signal;
  for (std::size_t k = 0; k < msd_.size(); ++k) {
    if (k > 0) x = nn::AvgPool1d(x, 4, 2, 2);
    outs.push_back(RunStack(msd_[k], x));
  }
  return outs;
}

Checkpoint UnitVocoder::ToCheckpoint() const {
  Checkpoint c;
  c.meta["kind"] = "vocoder";
  c.meta["vocoder.num_units"] = std::to_string(cfg_.num_units);
  c.meta["vocoder.unit_dim"] = std::to_string(cfg_.unit_dim);
  c.meta["vocoder.speaker_dim"] = std::to_string(cfg_.speaker_dim);
  c.meta["vocoder.sample_rate"] = std::to_string(cfg_.sample_rate);
  char hop[32];
  std::snprintf(hop, sizeof hop, "%.17g", cfg_.hop_ms);
  c.meta["vocoder.hop_ms"] = hop;
  std::string ups, periods;
  for (int f : cfg_.upsample_factors) ups += (ups.empty() ? "" : ",") + std::to_string(f);
  for (int p : cfg_.mpd_periods) periods += (periods.empty() ? "" : ",") + std::to_string(p);
  c.meta["vocoder.upsample_factors"] = ups;
  c.meta["vocoder.mpd_periods"] = periods;
  c.meta["vocoder.generator_channels"] = std::to_string(cfg_.generator_channels);
  c.meta["vocoder.duration_channels"] = std::to_string(cfg_.duration_channels);
  c.meta["vocoder.msd_scales"] = std::to_string(cfg_.msd_scales);
  c.meta["vocoder.disc_channels"] = std::to_string(cfg_.disc_channels);
  c.meta["vocoder.mel_fft"] = std::to_string(cfg_.mel_fft);
  c.meta["vocoder.mel_hop"] = std::to_string(cfg_.mel_hop);
  c.meta["vocoder.mel_bands"] = std::to_string(cfg_.mel_bands);
  c.meta["speakers.count"] = std::to_string(speakers_.size());
  for (std::size_t i = 0; i < speakers_.size(); ++i)
    c.meta["speakers." + std::to_string(i)] = speakers_[i];
  c.meta["updates"] = std::to_string(updates);
  for (const auto& e : gen_->entries()) c.tensors.emplace_back("gen." + e.name, e.var.value());
  for (const auto& e : disc_->entries()) c.tensors.emplace_back("disc." + e.name, e.var.value());
  return c;
}

static std::vector<int> ParseIntList(const std::string& s) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= s.size() && !s.empty()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw CorruptFileError("bad integer list '" + s + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

UnitVocoder UnitVocoder::FromCheckpoint(const Checkpoint& c) {
  if (c.Meta("kind") != "vocoder")
    throw CorruptFileError("checkpoint holds a '" + c.Meta("kind") + "', not a vocoder");
  VocoderConfig cfg;
  cfg.num_units = static_cast<int>(c.MetaInt("vocoder.num_units"));
  cfg.unit_dim = static_cast<int>(c.MetaInt("vocoder.unit_dim"));
  cfg.speaker_dim = static_cast<int>(c.MetaInt("vocoder.speaker_dim"));
  cfg.sample_rate = static_cast<int>(c.MetaInt("vocoder.sample_rate"));
  cfg.hop_ms = std::stod(c.Meta("vocoder.hop_ms"));
  cfg.upsample_factors = ParseIntList(c.Meta("vocoder.upsample_factors"));
  cfg.mpd_periods = ParseIntList(c.Meta("vocoder.mpd_periods"));
  cfg.generator_channels = static_cast<int>(c.MetaInt("vocoder.generator_channels"));
  cfg.duration_channels = static_cast<int>(c.MetaInt("vocoder.duration_channels"));
  cfg.msd_scales = static_cast<int>(c.MetaInt("vocoder.msd_scales"));
  cfg.disc_channels = static_cast<int>(c.MetaInt("vocoder.disc_channels"));
  cfg.mel_fft = static_cast<int>(c.MetaInt("vocoder.mel_fft"));
  cfg.mel_hop = static_cast<int>(c.MetaInt("vocoder.mel_hop"));
  cfg.mel_bands = static_cast<int>(c.MetaInt("vocoder.mel_bands"));
  std::vector<std::string> speakers;
  const long long n = c.MetaInt("speakers.count");
  for (long long i = 0; i < n; ++i) speakers.push_back(c.Meta("speakers." + std::to_string(i)));
  UnitVocoder v(cfg, speakers, 0);
  auto load = [&](nn::ParameterSet& ps, const std::string& prefix) {
    for (auto& e : ps.entries()) {
      const Matrix* t = c.FindTensor(prefix + e.name);
      if (t == nullptr) throw CorruptFileError("checkpoint lacks tensor " + prefix + e.name);
      if (t->rows() != e.var.rows() || t->cols() != e.var.cols())
        throw CorruptFileError("tensor " + prefix + e.name + " has the wrong shape");
      e.var.mutable_value() = *t;
    }
  };
  load(*v.gen_, "gen.");
  load(*v.disc_, "disc.");
  v.updates = c.MetaInt("updates");
  return v;
}

VocoderTrainItem MakeVocoderTrainItem(const std::string& id, const std::string& speaker,
                                      const UnitSequence& frame_units,
                                      const Waveform& trimmed_audio) {
  const RunLengthEncoding rle = RunLengthEncode(frame_units);
  VocoderTrainItem item;
  item.id = id;
  item.speaker = speaker;
  item.units = rle.units;
  item.durations = rle.durations;
  item.audio = trimmed_audio;
  return item;
}

std::vector<VocoderLogEntry> TrainVocoder(UnitVocoder* v,
                                          const std::vector<VocoderTrainItem>& items,
                                          const VocoderTrainConfig& cfg) {
  if (items.empty()) throw EmptyDatasetError("vocoder training set is empty");
  if (cfg.segment_frames < 1 || cfg.batch_size < 1 || cfg.max_updates < 0)
    throw ConfigError("vocoder training needs positive segment and batch sizes");
  const VocoderConfig& vc = v->config();
  const int hop = vc.HopSamples();
  if (cfg.segment_frames * hop < vc.mel_fft)
    throw ConfigError("training segments are shorter than one mel frame");
  for (const auto& it : items) {
    v->SpeakerIndex(it.speaker);
    CheckUnitRange(it.units.units(), vc.num_units);
    if (it.units.size() != it.durations.size() || it.units.empty())
      throw LengthMismatchError(it.id + ": units and durations disagree");
  }
  std::vector<VocoderLogEntry> log;
  if (cfg.max_updates == 0) return log;

  nn::AdamOptions gopt, dopt;
  gopt.beta1 = dopt.beta1 = cfg.beta1;
  gopt.beta2 = dopt.beta2 = cfg.beta2;
  nn::Adam gen_opt(&v->generator_params(), gopt);
  nn::Adam disc_opt(&v->discriminator_params(), dopt);
  const LogMelLoss mel(vc.sample_rate, vc.mel_fft, vc.mel_hop, vc.mel_bands);
  Rng rng(cfg.seed);
  const int seg = cfg.segment_frames;
  const auto start = std::chrono::steady_clock::now();

  for (long long step = 0; step < cfg.max_updates; ++step) {
    struct Segment {
      const VocoderTrainItem* item;
      nn::Var fake;
      nn::Var real;
    };
    std::vector<Segment> batch;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const VocoderTrainItem& it = items[UniformIndex(rng, items.size())];
      const nn::Var frames = v->UpsampleWithSpeaker(it.units, it.durations.durations, it.speaker);
      const long long total = frames.rows();
      const long long first =
          total > seg ? static_cast<long long>(UniformIndex(rng, total - seg + 1)) : 0;
      const long long count = std::min<long long>(seg, total);
      Matrix real = Matrix::Zero(count * hop, 1);
      for (long long i = 0; i < real.rows(); ++i) {
        const std::size_t src = static_cast<std::size_t>(first * hop + i);
        if (src < it.audio.samples.size()) real(i, 0) = it.audio.samples[src];
      }
      nn::Var fake = v->Generate(nn::SliceRows(frames, first, count));
      if (real.rows() < vc.mel_fft) {
        // Utterances shorter than one mel frame: zero-pad both sides.
        const Eigen::Index pad = vc.mel_fft - real.rows();
        fake = nn::ConcatRows({fake, nn::Var(Matrix::Zero(pad, 1))});
        real.conservativeResize(vc.mel_fft, 1);
        real.bottomRows(pad).setZero();
      }
      batch.push_back({&it, fake, nn::Var(real)});
    }

    // Discriminator: real toward 1, generated toward 0.
    v->discriminator_params().ZeroGrad();
    v->generator_params().ZeroGrad();
    double d_total = 0.0;
    for (const auto& s : batch) {
      const auto dr = v->Discriminate(s.real);
      const auto df = v->Discriminate(nn::Detach(s.fake));
      nn::Var loss;
      for (std::size_t k = 0; k < dr.size(); ++k) {
        nn::Var term = nn::Add(nn::Mean(nn::Square(nn::AddScalar(dr[k].score, -1.0))),
                               nn::Mean(nn::Square(df[k].score)));
        loss = k == 0 ? term : nn::Add(loss, term);
      }
      d_total += loss.item();
      nn::Backward(nn::Scale(loss, 1.0 / cfg.batch_size));
    }
    const double decay = nn::WarmupLinearDecay(step, cfg.max_updates, 1.0, 0.0);
    disc_opt.Step(cfg.discriminator_lr * decay);

    // Generator.
    v->discriminator_params().ZeroGrad();
    v->generator_params().ZeroGrad();
    double adv_sum = 0, mel_sum = 0, fm_sum = 0, dur_sum = 0, g_sum = 0;
    for (const auto& s : batch) {
      std::vector<DiscriminatorOutput> dr;
      {
        nn::NoGradGuard guard;
        dr = v->Discriminate(s.real);
      }
      const auto df = v->Discriminate(s.fake);
      nn::Var adv, fm;
      for (std::size_t k = 0; k < df.size(); ++k) {
        nn::Var a = nn::Mean(nn::Square(nn::AddScalar(df[k].score, -1.0)));
        adv = k == 0 ? a : nn::Add(adv, a);
        for (std::size_t l = 0; l < df[k].features.size(); ++l) {
          nn::Var f = nn::L1Loss(df[k].features[l], nn::Detach(dr[k].features[l]));
          fm = fm.defined() ? nn::Add(fm, f) : f;
        }
      }
      nn::Var mel_term = mel(s.fake, s.real);
      nn::Var dur = DurationLoss(v->PredictDurationsVar(s.item->units), s.item->durations);
      nn::Var total = nn::Add(nn::Add(adv, nn::Scale(mel_term, cfg.lambda_mel)),
                              nn::Add(nn::Scale(fm, cfg.lambda_fm), nn::Scale(dur, cfg.lambda_dur)));
      g_sum += total.item();
      adv_sum += adv.item();
      mel_sum += mel_term.item();
      fm_sum += fm.item();
      dur_sum += dur.item();
      nn::Backward(nn::Scale(total, 1.0 / cfg.batch_size));
    }
    gen_opt.Step(cfg.generator_lr * decay);
    v->discriminator_params().ZeroGrad();
    ++v->updates;

    VocoderLogEntry e;
    const double inv = 1.0 / cfg.batch_size;
    e.step = step + 1;
    e.adversarial = adv_sum * inv;
    e.mel = mel_sum * inv;
    e.feature_matching = fm_sum * inv;
    e.duration = dur_sum * inv;
    e.generator_total = g_sum * inv;
    e.discriminator = d_total * inv;
    e.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start).count();
    log.push_back(e);
  }
  v->generator_params().ZeroGrad();
  return log;
}

void WriteVocoderLog(const std::string& path, const std::vector<VocoderLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "step,generator_total,adversarial,mel,feature_matching,duration,discriminator,wall_ms\n";
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.3f\n", e.step,
                  e.generator_total, e.adversarial, e.mel, e.feature_matching, e.duration,
                  e.discriminator, e.wall_ms);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace unitdsr
