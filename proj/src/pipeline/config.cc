// src/pipeline/config.cc

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

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "unitdsr/errors.h"
#include "unitdsr/pipeline.h"

namespace unitdsr {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Parse / Format per value type.
void Parse(const std::string& v, std::string* out) { *out = v; }

void Parse(const std::string& v, long long* out) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno) throw ConfigError("not an integer: '" + v + "'");
  *out = x;
}

void Parse(const std::string& v, int* out) {
  long long x = 0;
  Parse(v, &x);
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("out of range: '" + v + "'");
  *out = static_cast<int>(x);
}

void Parse(const std::string& v, std::uint64_t* out) {
  char* end = nullptr;
  errno = 0;
  if (v.empty() || v[0] == '-') throw ConfigError("not an unsigned integer: '" + v + "'");
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0' || errno) throw ConfigError("not an unsigned integer: '" + v + "'");
  *out = x;
}

void Parse(const std::string& v, double* out) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno || !std::isfinite(x))
    throw ConfigError("not a finite number: '" + v + "'");
  *out = x;
}

void Parse(const std::string& v, bool* out) {
  if (v == "true" || v == "1") {
    *out = true;
  } else if (v == "false" || v == "0") {
    *out = false;
  } else {
    throw ConfigError("not a boolean: '" + v + "'");
  }
}

void Parse(const std::string& v, std::set<std::string>* out) {
  const auto items = SplitCommas(v);
  *out = std::set<std::string>(items.begin(), items.end());
}

void Parse(const std::string& v, std::vector<int>* out) {
  out->clear();
  for (const auto& s : SplitCommas(v)) Parse(s, &out->emplace_back());
}

// "clean" (or "inf") stands for the noiseless SNR cell.
void Parse(const std::string& v, std::vector<double>* out) {
  out->clear();
  for (const auto& s : SplitCommas(v)) {
    if (s == "clean" || s == "inf") {
      out->push_back(std::numeric_limits<double>::infinity());
    } else {
      Parse(s, &out->emplace_back());
    }
  }
}

void Parse(const std::string& v, FeatureSource* out) {
  try {
    *out = ParseFeatureSource(v);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void Parse(const std::string& v, std::optional<int>* out) {
  if (v == "none") {
    out->reset();
  } else {
    int x = 0;
    Parse(v, &x);
    *out = x;
  }
}

std::string Format(const std::string& v) { return v; }
std::string Format(long long v) { return std::to_string(v); }
std::string Format(int v) { return std::to_string(v); }
std::string Format(std::uint64_t v) { return std::to_string(v); }
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(double v) {
  if (std::isinf(v) && v > 0) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
std::string Format(FeatureSource v) { return ToString(v); }
std::string Format(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}
template <typename C>
std::string FormatList(const C& c) {
  std::string out;
  for (const auto& x : c) {
    if (!out.empty()) out += ',';
    out += Format(x);
  }
  return out;
}
std::string Format(const std::set<std::string>& v) { return FormatList(v); }
std::string Format(const std::vector<int>& v) { return FormatList(v); }
std::string Format(const std::vector<double>& v) { return FormatList(v); }

struct Entry {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};
using Table = std::map<std::string, Entry>;

template <typename F>
void Bind(Table* t, const std::string& key, F field) {
  (*t)[key] = Entry{
      [field](PipelineConfig& c, const std::string& v) { Parse(v, &field(c)); },
      [field](const PipelineConfig& c) {
        return Format(field(const_cast<PipelineConfig&>(c)));
      }};
}

#define UNITDSR_BIND(key, expr) \
  Bind(&t, key, [](PipelineConfig& c) -> auto& { return expr; })

Table BuildTable() {
  Table t;
  UNITDSR_BIND("seed", c.seed);
  UNITDSR_BIND("manifest", c.manifest);
  UNITDSR_BIND("output_dir", c.output_dir);

  UNITDSR_BIND("features.mode", c.features.mode);
  UNITDSR_BIND("features.n_mels", c.features.n_mels);
  UNITDSR_BIND("features.window_ms", c.features.window_ms);
  UNITDSR_BIND("features.hop_ms", c.features.hop_ms);
  UNITDSR_BIND("features.log_floor", c.features.log_floor);
  UNITDSR_BIND("features.external_dir", c.features.external_dir);
  UNITDSR_BIND("features.ssl_layer", c.features.ssl_layer);

  UNITDSR_BIND("codebook.k", c.codebook.k);
  UNITDSR_BIND("codebook.max_iter", c.codebook.max_iter);
  UNITDSR_BIND("codebook.rel_tol", c.codebook.rel_tol);

  UNITDSR_BIND("normalizer.model_dim", c.normalizer.model_dim);
  UNITDSR_BIND("normalizer.num_layers", c.normalizer.num_layers);
  UNITDSR_BIND("normalizer.num_heads", c.normalizer.num_heads);
  UNITDSR_BIND("normalizer.ff_dim", c.normalizer.ff_dim);
  UNITDSR_BIND("normalizer.downsample", c.normalizer.downsample);

  for (int s = 0; s < 3; ++s) {
    const std::string p = "normalizer.stage" + std::to_string(s + 1) + ".";
#define UNITDSR_STAGE(name, member) \
  Bind(&t, p + name, [s](PipelineConfig& c) -> auto& { return c.stages[s].member; })
    UNITDSR_STAGE("reference_speaker", reference_speaker);
    UNITDSR_STAGE("random_speakers", random_speakers);
    UNITDSR_STAGE("max_updates", max_updates);
    UNITDSR_STAGE("learning_rate", learning_rate);
    UNITDSR_STAGE("warmup_fraction", warmup_fraction);
    UNITDSR_STAGE("batch_size", batch_size);
    UNITDSR_STAGE("clip_norm", clip_norm);
    UNITDSR_STAGE("checkpoint_interval", checkpoint_interval);
    UNITDSR_STAGE("nominal_hours", nominal_hours);
    UNITDSR_STAGE("augment.variants", augment.variants);
    UNITDSR_STAGE("augment.speed_probability", augment.speed_probability);
    UNITDSR_STAGE("augment.speed_min", augment.speed_min);
    UNITDSR_STAGE("augment.speed_max", augment.speed_max);
    UNITDSR_STAGE("augment.noise_probability", augment.noise_probability);
    UNITDSR_STAGE("augment.snr_min_db", augment.snr_min_db);
    UNITDSR_STAGE("augment.snr_max_db", augment.snr_max_db);
    UNITDSR_STAGE("augment.mask_probability", augment.mask_probability);
    UNITDSR_STAGE("augment.time_masks", augment.time_masks);
    UNITDSR_STAGE("augment.time_mask_width", augment.time_mask_width);
    UNITDSR_STAGE("augment.freq_masks", augment.freq_masks);
    UNITDSR_STAGE("augment.freq_mask_width", augment.freq_mask_width);
#undef UNITDSR_STAGE
  }

  UNITDSR_BIND("data.train_blocks", c.train_blocks);
  UNITDSR_BIND("data.test_block", c.test_block);
  UNITDSR_BIND("data.target_block", c.target_block);

  UNITDSR_BIND("vocoder.enabled", c.vocoder_enabled);
  UNITDSR_BIND("vocoder.unit_dim", c.vocoder.unit_dim);
  UNITDSR_BIND("vocoder.speaker_dim", c.vocoder.speaker_dim);
  UNITDSR_BIND("vocoder.upsample_factors", c.vocoder.upsample_factors);
  UNITDSR_BIND("vocoder.generator_channels", c.vocoder.generator_channels);
  UNITDSR_BIND("vocoder.duration_channels", c.vocoder.duration_channels);
  UNITDSR_BIND("vocoder.mpd_periods", c.vocoder.mpd_periods);
  UNITDSR_BIND("vocoder.msd_scales", c.vocoder.msd_scales);
  UNITDSR_BIND("vocoder.disc_channels", c.vocoder.disc_channels);
  UNITDSR_BIND("vocoder.mel_fft", c.vocoder.mel_fft);
  UNITDSR_BIND("vocoder.mel_hop", c.vocoder.mel_hop);
  UNITDSR_BIND("vocoder.mel_bands", c.vocoder.mel_bands);
  UNITDSR_BIND("vocoder.max_updates", c.vocoder_train.max_updates);
  UNITDSR_BIND("vocoder.generator_lr", c.vocoder_train.generator_lr);
  UNITDSR_BIND("vocoder.discriminator_lr", c.vocoder_train.discriminator_lr);
  UNITDSR_BIND("vocoder.beta1", c.vocoder_train.beta1);
  UNITDSR_BIND("vocoder.beta2", c.vocoder_train.beta2);
  UNITDSR_BIND("vocoder.lambda_mel", c.vocoder_train.lambda_mel);
  UNITDSR_BIND("vocoder.lambda_fm", c.vocoder_train.lambda_fm);
  UNITDSR_BIND("vocoder.lambda_dur", c.vocoder_train.lambda_dur);
  UNITDSR_BIND("vocoder.segment_frames", c.vocoder_train.segment_frames);
  UNITDSR_BIND("vocoder.batch_size", c.vocoder_train.batch_size);

  UNITDSR_BIND("eval.reference_speaker", c.eval_reference);
  UNITDSR_BIND("eval.speakers", c.eval_speakers);
  UNITDSR_BIND("eval.robustness", c.eval_robustness);
  UNITDSR_BIND("eval.speed_ratios", c.eval_speed_ratios);
  UNITDSR_BIND("eval.snr_db", c.eval_snr_db);
  return t;
}

#undef UNITDSR_BIND

const Table& ConfigTable() {
  static const Table t = BuildTable();
  return t;
}

}  // namespace

const std::string& PipelineConfig::EvalReference() const {
  return eval_reference.empty() ? stages[2].reference_speaker : eval_reference;
}

const std::set<std::string>& PipelineConfig::EvalSpeakers() const {
  return eval_speakers.empty() ? stages[2].random_speakers : eval_speakers;
}

PipelineConfig DefaultPipelineConfig() {
  PipelineConfig c;
  c.stages[0].reference_speaker = "LJ";
  c.stages[0].random_speakers = {"VP1", "VP2", "VP3"};
  c.stages[0].nominal_hours = 10.0;
  c.stages[1].reference_speaker = "CF02";
  c.stages[1].random_speakers = {"CM01", "CM04"};
  c.stages[1].nominal_hours = 11.9;
  c.stages[2].reference_speaker = "CF02";
  c.stages[2].random_speakers = {"F02"};
  c.stages[2].nominal_hours = 1.2;
  for (auto& s : c.stages) {
    s.augment.variants = 12;
    s.augment.speed_probability = 0.5;
    s.augment.speed_min = 0.7;
    s.augment.speed_max = 1.7;
    s.augment.noise_probability = 0.5;
    s.augment.snr_min_db = 0.0;
    s.augment.snr_max_db = 35.0;
    s.augment.mask_probability = 0.8;
  }
  return c;
}

PipelineConfig ToyPipelineConfig() {
  PipelineConfig c = DefaultPipelineConfig();
  c.normalizer.model_dim = 96;
  c.normalizer.num_layers = 3;
  c.normalizer.num_heads = 2;
  c.normalizer.ff_dim = 192;
  const long long updates[3] = {1500, 800, 800};
  for (int s = 0; s < 3; ++s) {
    c.stages[s].max_updates = updates[s];
    c.stages[s].learning_rate = 1e-3;
  }
  c.vocoder.generator_channels = 64;
  c.vocoder_train.max_updates = 2000;
  return c;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [k, e] : ConfigTable()) keys.push_back(k);
  return keys;
}

void SetConfigValue(PipelineConfig* cfg, const std::string& key,
                    const std::string& value) {
  const auto& t = ConfigTable();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second.set(*cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::string GetConfigValue(const PipelineConfig& cfg, const std::string& key) {
  const auto& t = ConfigTable();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.get(cfg);
}

void ApplyConfigOverride(PipelineConfig* cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("expected key=value, got '" + assignment + "'");
  SetConfigValue(cfg, Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void ApplyConfigFile(PipelineConfig* cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (Trim(line).empty()) continue;
    try {
      ApplyConfigOverride(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

std::string DumpConfig(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [k, e] : ConfigTable()) out += k + "=" + e.get(cfg) + "\n";
  return out;
}

std::string StageLabel(const std::vector<int>& stages) {
  std::string out;
  for (int s : stages) {
    if (!out.empty()) out += '+';
    out += std::to_string(s);
  }
  return out;
}

std::vector<int> ParseStageList(const std::string& text) {
  std::vector<int> out;
  std::string cur;
  auto flush = [&] {
    const std::string t = Trim(cur);
    cur.clear();
    if (t.empty()) throw ConfigError("bad stage list '" + text + "'");
    int s = 0;
    Parse(t, &s);
    out.push_back(s);
  };
  for (char ch : text) {
    if (ch == ',' || ch == '+') {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1 || out[i] > 3 || (i > 0 && out[i] <= out[i - 1]))
      throw ConfigError("stages must be an ascending subset of {1,2,3}: '" + text + "'");
  }
  if (out.front() != 1) throw ConfigError("every stage subset must include stage 1");
  return out;
}

}  // namespace unitdsr
