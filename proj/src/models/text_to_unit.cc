// src/models/text_to_unit.cc

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

#include "unitdsr/text_to_unit.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "unitdsr/errors.h"
#include "unitdsr/nn/optim.h"
#include "unitdsr/random.h"

namespace unitdsr {

int CharVocabulary::Id(char c) {
  if (c >= 'a' && c <= 'z') return 2 + (c - 'a');
  if (c >= '0' && c <= '9') return 28 + (c - '0');
  if (c == ' ') return 38;
  if (c == '\'') return 39;
  return kOov;
}

std::vector<int> CharVocabulary::Encode(const std::string& text) {
  const std::string norm = NormalizeText(text);
  if (norm.empty()) throw EmptyTextError("text is empty after normalization");
  std::vector<int> ids;
  ids.reserve(norm.size());
  for (char c : norm) ids.push_back(Id(c));
  return ids;
}

void TextToUnitConfig::Validate() const {
  if (num_units < 1 || model_dim < 1 || encoder_layers < 0 || decoder_layers < 0 ||
      num_heads < 1 || ff_dim < 1)
    throw ConfigError("text-to-unit config has non-positive sizes");
  if (model_dim % num_heads != 0)
    throw ConfigError("text-to-unit model_dim must be divisible by num_heads");
}

TextToUnitModel::TextToUnitModel(const TextToUnitConfig& cfg, std::uint64_t init_seed)
    : cfg_(cfg), params_(std::make_unique<nn::ParameterSet>()) {
  cfg_.Validate();
  Rng rng(init_seed);
  nn::ParameterSet* ps = params_.get();
  const int h = cfg_.model_dim;
  char_emb_ = nn::Embedding(ps, "encoder.char_emb", "encoder", CharVocabulary::Size(), h, rng);
  for (int i = 0; i < cfg_.encoder_layers; ++i)
    enc_.emplace_back(ps, "encoder.layer" + std::to_string(i), "encoder", h,
                      cfg_.num_heads, cfg_.ff_dim, rng);
  enc_norm_ = nn::LayerNormLayer(ps, "encoder.final_norm", "encoder", h);
  unit_emb_ = nn::Embedding(ps, "decoder.unit_emb", "decoder", cfg_.num_units + 2, h, rng);
  for (int i = 0; i < cfg_.decoder_layers; ++i)
    dec_.emplace_back(ps, "decoder.layer" + std::to_string(i), "decoder", h,
                      cfg_.num_heads, cfg_.ff_dim, rng);
  dec_norm_ = nn::LayerNormLayer(ps, "decoder.final_norm", "decoder", h);
  out_ = nn::Linear(ps, "decoder.out", "decoder", h, cfg_.num_units + 2, rng);
}

nn::Var TextToUnitModel::Encode(const std::vector<int>& chars) const {
  nn::Var x = char_emb_(chars);
  x = nn::Add(x, nn::Var(nn::SinusoidalPositions(x.rows(), cfg_.model_dim)));
  for (const auto& layer : enc_) x = layer(x);
  return enc_norm_(x);
}

nn::Var TextToUnitModel::Decode(const nn::Var& memory, const std::vector<int>& prefix) const {
  nn::Var y = unit_emb_(prefix);
  y = nn::Add(y, nn::Var(nn::SinusoidalPositions(y.rows(), cfg_.model_dim)));
  for (const auto& layer : dec_) y = layer(y, memory);
  return out_(dec_norm_(y));
}

Checkpoint TextToUnitModel::ToCheckpoint() const {
  Checkpoint c;
  c.meta["kind"] = "text2unit";
  c.meta["text2unit.num_units"] = std::to_string(cfg_.num_units);
  c.meta["text2unit.model_dim"] = std::to_string(cfg_.model_dim);
  c.meta["text2unit.encoder_layers"] = std::to_string(cfg_.encoder_layers);
  c.meta["text2unit.decoder_layers"] = std::to_string(cfg_.decoder_layers);
  c.meta["text2unit.num_heads"] = std::to_string(cfg_.num_heads);
  c.meta["text2unit.ff_dim"] = std::to_string(cfg_.ff_dim);
  c.meta["updates"] = std::to_string(updates);
  for (const auto& e : params_->entries()) c.tensors.emplace_back(e.name, e.var.value());
  return c;
}

TextToUnitModel TextToUnitModel::FromCheckpoint(const Checkpoint& c) {
  if (c.Meta("kind") != "text2unit")
    throw CorruptFileError("checkpoint holds a '" + c.Meta("kind") + "', not a text2unit model");
  TextToUnitConfig cfg;
  cfg.num_units = static_cast<int>(c.MetaInt("text2unit.num_units"));
  cfg.model_dim = static_cast<int>(c.MetaInt("text2unit.model_dim"));
  cfg.encoder_layers = static_cast<int>(c.MetaInt("text2unit.encoder_layers"));
  cfg.decoder_layers = static_cast<int>(c.MetaInt("text2unit.decoder_layers"));
  cfg.num_heads = static_cast<int>(c.MetaInt("text2unit.num_heads"));
  cfg.ff_dim = static_cast<int>(c.MetaInt("text2unit.ff_dim"));
  TextToUnitModel m(cfg, 0);
  for (auto& e : m.params().entries()) {
    const Matrix* t = c.FindTensor(e.name);
    if (t == nullptr) throw CorruptFileError("checkpoint lacks tensor " + e.name);
    if (t->rows() != e.var.rows() || t->cols() != e.var.cols())
      throw CorruptFileError("tensor " + e.name + " has the wrong shape");
    e.var.mutable_value() = *t;
  }
  m.updates = c.MetaInt("updates");
  return m;
}

std::vector<TextUnitPair> ReadTextUnitCorpus(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<TextUnitPair> out;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1)
      f.push_back(line.substr(start, tab - start));
    f.push_back(line.substr(start));
    if (f.size() != 3)
      throw FieldCountError(where + ": expected 3 fields, got " + std::to_string(f.size()));
    if (!seen.insert(f[0]).second) throw DuplicateIdError(where + ": duplicate id " + f[0]);
    TextUnitPair p{f[0], f[1], {}};
    std::istringstream units(f[2]);
    int u;
    while (units >> u) p.units.push_back(u);
    if (!units.eof()) throw ManifestError(where + ": non-integer unit");
    out.push_back(std::move(p));
  }
  return out;
}

void WriteTextUnitCorpus(const std::string& path, const std::vector<TextUnitPair>& corpus) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  for (const auto& p : corpus) {
    os << p.id << '\t' << p.text << '\t';
    for (std::size_t i = 0; i < p.units.size(); ++i) os << (i ? " " : "") << p.units[i];
    os << '\n';
  }
  if (!os) throw IoError("short write to " + path);
}

std::vector<TrainLogEntry> TrainTextToUnit(TextToUnitModel* model,
                                           const std::vector<TextUnitPair>& corpus,
                                           const TextToUnitTrainOptions& opts) {
  if (corpus.empty()) throw EmptyDatasetError("text-to-unit corpus is empty");
  if (opts.max_updates < 1 || opts.batch_size < 1)
    throw ConfigError("text-to-unit needs max_updates and batch_size >= 1");
  const int k = model->config().num_units;
  struct Example {
    std::vector<int> chars, input, target;
  };
  std::vector<Example> data;
  for (const auto& p : corpus) {
    CheckUnitRange(p.units, k);
    Example e;
    e.chars = CharVocabulary::Encode(p.text);
    const NormUnitSequence units = Dedup(p.units);
    e.input.push_back(model->Bos());
    for (int u : units.units()) {
      e.input.push_back(u);
      e.target.push_back(u);
    }
    e.target.push_back(model->Eos());
    data.push_back(std::move(e));
  }

  nn::ParameterSet& ps = model->params();
  nn::AdamOptions aopt;
  aopt.clip_norm = opts.clip_norm;
  nn::Adam adam(&ps, aopt);
  Rng rng(opts.seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Shuffle(&order, rng);
  std::size_t cursor = 0;
  std::vector<TrainLogEntry> log;
  const auto start = std::chrono::steady_clock::now();
  for (long long step = 0; step < opts.max_updates; ++step) {
    const double lr = nn::WarmupLinearDecay(step, opts.max_updates, opts.learning_rate,
                                            opts.warmup_fraction);
    ps.ZeroGrad();
    double total = 0.0;
    for (int b = 0; b < opts.batch_size; ++b) {
      if (cursor == order.size()) {
        Shuffle(&order, rng);
        cursor = 0;
      }
      const Example& e = data[order[cursor++]];
      nn::Var loss = nn::CrossEntropy(model->Decode(model->Encode(e.chars), e.input), e.target);
      total += loss.item();
      nn::Backward(nn::Scale(loss, 1.0 / opts.batch_size));
    }
    adam.Step(lr);
    ++model->updates;
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start).count();
    log.push_back({step + 1, total / opts.batch_size, lr, ms});
  }
  ps.ZeroGrad();
  return log;
}

NormUnitSequence TranslateTextToUnits(const TextToUnitModel& model, const std::string& text,
                                      int max_len) {
  if (max_len < 0) throw DomainError("max_len must be non-negative");
  nn::NoGradGuard guard;
  const nn::Var memory = model.Encode(CharVocabulary::Encode(text));
  std::vector<int> prefix = {model.Bos()};
  std::vector<int> units;
  while (static_cast<int>(units.size()) < max_len) {
    const Matrix logits = model.Decode(memory, prefix).value();
    const auto last = logits.row(logits.rows() - 1);
    int best = model.Eos();
    for (int c = 0; c < model.config().num_units; ++c)  // BOS is never emitted
      if (last(c) > last(best)) best = c;
    if (best == model.Eos()) break;
    units.push_back(best);
    prefix.push_back(best);
  }
  return Dedup(units);
}

}  // namespace unitdsr
