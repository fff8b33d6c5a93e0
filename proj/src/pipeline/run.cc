// src/pipeline/run.cc

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "unitdsr/checkpoint.h"
#include "unitdsr/ctc.h"
#include "unitdsr/errors.h"
#include "unitdsr/log.h"
#include "unitdsr/pipeline.h"
#include "unitdsr/random.h"
#include "unitdsr/text.h"

namespace unitdsr {

namespace fs = std::filesystem;

std::vector<LoadedUtterance> LoadUtterances(
    const std::vector<ManifestRecord>& records, const std::string& manifest_dir,
    const FeatureConfig& feat_cfg) {
  std::vector<LoadedUtterance> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::string path = ResolveAudioPath(r.audio_path, manifest_dir);
    if (!fs::exists(path))
      throw MissingPrerequisiteError("audio for '" + r.utterance_id +
                                     "' not found: " + path);
    LoadedUtterance u;
    u.record = r;
    u.audio = ReadWav(path);
    try {
      u.trimmed = TrimSilence(u.audio);
      u.features = ExtractFeatures(u.trimmed, feat_cfg, r.utterance_id);
    } catch (const AllSilentError&) {
      LogWarning("skipping all-silent utterance " + r.utterance_id);
      continue;
    } catch (const TooShortError&) {
      LogWarning("skipping utterance shorter than one frame: " + r.utterance_id);
      continue;
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::map<std::string, NormUnitSequence> ReferenceTargets(
    const std::vector<LoadedUtterance>& utts, const UnitCodebook& codebook,
    const std::string& reference, const std::string& target_block) {
  std::map<std::string, NormUnitSequence> out;
  for (const auto& u : utts) {
    if (u.record.speaker_id != reference || u.record.block_tag != target_block)
      continue;
    const std::string key = NormalizeText(u.record.transcript);
    if (out.count(key)) {
      LogWarning("reference " + reference + " has several " + target_block +
                 " takes of '" + key + "'; keeping the first");
      continue;
    }
    out.emplace(key, Dedup(Quantize(u.features, codebook)));
  }
  return out;
}

std::vector<TrainingPair> BuildPairs(
    const std::vector<LoadedUtterance>& utts,
    const std::map<std::string, NormUnitSequence>& targets,
    const std::string& reference, const std::set<std::string>& speakers,
    const std::set<std::string>& blocks) {
  std::vector<TrainingPair> out;
  for (const auto& u : utts) {
    if (!speakers.count(u.record.speaker_id) || !blocks.count(u.record.block_tag))
      continue;
    const auto t = targets.find(NormalizeText(u.record.transcript));
    if (t == targets.end()) {
      LogWarning("no reference take for '" + u.record.transcript + "'; skipping " +
                 u.record.utterance_id);
      continue;
    }
    TrainingPair p;
    p.utterance_id = u.record.utterance_id;
    p.speaker = u.record.speaker_id;
    p.reference_speaker = reference;
    p.content_key = t->first;
    p.block = u.record.block_tag;
    p.features = u.features;
    p.target = t->second;
    p.audio = u.audio;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::string Hash(std::initializer_list<std::string> parts) {
  std::uint64_t h = Fnv1a("");
  for (const auto& p : parts) {
    h = Fnv1a(p, h);
    h = Fnv1a(std::string(1, '\0'), h);
  }
  return HexHash(h);
}

// Dump restricted to keys starting with any of `prefixes`.
std::string DumpKeys(const PipelineConfig& cfg, std::initializer_list<std::string> prefixes) {
  std::string out;
  for (const auto& k : ConfigKeys()) {
    for (const auto& p : prefixes) {
      if (k.rfind(p, 0) == 0) {
        out += k + "=" + GetConfigValue(cfg, k) + "\n";
        break;
      }
    }
  }
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
  }
  fs::rename(tmp, path);
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

void WriteAudit(const std::string& path, const std::vector<BatchAuditEntry>& audit) {
  std::string text = "step\tutterance_id\tblock\n";
  for (const auto& a : audit)
    text += std::to_string(a.step) + "\t" + a.utterance_id + "\t" + a.block + "\n";
  WriteText(path, text);
}

void CheckSpeaker(const std::set<std::string>& known, const std::string& who,
                  const std::string& role) {
  if (!known.count(who))
    throw ConfigError(role + " speaker '" + who + "' does not occur in the manifest");
}

double MeanUer(const NormalizerModel& m, const std::vector<TrainingPair>& pairs) {
  if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (const auto& p : pairs)
    s += UnitErrorRate(CtcGreedyDecode(m.ForwardLogits(p.features)), p.target);
  return s / static_cast<double>(pairs.size());
}

struct Artifact {
  std::string name;
  std::string path;
  bool hashed = true;
};

}  // namespace

PipelineResult RunPipeline(const PipelineConfig& cfg, const std::vector<int>& stages,
                           const RunOptions& opts) {
  if (stages.empty()) throw ConfigError("no stages requested");
  const std::string label = StageLabel(stages);
  ParseStageList(label);  // validates ascending subset with stage 1
  if (cfg.manifest.empty()) throw ConfigError("manifest is not set");
  if (!fs::exists(cfg.manifest))
    throw MissingPrerequisiteError("manifest not found: " + cfg.manifest);
  cfg.features.Validate();

  PipelineResult res;
  res.stages = stages;
  res.label = label;
  const fs::path out = cfg.output_dir;
  fs::create_directories(out / "normalizer");
  fs::create_directories(out / "units");
  res.run_dir = (out / "runs" / label).string();
  fs::create_directories(fs::path(res.run_dir) / "eval");
  std::vector<Artifact> artifacts;

  // Ingest.
  const auto records = ParseManifest(cfg.manifest);
  std::set<std::string> known;
  for (const auto& r : records) known.insert(r.speaker_id);
  for (int s : stages) {
    const StageSpec& sp = cfg.stages[s - 1];
    CheckSpeaker(known, sp.reference_speaker, "stage " + std::to_string(s) + " reference");
    if (sp.random_speakers.empty())
      throw ConfigError("stage " + std::to_string(s) + " has no random speakers");
    for (const auto& r : sp.random_speakers)
      CheckSpeaker(known, r, "stage " + std::to_string(s) + " random");
  }
  CheckSpeaker(known, cfg.EvalReference(), "evaluation reference");
  for (const auto& s : cfg.EvalSpeakers()) CheckSpeaker(known, s, "evaluation");
  const std::set<std::string> dysarthric = DysarthricSpeakers(records);
  const std::string manifest_dir = fs::path(cfg.manifest).parent_path().string();
  const auto utts = LoadUtterances(records, manifest_dir, cfg.features);
  for (const auto& u : utts)
    if (cfg.train_blocks.count(u.record.block_tag) && u.record.block_tag == cfg.test_block)
      throw ConfigError("test block is also a training block");

  const std::string manifest_hash = HexHash(HashFile(cfg.manifest));
  const std::string base_hash = Hash(
      {manifest_hash, DumpKeys(cfg, {"seed", "features.", "codebook.", "data."})});

  auto derive = [&](const std::string& component, int stage = 0) {
    const std::uint64_t s = DeriveSeed(cfg.seed, component, stage);
    res.seeds[stage ? component + "." + std::to_string(stage) : component] = s;
    LogInfo("seed " + component + (stage ? "." + std::to_string(stage) : "") + " = " +
            std::to_string(s));
    return s;
  };

  // train-kmeans
  KMeansOptions ko = cfg.codebook;
  ko.seed = derive("kmeans");
  const std::string cb_path = (out / "codebook.udsc").string();
  const std::string cb_hash_path = cb_path + ".hash";
  UnitCodebook codebook;
  const bool cb_present = fs::exists(cb_path) && fs::exists(cb_hash_path);
  if (opts.reuse_artifacts && cb_present && ReadText(cb_hash_path) == base_hash + "\n") {
    codebook = ReadCodebook(cb_path);
    LogInfo("reusing codebook " + cb_path);
  } else {
    if (!opts.build_prerequisites)
      throw MissingPrerequisiteError("no up-to-date codebook at " + cb_path);
    std::vector<FrameFeatures> train;
    for (const auto& u : utts)
      if (cfg.train_blocks.count(u.record.block_tag)) train.push_back(u.features);
    if (train.empty()) throw EmptyDatasetError("no training-block audio for k-means");
    codebook = FitKMeans(train, ko);
    WriteCodebook(cb_path, codebook);
    WriteText(cb_hash_path, base_hash + "\n");
  }
  if (codebook.K() != ko.k || codebook.seed != ko.seed)
    throw ConfigMismatchError("codebook at " + cb_path + " has K=" +
                              std::to_string(codebook.K()) + ", config wants K=" +
                              std::to_string(ko.k));
  artifacts.push_back({"codebook", cb_path});
  const CodebookFingerprint fp{codebook.K(), codebook.seed};

  // extract-units
  {
    std::vector<UnitRecord> raw, norm;
    for (const auto& u : utts) {
      const UnitSequence z = Quantize(u.features, codebook);
      raw.push_back({u.record.utterance_id, z.units});
      norm.push_back({u.record.utterance_id, Dedup(z).units()});
    }
    WriteUnitFile((out / "units" / "all.units").string(), raw);
    WriteUnitFile((out / "units" / "all.norm").string(), norm);
    artifacts.push_back({"units.raw", (out / "units" / "all.units").string()});
    artifacts.push_back({"units.norm", (out / "units" / "all.norm").string()});
  }

  // Normalizer stages, chained.
  NormalizerConfig nc = cfg.normalizer;
  nc.num_units = codebook.K();
  nc.input_dim = codebook.Dim();
  nc.Validate();
  NormalizerModel model(nc, derive("normalizer.init"));
  model.fingerprint = fp;
  std::map<std::string, std::map<std::string, NormUnitSequence>> targets_by_ref;
  auto targets_for = [&](const std::string& ref) -> const auto& {
    auto it = targets_by_ref.find(ref);
    if (it == targets_by_ref.end())
      it = targets_by_ref.emplace(ref, ReferenceTargets(utts, codebook, ref, cfg.target_block)).first;
    return it->second;
  };
  std::string prefix_hash = Hash({base_hash, DumpKeys(cfg, {"normalizer.model_dim",
      "normalizer.num_layers", "normalizer.num_heads", "normalizer.ff_dim",
      "normalizer.downsample"})});
  std::vector<int> prefix;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const int s = stages[i];
    const StageSpec& sp = cfg.stages[s - 1];
    prefix.push_back(s);
    const std::string plabel = StageLabel(prefix);
    prefix_hash = Hash({prefix_hash, plabel,
                        DumpKeys(cfg, {"normalizer.stage" + std::to_string(s) + "."})});
    const fs::path ckpt_path = out / "normalizer" / ("s" + plabel + ".ckpt");
    StageRun run;
    run.stage = s;
    run.label = plabel;
    run.checkpoint = ckpt_path.string();
    run.seed = derive("normalizer.stage", s);

    bool reused = false;
    if (opts.reuse_artifacts && fs::exists(ckpt_path)) {
      const Checkpoint c = LoadCheckpoint(ckpt_path.string());
      NormalizerModel loaded = NormalizerModel::FromCheckpoint(c, fp);
      if (c.meta.count("pipeline.hash") && c.Meta("pipeline.hash") == prefix_hash) {
        model = std::move(loaded);
        run.reused = reused = true;
        run.pairs = c.MetaInt("pipeline.pairs");
        run.init_checksum = std::stoull(c.Meta("pipeline.init_checksum"));
        run.final_checksum = std::stoull(c.Meta("pipeline.final_checksum"));
        run.initial_loss = std::stod(c.Meta("pipeline.initial_loss"));
        run.final_loss = std::stod(c.Meta("pipeline.final_loss"));
        LogInfo("reusing stage prefix " + plabel + " from " + ckpt_path.string());
      } else {
        LogInfo("stage prefix " + plabel + " is stale; retraining");
      }
    }
    if (!reused) {
      if (!opts.build_prerequisites && i + 1 < stages.size())
        throw MissingPrerequisiteError("no up-to-date checkpoint for stage prefix " +
                                       plabel + " at " + ckpt_path.string());
      StageConfig sc;
      sc.stage_id = s;
      sc.reference_speaker = sp.reference_speaker;
      sc.random_speakers = sp.random_speakers;
      for (const auto& r : sp.random_speakers)
        if (dysarthric.count(r)) sc.dysarthric_speakers.insert(r);
      sc.max_updates = sp.max_updates;
      sc.learning_rate = sp.learning_rate;
      sc.warmup_fraction = sp.warmup_fraction;
      sc.batch_size = sp.batch_size;
      sc.clip_norm = sp.clip_norm;
      sc.seed = run.seed;
      sc.checkpoint_interval = sp.checkpoint_interval;
      sc.augment = sp.augment;
      sc.features = cfg.features;
      const auto pairs = BuildPairs(utts, targets_for(sp.reference_speaker),
                                    sp.reference_speaker, sp.random_speakers,
                                    cfg.train_blocks);
      run.pairs = static_cast<long long>(pairs.size());
      auto on_ckpt = [&](long long step, const NormalizerModel& m) {
        SaveCheckpoint(m.ToCheckpoint(),
                       (out / "normalizer" / ("s" + plabel + ".step" +
                                              std::to_string(step) + ".ckpt")).string());
      };
      const StageResult sr = RunFinetuneStage(&model, sc, pairs, on_ckpt);
      for (const auto& a : sr.audit)
        if (a.block == cfg.test_block)
          throw Error("test-block utterance " + a.utterance_id + " reached a training batch");
      run.init_checksum = sr.init_checksum;
      run.final_checksum = sr.final_checksum;
      run.initial_loss = sr.log.empty() ? 0.0 : sr.log.front().loss;
      run.final_loss = sr.log.empty() ? 0.0 : sr.log.back().loss;
      Checkpoint c = model.ToCheckpoint();
      c.meta["pipeline.hash"] = prefix_hash;
      c.meta["pipeline.stages"] = plabel;
      c.meta["pipeline.pairs"] = std::to_string(run.pairs);
      c.meta["pipeline.init_checksum"] = std::to_string(run.init_checksum);
      c.meta["pipeline.final_checksum"] = std::to_string(run.final_checksum);
      c.meta["pipeline.initial_loss"] = Fixed6(run.initial_loss);
      c.meta["pipeline.final_loss"] = Fixed6(run.final_loss);
      c.meta["pipeline.seed"] = std::to_string(run.seed);
      SaveCheckpoint(c, ckpt_path.string());
      const std::string base = (out / "normalizer" / ("s" + plabel)).string();
      WriteTrainingLog(base + ".log.csv", sr.log);
      WriteAudit(base + ".audit.tsv", sr.audit);
    }
    if (!res.stage_runs.empty() &&
        run.init_checksum != res.stage_runs.back().final_checksum)
      throw Error("stage " + plabel + " did not start from the previous stage's weights");
    const std::string base = (out / "normalizer" / ("s" + plabel)).string();
    artifacts.push_back({"normalizer." + plabel, ckpt_path.string()});
    artifacts.push_back({"normalizer." + plabel + ".audit", base + ".audit.tsv"});
    artifacts.push_back({"normalizer." + plabel + ".log", base + ".log.csv", false});
    res.stage_runs.push_back(run);
  }

  // Vocoder, shared by every stage subset.
  std::optional<UnitVocoder> vocoder;
  if (cfg.vocoder_enabled) {
    std::set<std::string> voc_speakers = {cfg.EvalReference()};
    for (const auto& sp : cfg.stages)
      if (known.count(sp.reference_speaker)) voc_speakers.insert(sp.reference_speaker);
    std::string spk_list;
    for (const auto& s : voc_speakers) spk_list += s + ",";
    const std::string voc_hash = Hash({base_hash, spk_list, DumpKeys(cfg, {"vocoder."})});
    fs::create_directories(out / "vocoder");
    const fs::path vpath = out / "vocoder" / "vocoder.ckpt";
    if (opts.reuse_artifacts && fs::exists(vpath)) {
      const Checkpoint c = LoadCheckpoint(vpath.string());
      if (c.meta.count("pipeline.hash") && c.Meta("pipeline.hash") == voc_hash) {
        vocoder.emplace(UnitVocoder::FromCheckpoint(c));
        LogInfo("reusing vocoder " + vpath.string());
      }
    }
    const std::uint64_t vinit = derive("vocoder.init");
    const std::uint64_t vtrain = derive("vocoder.train");
    if (!vocoder) {
      VocoderConfig vc = cfg.vocoder;
      vc.num_units = codebook.K();
      vocoder.emplace(vc, std::vector<std::string>(voc_speakers.begin(), voc_speakers.end()),
                      vinit);
      std::vector<VocoderTrainItem> items;
      for (const auto& u : utts)
        if (voc_speakers.count(u.record.speaker_id) &&
            cfg.train_blocks.count(u.record.block_tag))
          items.push_back(MakeVocoderTrainItem(u.record.utterance_id, u.record.speaker_id,
                                               Quantize(u.features, codebook), u.trimmed));
      VocoderTrainConfig tc = cfg.vocoder_train;
      tc.seed = vtrain;
      const auto vlog = TrainVocoder(&*vocoder, items, tc);
      Checkpoint c = vocoder->ToCheckpoint();
      c.meta["pipeline.hash"] = voc_hash;
      SaveCheckpoint(c, vpath.string());
      WriteVocoderLog((out / "vocoder" / "vocoder.log.csv").string(), vlog);
    }
    artifacts.push_back({"vocoder", vpath.string()});
    artifacts.push_back({"vocoder.log", (out / "vocoder" / "vocoder.log.csv").string(), false});
  }

  // Held-out evaluation.
  const fs::path eval_dir = fs::path(res.run_dir) / "eval";
  const std::string& eref = cfg.EvalReference();
  const auto& etargets = targets_for(eref);
  const auto train_pairs = BuildPairs(utts, etargets, eref, cfg.EvalSpeakers(), cfg.train_blocks);
  const auto test_pairs = BuildPairs(utts, etargets, eref, cfg.EvalSpeakers(), {cfg.test_block});
  if (test_pairs.empty())
    throw EmptyDatasetError("no " + cfg.test_block + " utterances for the evaluation speakers");
  res.train_uer = MeanUer(model, train_pairs);
  res.test_uer = MeanUer(model, test_pairs);

  std::map<std::string, const LoadedUtterance*> by_id;
  for (const auto& u : utts) by_id[u.record.utterance_id] = &u;
  const UnitMatchTranscriber transcriber(etargets);
  std::map<std::string, std::string> ref_text, speaker_of, hyp_orig, hyp_norm, hyp_dsr;
  std::string uer_csv = "split,speaker,uer,n\n";
  for (const auto& [split, pairs] :
       {std::pair{std::string("train"), &train_pairs}, std::pair{std::string("test"), &test_pairs}}) {
    std::map<std::string, std::pair<double, int>> per;
    for (const auto& p : *pairs) {
      auto& acc = per[p.speaker];
      acc.first += UnitErrorRate(CtcGreedyDecode(model.ForwardLogits(p.features)), p.target);
      ++acc.second;
    }
    for (const auto& [spk, acc] : per)
      uer_csv += split + "," + spk + "," + Fixed6(acc.first / acc.second) + "," +
                 std::to_string(acc.second) + "\n";
  }
  WriteText((eval_dir / "uer.csv").string(), uer_csv);
  artifacts.push_back({"eval.uer", (eval_dir / "uer.csv").string()});

  if (vocoder) fs::create_directories(eval_dir / "wav");
  for (const auto& p : test_pairs) {
    const LoadedUtterance& u = *by_id.at(p.utterance_id);
    ref_text[p.utterance_id] = u.record.transcript;
    speaker_of[p.utterance_id] = p.speaker;
    hyp_orig[p.utterance_id] = transcriber.Transcribe(Dedup(Quantize(u.features, codebook)));
    const NormUnitSequence norm = CtcGreedyDecode(model.ForwardLogits(p.features));
    hyp_norm[p.utterance_id] = norm.empty() ? "" : transcriber.Transcribe(norm);
    if (vocoder) {
      std::string text;
      if (!norm.empty()) {
        const Waveform w = vocoder->GenerateWaveform(norm, eref);
        WriteWav((eval_dir / "wav" / (p.utterance_id + ".wav")).string(), w);
        try {
          FeatureConfig fc = cfg.features;
          fc.mode = FeatureSource::kStandinLogmel;
          text = transcriber.Transcribe(Dedup(Quantize(ExtractFeatures(w, fc), codebook)));
        } catch (const TooShortError&) {
          LogWarning("reconstruction of " + p.utterance_id + " is too short to transcribe");
        }
      }
      hyp_dsr[p.utterance_id] = text;
    }
  }
  WriteTranscriptFile((eval_dir / "ref.tsv").string(), ref_text);
  WriteTranscriptFile((eval_dir / "hyp_original.tsv").string(), hyp_orig);
  WriteTranscriptFile((eval_dir / "hyp_normalizer.tsv").string(), hyp_norm);
  auto records_out = EvaluateTranscripts("original", hyp_orig, ref_text, speaker_of);
  auto add = [&](const std::string& sys, const std::map<std::string, std::string>& hyp) {
    auto r = EvaluateTranscripts(sys, hyp, ref_text, speaker_of);
    records_out.insert(records_out.end(), r.begin(), r.end());
  };
  add("normalizer", hyp_norm);
  if (vocoder) {
    WriteTranscriptFile((eval_dir / "hyp_unit-dsr.tsv").string(), hyp_dsr);
    add("unit-dsr", hyp_dsr);
  }
  AttachDeltas(&records_out, "original");
  WriteEvalReport((eval_dir / "wer.csv").string(), records_out);
  res.wer_records = records_out;
  artifacts.push_back({"eval.wer", (eval_dir / "wer.csv").string()});

  if (cfg.eval_robustness) {
    if (cfg.features.mode != FeatureSource::kStandinLogmel) {
      LogWarning("robustness sweep needs features computed from audio; skipped");
    } else {
      std::vector<TestUtterance> set;
      std::map<std::string, const NormUnitSequence*> target_of;
      for (const auto& p : test_pairs) {
        set.push_back({p.utterance_id, p.audio});
        target_of[p.utterance_id] = &p.target;
      }
      const UtteranceScorer score = [&](const TestUtterance& o, const Waveform& in) {
        return UnitErrorRate(Normalize(model, in, cfg.features, o.id), *target_of.at(o.id));
      };
      const std::uint64_t rseed = derive("robustness");
      for (RobustnessAxis axis : {RobustnessAxis::kSpeedRatio, RobustnessAxis::kSnrDb}) {
        const auto& custom =
            axis == RobustnessAxis::kSpeedRatio ? cfg.eval_speed_ratios : cfg.eval_snr_db;
        res.grids.push_back(RobustnessSweep(
            set, axis, custom.empty() ? DefaultAxisValues(axis) : custom, "uer", score, rseed));
      }
      WriteGridReport((eval_dir / "robustness.csv").string(), res.grids);
      WritePlotData((eval_dir / "robustness.plot.tsv").string(), res.grids);
      artifacts.push_back({"eval.robustness", (eval_dir / "robustness.csv").string()});
      artifacts.push_back({"eval.robustness.plot", (eval_dir / "robustness.plot.tsv").string()});
    }
  }

  // Summary.  Paths are relative to the output directory and logs carrying
  // wall-clock times are listed unhashed, so equal runs give equal bytes.
  PipelineConfig hashed = cfg;
  hashed.output_dir.clear();
  hashed.manifest.clear();
  std::string summary;
  summary += "stages\t" + label + "\n";
  summary += "config_hash\t" + HexHash(Fnv1a(DumpConfig(hashed))) + "\n";
  summary += "manifest_hash\t" + manifest_hash + "\n";
  for (const auto& [k, v] : res.seeds) summary += "seed\t" + k + "\t" + std::to_string(v) + "\n";
  for (const auto& r : res.stage_runs) {
    summary += "stage\t" + r.label + "\tinit\t" + HexHash(r.init_checksum) + "\tfinal\t" +
               HexHash(r.final_checksum) + "\n";
  }
  summary += "uer\ttrain\t" + Fixed6(res.train_uer) + "\n";
  summary += "uer\ttest\t" + Fixed6(res.test_uer) + "\n";
  for (const auto& a : artifacts) {
    res.artifacts[a.name] = a.path;
    const std::string rel = fs::relative(a.path, out).generic_string();
    summary += "artifact\t" + a.name + "\t" + rel + "\t" +
               (a.hashed && fs::exists(a.path) ? HexHash(HashFile(a.path)) : "-") + "\n";
  }
  res.summary_path = (fs::path(res.run_dir) / "summary.tsv").string();
  WriteText(res.summary_path, summary);
  WriteText((fs::path(res.run_dir) / "config.txt").string(), DumpConfig(cfg));
  return res;
}

std::vector<AblationRow> RunAblation(const PipelineConfig& cfg,
                                     const std::vector<std::vector<int>>& rows,
                                     const RunOptions& opts) {
  if (rows.empty()) throw ConfigError("no ablation rows");
  std::vector<AblationRow> out;
  std::string csv = "stages,train_uer,test_uer,normalizer_wer\n";
  for (const auto& stages : rows) {
    const PipelineResult r = RunPipeline(cfg, stages, opts);
    AblationRow row;
    row.label = r.label;
    row.train_uer = r.train_uer;
    row.test_uer = r.test_uer;
    int errs = 0, words = 0;
    for (const auto& rec : r.wer_records) {
      if (rec.system != "normalizer") continue;
      errs += rec.substitutions + rec.insertions + rec.deletions;
      words += rec.ref_words;
    }
    if (words > 0) row.wer = 100.0 * errs / words;
    csv += row.label + "," + Fixed6(row.train_uer) + "," + Fixed6(row.test_uer) + "," +
           (row.wer ? FormatOneDecimal(*row.wer) : "") + "\n";
    out.push_back(row);
  }
  WriteText((fs::path(cfg.output_dir) / "ablation.csv").string(), csv);
  return out;
}

}  // namespace unitdsr
