// tools/unitdsr_main.cc

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

// unitdsr: command-line front end for every stage of the pipeline.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unitdsr/checkpoint.h"
#include "unitdsr/codec.h"
#include "unitdsr/ctc.h"
#include "unitdsr/errors.h"
#include "unitdsr/eval.h"
#include "unitdsr/log.h"
#include "unitdsr/normalizer.h"
#include "unitdsr/pipeline.h"
#include "unitdsr/random.h"
#include "unitdsr/text_to_unit.h"
#include "unitdsr/toy_corpus.h"
#include "unitdsr/vocoder.h"

namespace fs = std::filesystem;
using namespace unitdsr;

namespace {

struct Common {
  std::vector<std::string> config_files;
  std::vector<std::string> overrides;
  std::string feature_mode;
  bool verbose = false;
  bool quiet = false;

  PipelineConfig Load() const {
    PipelineConfig cfg = DefaultPipelineConfig();
    for (const auto& f : config_files) ApplyConfigFile(&cfg, f);
    for (const auto& o : overrides) ApplyConfigOverride(&cfg, o);
    if (!feature_mode.empty()) SetConfigValue(&cfg, "features.mode", feature_mode);
    return cfg;
  }
};

void AddCommon(CLI::App* app, Common* c) {
  app->add_option("--config", c->config_files, "key=value config file; repeatable, later wins");
  app->add_option("--set", c->overrides, "single key=value override; repeatable");
  app->add_option("--feature-mode", c->feature_mode, "logmel or external");
  app->add_flag("-v,--verbose", c->verbose, "log progress");
  app->add_flag("-q,--quiet", c->quiet, "suppress warnings");
}

std::vector<LoadedUtterance> LoadManifest(const std::string& manifest, const PipelineConfig& cfg) {
  const auto records = ParseManifest(manifest);
  return LoadUtterances(records, fs::path(manifest).parent_path().string(), cfg.features);
}

std::set<std::string> SplitSet(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return out;
}

void PrintUnits(const std::vector<int>& units) {
  for (std::size_t i = 0; i < units.size(); ++i) std::printf(i ? " %d" : "%d", units[i]);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unit-based dysarthric speech reconstruction toolkit"};
  app.require_subcommand(1);
  Common common;
  AddCommon(&app, &common);

  // make-toy-corpus
  auto* toy = app.add_subcommand("make-toy-corpus", "synthesise the parallel toy corpus");
  std::string toy_out;
  int toy_words = 20;
  std::uint64_t toy_seed = 7;
  toy->add_option("--out", toy_out, "output directory")->required();
  toy->add_option("--words", toy_words, "content words (<= 40)");
  toy->add_option("--seed", toy_seed, "take seed");

  // show-config
  auto* show = app.add_subcommand("show-config", "print the effective configuration");

  // train-kmeans
  auto* km = app.add_subcommand("train-kmeans", "fit the unit codebook on training blocks");
  std::string manifest, out_path, codebook_path;
  int k = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  km->add_option("--manifest", manifest)->required();
  km->add_option("--k", k, "codebook size (default from config)");
  km->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  km->add_option("--out", out_path, "codebook file")->required();

  // extract-units
  auto* ex = app.add_subcommand("extract-units", "quantize every manifest utterance");
  ex->add_option("--manifest", manifest)->required();
  ex->add_option("--codebook", codebook_path)->required();
  ex->add_option("--out", out_path, "output prefix; writes <out>.units and <out>.norm")->required();

  // train-text2unit
  auto* t2u = app.add_subcommand("train-text2unit", "train the character-to-unit model");
  std::string corpus_path;
  long long updates = -1;
  int t2u_units = 64, t2u_dim = 128;
  t2u->add_option("--corpus", corpus_path, "id<TAB>text<TAB>units lines")->required();
  t2u->add_option("--units", t2u_units, "codebook size K");
  t2u->add_option("--model-dim", t2u_dim);
  t2u->add_option("--updates", updates);
  t2u->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  t2u->add_option("--out", out_path, "checkpoint")->required();

  // text2unit
  auto* t2u_run = app.add_subcommand("text2unit", "translate text into norm units");
  std::string model_path, text;
  int max_len = 200;
  t2u_run->add_option("--model", model_path)->required();
  t2u_run->add_option("--text", text)->required();
  t2u_run->add_option("--max-len", max_len);

  // train-normalizer
  auto* tn = app.add_subcommand("train-normalizer", "run one fine-tuning stage");
  int stage = 1;
  std::string init_path, reference, random_speakers;
  tn->add_option("--stage", stage)->required()->check(CLI::Range(1, 3));
  tn->add_option("--init", init_path, "checkpoint to start from (stage 1 may start fresh)");
  tn->add_option("--manifest", manifest)->required();
  tn->add_option("--codebook", codebook_path)->required();
  tn->add_option("--reference-speaker", reference, "default from config");
  tn->add_option("--random-speakers", random_speakers, "comma list, default from config");
  tn->add_option("--updates", updates);
  tn->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  tn->add_option("--out", out_path, "checkpoint")->required();

  // train-vocoder
  auto* tv = app.add_subcommand("train-vocoder", "train the unit vocoder");
  std::string speakers;
  tv->add_option("--manifest", manifest)->required();
  tv->add_option("--codebook", codebook_path)->required();
  tv->add_option("--speakers", speakers, "comma list of target voices")->required();
  tv->add_option("--updates", updates);
  tv->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  tv->add_option("--out", out_path, "checkpoint")->required();

  // reconstruct
  auto* rc = app.add_subcommand("reconstruct", "synthesise speech from norm units or audio");
  std::string vocoder_path, units_path, audio_path, normalizer_path, speaker;
  rc->add_option("--vocoder", vocoder_path)->required();
  auto* units_opt = rc->add_option("--norm-units", units_path, "unit file; one wav per record");
  auto* audio_opt = rc->add_option("--audio", audio_path, "wav to normalise first");
  units_opt->excludes(audio_opt);
  rc->add_option("--normalizer", normalizer_path, "needed with --audio");
  rc->add_option("--speaker", speaker)->required();
  rc->add_option("--out", out_path, "wav file, or a directory for several records")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "WER and relative reduction per speaker");
  std::string ref_path, original = "original";
  std::vector<std::string> hyps;
  ev->add_option("--ref", ref_path, "id<TAB>reference text")->required();
  ev->add_option("--hyp", hyps, "system=path; repeatable")->required();
  ev->add_option("--manifest", manifest, "maps utterances to speakers")->required();
  ev->add_option("--original", original, "system the deltas are relative to");
  ev->add_option("--out", out_path, "CSV report")->required();

  // robustness
  auto* rb = app.add_subcommand("robustness", "UER under speed and noise perturbation");
  std::string axis = "speed", block = "B2", plot_path;
  rb->add_option("--normalizer", normalizer_path)->required();
  rb->add_option("--codebook", codebook_path)->required();
  rb->add_option("--manifest", manifest)->required();
  rb->add_option("--reference-speaker", reference, "default from config");
  rb->add_option("--speakers", speakers, "comma list, default from config");
  rb->add_option("--block", block);
  rb->add_option("--axis", axis, "speed, snr or both")->check(CLI::IsMember({"speed", "snr", "both"}));
  rb->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  rb->add_option("--out", out_path, "grid CSV")->required();
  rb->add_option("--plot", plot_path, "plot data TSV");

  // perturb
  auto* pt = app.add_subcommand("perturb", "apply speed and/or noise perturbation to a wav");
  double speed_ratio = 1.0, snr_db = INFINITY;
  std::uint64_t noise_seed = 0;
  pt->add_option("--audio", audio_path)->required();
  pt->add_option("--speed-ratio", speed_ratio, "resampling ratio, > 0");
  pt->add_option("--snr-db", snr_db, "white noise at this SNR; omit for none");
  pt->add_option("--noise-seed", noise_seed);
  pt->add_option("--out", out_path, "wav file")->required();

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "end-to-end run or stage ablation");
  std::string stage_list = "1,2,3";
  bool ablation = false, no_reuse = false, no_build = false;
  pl->add_option("--stages", stage_list, "e.g. 1,2,3 or 1+3");
  pl->add_flag("--ablation", ablation, "run rows 1, 1+3, 1+2, 1+2+3");
  pl->add_flag("--no-reuse", no_reuse, "retrain artifacts already on disk");
  pl->add_flag("--no-build", no_build, "fail instead of training missing prerequisites");
  pl->add_option("--manifest", manifest, "overrides the config");
  pl->add_option("--out", out_path, "overrides output_dir");

  for (auto* sub : app.get_subcommands({})) AddCommon(sub, &common);

  CLI11_PARSE(app, argc, argv);
  if (common.verbose) SetLogLevel(LogLevel::kInfo);
  if (common.quiet) SetLogLevel(LogLevel::kQuiet);

  try {
    PipelineConfig cfg = common.Load();

    if (toy->parsed()) {
      ToyCorpusOptions o;
      o.num_words = toy_words;
      o.seed = toy_seed;
      std::printf("%s\n", WriteToyCorpus(MakeToyCorpus(o), toy_out).c_str());
    } else if (show->parsed()) {
      std::printf("%s", DumpConfig(cfg).c_str());
    } else if (km->parsed()) {
      KMeansOptions ko = cfg.codebook;
      if (k > 0) ko.k = k;
      ko.seed = seed_given ? seed : DeriveSeed(cfg.seed, "kmeans");
      std::vector<FrameFeatures> train;
      for (const auto& u : LoadManifest(manifest, cfg))
        if (cfg.train_blocks.count(u.record.block_tag)) train.push_back(u.features);
      const UnitCodebook cb = FitKMeans(train, ko);
      WriteCodebook(out_path, cb);
      std::printf("K=%d D=%d iterations=%d inertia=%.6g\n", cb.K(), cb.Dim(),
                  cb.meta.iterations, cb.meta.final_inertia);
    } else if (ex->parsed()) {
      const UnitCodebook cb = ReadCodebook(codebook_path);
      std::vector<UnitRecord> raw, norm;
      for (const auto& u : LoadManifest(manifest, cfg)) {
        const UnitSequence z = Quantize(u.features, cb);
        raw.push_back({u.record.utterance_id, z.units});
        norm.push_back({u.record.utterance_id, Dedup(z).units()});
      }
      WriteUnitFile(out_path + ".units", raw);
      WriteUnitFile(out_path + ".norm", norm);
      std::printf("%zu utterances\n", raw.size());
    } else if (t2u->parsed()) {
      TextToUnitConfig tc;
      tc.num_units = t2u_units;
      tc.model_dim = t2u_dim;
      tc.ff_dim = 4 * t2u_dim;
      TextToUnitModel m(tc, DeriveSeed(seed_given ? seed : cfg.seed, "text2unit.init"));
      TextToUnitTrainOptions opts;
      if (updates >= 0) opts.max_updates = updates;
      opts.seed = DeriveSeed(seed_given ? seed : cfg.seed, "text2unit.train");
      const auto log = TrainTextToUnit(&m, ReadTextUnitCorpus(corpus_path), opts);
      SaveCheckpoint(m.ToCheckpoint(), out_path);
      WriteTrainingLog(out_path + ".log.csv", log);
      if (!log.empty()) std::printf("loss %.4f -> %.4f\n", log.front().loss, log.back().loss);
    } else if (t2u_run->parsed()) {
      const TextToUnitModel m = TextToUnitModel::FromCheckpoint(LoadCheckpoint(model_path));
      PrintUnits(TranslateTextToUnits(m, text, max_len).units());
    } else if (tn->parsed()) {
      const StageSpec& sp = cfg.stages[stage - 1];
      const UnitCodebook cb = ReadCodebook(codebook_path);
      const CodebookFingerprint fp{cb.K(), cb.seed};
      const auto records = ParseManifest(manifest);
      const auto utts = LoadUtterances(records, fs::path(manifest).parent_path().string(), cfg.features);
      StageConfig sc;
      sc.stage_id = stage;
      sc.reference_speaker = reference.empty() ? sp.reference_speaker : reference;
      sc.random_speakers = random_speakers.empty() ? sp.random_speakers : SplitSet(random_speakers);
      for (const auto& s : DysarthricSpeakers(records))
        if (sc.random_speakers.count(s)) sc.dysarthric_speakers.insert(s);
      sc.max_updates = updates >= 0 ? updates : sp.max_updates;
      sc.learning_rate = sp.learning_rate;
      sc.warmup_fraction = sp.warmup_fraction;
      sc.batch_size = sp.batch_size;
      sc.clip_norm = sp.clip_norm;
      sc.checkpoint_interval = sp.checkpoint_interval;
      sc.seed = seed_given ? seed : DeriveSeed(cfg.seed, "normalizer.stage", stage);
      sc.augment = sp.augment;
      sc.features = cfg.features;
      NormalizerConfig nc = cfg.normalizer;
      nc.num_units = cb.K();
      nc.input_dim = cb.Dim();
      NormalizerModel m = init_path.empty()
                              ? NormalizerModel(nc, DeriveSeed(cfg.seed, "normalizer.init"))
                              : NormalizerModel::FromCheckpoint(LoadCheckpoint(init_path), fp);
      if (init_path.empty()) {
        if (stage != 1) throw MissingPrerequisiteError("stage " + std::to_string(stage) + " needs --init");
        m.fingerprint = fp;
      }
      const auto targets = ReferenceTargets(utts, cb, sc.reference_speaker, cfg.target_block);
      const auto pairs = BuildPairs(utts, targets, sc.reference_speaker, sc.random_speakers,
                                    cfg.train_blocks);
      const StageResult r = RunFinetuneStage(&m, sc, pairs, [&](long long step, const NormalizerModel& mm) {
        SaveCheckpoint(mm.ToCheckpoint(), out_path + ".step" + std::to_string(step));
      });
      SaveCheckpoint(m.ToCheckpoint(), out_path);
      WriteTrainingLog(out_path + ".log.csv", r.log);
      std::printf("stage %d: %zu pairs, loss %.4f -> %.4f, checksum %s -> %s\n", stage,
                  pairs.size(), r.log.front().loss, r.log.back().loss,
                  HexHash(r.init_checksum).c_str(), HexHash(r.final_checksum).c_str());
    } else if (tv->parsed()) {
      const UnitCodebook cb = ReadCodebook(codebook_path);
      const std::set<std::string> voices = SplitSet(speakers);
      VocoderConfig vc = cfg.vocoder;
      vc.num_units = cb.K();
      UnitVocoder v(vc, {voices.begin(), voices.end()},
                    DeriveSeed(seed_given ? seed : cfg.seed, "vocoder.init"));
      std::vector<VocoderTrainItem> items;
      for (const auto& u : LoadManifest(manifest, cfg))
        if (voices.count(u.record.speaker_id) && cfg.train_blocks.count(u.record.block_tag))
          items.push_back(MakeVocoderTrainItem(u.record.utterance_id, u.record.speaker_id,
                                               Quantize(u.features, cb), u.trimmed));
      VocoderTrainConfig tc = cfg.vocoder_train;
      if (updates >= 0) tc.max_updates = updates;
      tc.seed = DeriveSeed(seed_given ? seed : cfg.seed, "vocoder.train");
      const auto log = TrainVocoder(&v, items, tc);
      SaveCheckpoint(v.ToCheckpoint(), out_path);
      WriteVocoderLog(out_path + ".log.csv", log);
      if (!log.empty()) std::printf("mel %.4f -> %.4f\n", log.front().mel, log.back().mel);
    } else if (rc->parsed()) {
      const UnitVocoder v = UnitVocoder::FromCheckpoint(LoadCheckpoint(vocoder_path));
      std::vector<std::pair<std::string, NormUnitSequence>> todo;
      if (!units_path.empty()) {
        for (const auto& r : ReadUnitFile(units_path)) todo.emplace_back(r.utterance_id, Dedup(r.units));
      } else if (!audio_path.empty()) {
        if (normalizer_path.empty()) throw MissingPrerequisiteError("--audio needs --normalizer");
        const NormalizerModel m = NormalizerModel::FromCheckpoint(LoadCheckpoint(normalizer_path));
        todo.emplace_back(fs::path(audio_path).stem().string(),
                          Normalize(m, ReadWav(audio_path), cfg.features));
      } else {
        throw ConfigError("give --norm-units or --audio");
      }
      const bool single = todo.size() == 1 && fs::path(out_path).extension() == ".wav";
      if (!single) fs::create_directories(out_path);
      for (const auto& [id, units] : todo) {
        const std::string dst = single ? out_path : (fs::path(out_path) / (id + ".wav")).string();
        WriteWav(dst, v.GenerateWaveform(units, speaker));
        std::printf("%s\n", dst.c_str());
      }
    } else if (ev->parsed()) {
      std::map<std::string, std::string> speaker_of;
      for (const auto& r : ParseManifest(manifest)) speaker_of[r.utterance_id] = r.speaker_id;
      const auto ref = ReadTranscriptFile(ref_path);
      std::vector<EvalRecord> records;
      for (const auto& h : hyps) {
        const auto eq = h.find('=');
        if (eq == std::string::npos) throw ConfigError("--hyp wants system=path, got " + h);
        auto r = EvaluateTranscripts(h.substr(0, eq), ReadTranscriptFile(h.substr(eq + 1)), ref,
                                     speaker_of);
        records.insert(records.end(), r.begin(), r.end());
      }
      AttachDeltas(&records, original);
      WriteEvalReport(out_path, records);
      std::set<std::string> systems;
      for (const auto& r : records) systems.insert(r.system);
      for (const auto& s : systems) {
        std::vector<EvalRecord> mine;
        for (const auto& r : records)
          if (r.system == s) mine.push_back(r);
        try {
          std::printf("%s: average relative reduction %s%%\n", s.c_str(),
                      FormatOneDecimal(AggregateDeltas(mine)).c_str());
        } catch (const EmptyCollectionError&) {
        }
      }
    } else if (rb->parsed()) {
      const UnitCodebook cb = ReadCodebook(codebook_path);
      const NormalizerModel m = NormalizerModel::FromCheckpoint(
          LoadCheckpoint(normalizer_path), CodebookFingerprint{cb.K(), cb.seed});
      const std::string ref = reference.empty() ? cfg.EvalReference() : reference;
      const std::set<std::string> who = speakers.empty() ? cfg.EvalSpeakers() : SplitSet(speakers);
      const auto utts = LoadManifest(manifest, cfg);
      const auto pairs = BuildPairs(utts, ReferenceTargets(utts, cb, ref, cfg.target_block), ref,
                                    who, {block});
      std::vector<TestUtterance> set;
      std::map<std::string, NormUnitSequence> target_of;
      for (const auto& p : pairs) {
        set.push_back({p.utterance_id, p.audio});
        target_of[p.utterance_id] = p.target;
      }
      const UtteranceScorer score = [&](const TestUtterance& o, const Waveform& in) {
        return UnitErrorRate(Normalize(m, in, cfg.features, o.id), target_of.at(o.id));
      };
      std::vector<RobustnessGrid> grids;
      const std::uint64_t rseed = seed_given ? seed : DeriveSeed(cfg.seed, "robustness");
      for (RobustnessAxis a : {RobustnessAxis::kSpeedRatio, RobustnessAxis::kSnrDb}) {
        if (axis != "both" && axis != ToString(a)) continue;
        const auto& custom = a == RobustnessAxis::kSpeedRatio ? cfg.eval_speed_ratios : cfg.eval_snr_db;
        grids.push_back(RobustnessSweep(set, a, custom.empty() ? DefaultAxisValues(a) : custom,
                                        "uer", score, rseed));
      }
      WriteGridReport(out_path, grids);
      if (!plot_path.empty()) WritePlotData(plot_path, grids);
      for (const auto& g : grids)
        for (const auto& c : g.cells)
          std::printf("%s %g: %.4f (%d ok, %d failed)\n", ToString(g.axis).c_str(), c.value,
                      c.mean, c.n_ok, c.n_fail);
    } else if (pt->parsed()) {
      Waveform w = ReadWav(audio_path);
      if (speed_ratio != 1.0) w = SpeedPerturb(w, speed_ratio);
      std::size_t clipped = 0;
      if (std::isfinite(snr_db)) w = AddNoiseAtSnr(w, snr_db, noise_seed, &clipped);
      WriteWav(out_path, w);
      std::printf("%s: %zu samples, %zu clipped\n", out_path.c_str(), w.size(), clipped);
    } else if (pl->parsed()) {
      if (!manifest.empty()) cfg.manifest = manifest;
      if (!out_path.empty()) cfg.output_dir = out_path;
      RunOptions opts;
      opts.reuse_artifacts = !no_reuse;
      opts.build_prerequisites = !no_build;
      if (ablation) {
        for (const auto& row : RunAblation(cfg, {{1}, {1, 3}, {1, 2}, {1, 2, 3}}, opts))
          std::printf("%-6s train UER %.4f  test UER %.4f  WER %s\n", row.label.c_str(),
                      row.train_uer, row.test_uer,
                      row.wer ? FormatOneDecimal(*row.wer).c_str() : "-");
      } else {
        const PipelineResult r = RunPipeline(cfg, ParseStageList(stage_list), opts);
        std::printf("train UER %.4f  test UER %.4f\nsummary %s\n", r.train_uer, r.test_uer,
                    r.summary_path.c_str());
      }
    }
  } catch (const unitdsr::Error& e) {
    std::fprintf(stderr, "unitdsr: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unitdsr: unexpected error: %s\n", e.what());
    return 2;
  }
  return 0;
}
