// tests/pipeline_test.cc

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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "test_util.h"
#include "unitdsr/checkpoint.h"
#include "unitdsr/errors.h"
#include "unitdsr/pipeline.h"
#include "unitdsr/random.h"
#include "unitdsr/toy_corpus.h"

namespace unitdsr {
namespace {

namespace fs = std::filesystem;

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path WriteFile(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

template <typename E>
std::string MessageOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  return "<no throw>";
}

TEST(ManifestTest, ParsesSixFields) {
  const auto dir = testing_util::TempDir("manifest");
  const auto p = WriteFile(dir / "m.tsv",
                           "u1\ta.wav\tCF02\tbath\tB2\thealthy\n"
                           "\n"
                           "u2\tb/c.wav\tF02\tit's a dog\tB1\tdysarthric\r\n");
  const auto recs = ParseManifest(p.string());
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].utterance_id, "u1");
  EXPECT_EQ(recs[0].audio_path, "a.wav");
  EXPECT_EQ(recs[0].speaker_id, "CF02");
  EXPECT_EQ(recs[0].transcript, "bath");
  EXPECT_EQ(recs[0].block_tag, "B2");
  EXPECT_EQ(recs[0].health_tag, HealthTag::kHealthy);
  EXPECT_EQ(recs[1].line, 3);
  EXPECT_EQ(recs[1].transcript, "it's a dog");
  EXPECT_EQ(recs[1].health_tag, HealthTag::kDysarthric);
  EXPECT_EQ(DysarthricSpeakers(recs), std::set<std::string>{"F02"});
}

TEST(ManifestTest, ErrorsNameTheLine) {
  const auto dir = testing_util::TempDir("manifest_err");
  const std::string ok = "u1\ta.wav\tCF02\tbath\tB2\thealthy\n";
  auto path = [&](const std::string& body) { return WriteFile(dir / "m.tsv", body).string(); };

  std::string msg = MessageOf<FieldCountError>(
      [&] { ParseManifest(path(ok + "u2\ta.wav\tCF02\tbath\tB2\n")); });
  EXPECT_NE(msg.find("m.tsv:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("got 5"), std::string::npos) << msg;

  msg = MessageOf<DuplicateIdError>([&] { ParseManifest(path(ok + "\n" + ok)); });
  EXPECT_NE(msg.find("m.tsv:3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;

  EXPECT_THROW(ParseManifest(path("u1\t\tCF02\tbath\tB2\thealthy\n")), ManifestError);
  EXPECT_THROW(ParseManifest(path("u1\ta.wav\tCF02\tbath\tB7\thealthy\n")), ManifestError);
  EXPECT_THROW(ParseManifest(path("u1\ta.wav\tCF02\tbath\tB2\tunwell\n")), ManifestError);
  EXPECT_THROW(ParseManifest(path(ok + "u2\tb.wav\tCF02\tdog\tB1\tdysarthric\n")),
               ManifestError);
  EXPECT_NO_THROW(ParseManifest(path("u1\ta.wav\tS\tw\tB7\thealthy\n"), {"B7"}));
  EXPECT_THROW(ParseManifest((dir / "absent.tsv").string()), IoError);
}

TEST(ManifestTest, RelativePathsUseDataDir) {
  unsetenv("UNITDSR_DATA_DIR");
  EXPECT_EQ(ResolveAudioPath("/abs/a.wav", "/m"), "/abs/a.wav");
  EXPECT_EQ(ResolveAudioPath("wav/a.wav", "/m"), "/m/wav/a.wav");
  setenv("UNITDSR_DATA_DIR", "/data", 1);
  EXPECT_EQ(ResolveAudioPath("wav/a.wav", "/m"), "/data/wav/a.wav");
  EXPECT_EQ(ResolveAudioPath("/abs/a.wav", "/m"), "/abs/a.wav");
  unsetenv("UNITDSR_DATA_DIR");
}

TEST(ConfigTest, KeysValuesAndLayering) {
  PipelineConfig c = DefaultPipelineConfig();
  SetConfigValue(&c, "normalizer.stage2.max_updates", "10000");
  EXPECT_EQ(c.stages[1].max_updates, 10000);
  SetConfigValue(&c, "normalizer.stage1.random_speakers", "VP2, VP1");
  EXPECT_EQ(c.stages[0].random_speakers, (std::set<std::string>{"VP1", "VP2"}));
  SetConfigValue(&c, "features.ssl_layer", "none");
  EXPECT_FALSE(c.features.ssl_layer.has_value());
  EXPECT_THROW(SetConfigValue(&c, "normalizer.stage4.max_updates", "1"), ConfigError);
  EXPECT_THROW(SetConfigValue(&c, "codebook.k", "6x4"), ConfigError);
  EXPECT_THROW(SetConfigValue(&c, "vocoder.enabled", "maybe"), ConfigError);
  EXPECT_THROW(SetConfigValue(&c, "seed", "-1"), ConfigError);
  EXPECT_THROW(ApplyConfigOverride(&c, "codebook.k"), ConfigError);

  const auto dir = testing_util::TempDir("config");
  const auto a = WriteFile(dir / "a.conf",
                           "# base\ncodebook.k = 32\nseed=5  # trailing\n\n");
  const auto b = WriteFile(dir / "b.conf", "codebook.k=48\n");
  PipelineConfig d = DefaultPipelineConfig();
  ApplyConfigFile(&d, a.string());
  ApplyConfigFile(&d, b.string());
  EXPECT_EQ(d.codebook.k, 48);
  EXPECT_EQ(d.seed, 5u);
  WriteFile(dir / "bad.conf", "seed=1\nnormalizer.depth=3\n");
  const std::string msg = MessageOf<ConfigError>(
      [&] { ApplyConfigFile(&d, (dir / "bad.conf").string()); });
  EXPECT_NE(msg.find("bad.conf:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("normalizer.depth"), std::string::npos) << msg;
  EXPECT_THROW(ApplyConfigFile(&d, (dir / "absent.conf").string()), IoError);
}

TEST(ConfigTest, DumpRoundTrips) {
  PipelineConfig c = ToyPipelineConfig();
  c.eval_speed_ratios = {0.5, 1.25};
  SetConfigValue(&c, "eval.snr_db", "0, 15, clean");
  ASSERT_EQ(c.eval_snr_db.size(), 3u);
  EXPECT_TRUE(std::isinf(c.eval_snr_db[2]));
  EXPECT_EQ(GetConfigValue(c, "eval.snr_db"), "0,15,clean");
  c.stages[2].augment.snr_min_db = 0.1;
  const auto dir = testing_util::TempDir("config_dump");
  WriteFile(dir / "dump.conf", DumpConfig(c));
  PipelineConfig d = DefaultPipelineConfig();
  ApplyConfigFile(&d, (dir / "dump.conf").string());
  EXPECT_EQ(DumpConfig(d), DumpConfig(c));
  EXPECT_EQ(d.stages[2].augment.snr_min_db, 0.1);
  const std::string dump = DumpConfig(c);
  EXPECT_EQ(ConfigKeys().size(),
            static_cast<std::size_t>(std::count(dump.begin(), dump.end(), '\n')));
}

TEST(ConfigTest, StageLists) {
  EXPECT_EQ(ParseStageList("1,2,3"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(ParseStageList("1+3"), (std::vector<int>{1, 3}));
  EXPECT_EQ(StageLabel({1, 2}), "1+2");
  for (const char* bad : {"", "2,3", "1,1", "3,1", "1,4", "1,,2", "x"})
    EXPECT_THROW(ParseStageList(bad), ConfigError) << bad;
}

// A four-word toy corpus and a configuration small enough to run in seconds.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(testing_util::TempDir("pipeline"));
    ToyCorpusOptions o;
    o.num_words = 4;
    manifest_ = new std::string(WriteToyCorpus(MakeToyCorpus(o), (*root_ / "corpus").string()));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
    delete manifest_;
  }

  static PipelineConfig TinyConfig(const std::string& out) {
    PipelineConfig c = ToyPipelineConfig();
    c.manifest = *manifest_;
    c.output_dir = (*root_ / out).string();
    c.codebook.k = 16;
    c.normalizer.model_dim = 32;
    c.normalizer.num_layers = 1;
    c.normalizer.ff_dim = 64;
    for (auto& s : c.stages) {
      s.max_updates = 12;
      s.batch_size = 4;
      s.augment.variants = 2;
    }
    c.vocoder.unit_dim = 16;
    c.vocoder.generator_channels = 8;
    c.vocoder.duration_channels = 8;
    c.vocoder_train.max_updates = 3;
    c.eval_speed_ratios = {1.0, 1.2};
    c.eval_snr_db = {20.0};
    return c;
  }

  static fs::path* root_;
  static std::string* manifest_;
};

fs::path* PipelineTest::root_ = nullptr;
std::string* PipelineTest::manifest_ = nullptr;

TEST_F(PipelineTest, ChainsStagesAndKeepsTestBlockOut) {
  const PipelineConfig cfg = TinyConfig("chain");
  const PipelineResult r = RunPipeline(cfg, {1, 3});
  ASSERT_EQ(r.stage_runs.size(), 2u);
  EXPECT_EQ(r.stage_runs[0].label, "1");
  EXPECT_EQ(r.stage_runs[1].label, "1+3");
  EXPECT_EQ(r.stage_runs[1].init_checksum, r.stage_runs[0].final_checksum);
  EXPECT_NE(r.stage_runs[1].final_checksum, r.stage_runs[1].init_checksum);
  EXPECT_FALSE(r.stage_runs[0].reused);
  EXPECT_EQ(r.seeds.at("kmeans"), DeriveSeed(cfg.seed, "kmeans"));
  EXPECT_EQ(r.stage_runs[1].seed, DeriveSeed(cfg.seed, "normalizer.stage", 3));
  EXPECT_EQ(r.seeds.at("normalizer.stage.3"), r.stage_runs[1].seed);

  // The stored stage-1 checkpoint is exactly what stage 3 started from.
  const Checkpoint s1 = LoadCheckpoint(r.stage_runs[0].checkpoint);
  EXPECT_EQ(NormalizerModel::FromCheckpoint(s1).params().Checksum(),
            r.stage_runs[1].init_checksum);
  EXPECT_EQ(s1.Meta("stage"), "1");

  for (const auto& run : r.stage_runs) {
    const std::string audit = ReadAll(fs::path(cfg.output_dir) / "normalizer" /
                                      ("s" + run.label + ".audit.tsv"));
    EXPECT_GT(std::count(audit.begin(), audit.end(), '\n'), 12);
    EXPECT_EQ(audit.find("\tB2\n"), std::string::npos);
    EXPECT_NE(audit.find("\tB3\n"), std::string::npos);
  }
  for (const char* f : {"eval/wer.csv", "eval/uer.csv", "eval/robustness.csv",
                        "eval/hyp_unit-dsr.tsv", "summary.tsv"})
    EXPECT_TRUE(fs::exists(fs::path(r.run_dir) / f)) << f;
  const std::string wer = ReadAll(fs::path(r.run_dir) / "eval" / "wer.csv");
  EXPECT_NE(wer.find("original,F02,"), std::string::npos) << wer;
  EXPECT_NE(wer.find("unit-dsr,F02,"), std::string::npos) << wer;
  ASSERT_EQ(r.grids.size(), 2u);
  EXPECT_EQ(r.grids[0].cells.size(), 2u);

  // Unchanged rerun loads every artifact and reports identical hashes.
  const std::string summary = ReadAll(r.summary_path);
  const PipelineResult again = RunPipeline(cfg, {1, 3});
  EXPECT_TRUE(again.stage_runs[0].reused);
  EXPECT_TRUE(again.stage_runs[1].reused);
  EXPECT_EQ(ReadAll(again.summary_path), summary);

  // 1+2+3 shares the stage-1 prefix.
  const PipelineResult full = RunPipeline(cfg, {1, 2, 3});
  EXPECT_TRUE(full.stage_runs[0].reused);
  EXPECT_FALSE(full.stage_runs[1].reused);
  EXPECT_EQ(full.stage_runs[1].init_checksum, r.stage_runs[0].final_checksum);
  EXPECT_EQ(full.stage_runs[2].init_checksum, full.stage_runs[1].final_checksum);
  EXPECT_NE(full.stage_runs[2].final_checksum, r.stage_runs[1].final_checksum);
}

TEST_F(PipelineTest, FreshRunsAreByteIdentical) {
  const PipelineResult a = RunPipeline(TinyConfig("repro_a"), {1, 2});
  const PipelineResult b = RunPipeline(TinyConfig("repro_b"), {1, 2});
  EXPECT_FALSE(b.stage_runs[1].reused);
  EXPECT_EQ(ReadAll(a.summary_path), ReadAll(b.summary_path));
  for (const char* f : {"eval/wer.csv", "eval/uer.csv", "eval/robustness.csv"})
    EXPECT_EQ(ReadAll(fs::path(a.run_dir) / f), ReadAll(fs::path(b.run_dir) / f)) << f;
  EXPECT_EQ(HashFile(a.artifacts.at("normalizer.1+2")),
            HashFile(b.artifacts.at("normalizer.1+2")));
  EXPECT_EQ(HashFile(a.artifacts.at("vocoder")), HashFile(b.artifacts.at("vocoder")));

  PipelineConfig other = TinyConfig("repro_c");
  other.seed = 2;
  const PipelineResult c = RunPipeline(other, {1});
  EXPECT_NE(c.stage_runs[0].final_checksum, a.stage_runs[0].final_checksum);
}

TEST_F(PipelineTest, CodebookMismatchIsRejected) {
  PipelineConfig cfg = TinyConfig("mismatch");
  cfg.vocoder_enabled = false;
  cfg.eval_robustness = false;
  RunPipeline(cfg, {1});
  cfg.codebook.k = 12;
  EXPECT_THROW(RunPipeline(cfg, {1}), ConfigMismatchError);
  RunOptions fresh;
  fresh.reuse_artifacts = false;
  EXPECT_NO_THROW(RunPipeline(cfg, {1}, fresh));
}

TEST_F(PipelineTest, PrerequisitesAndConfigErrors) {
  PipelineConfig cfg = TinyConfig("prereq");
  cfg.vocoder_enabled = false;
  RunOptions strict;
  strict.build_prerequisites = false;
  EXPECT_THROW(RunPipeline(cfg, {1, 3}, strict), MissingPrerequisiteError);
  EXPECT_THROW(RunPipeline(cfg, {2, 3}), ConfigError);
  EXPECT_THROW(RunPipeline(cfg, {}), ConfigError);

  PipelineConfig bad = cfg;
  bad.stages[2].random_speakers = {"NOBODY"};
  EXPECT_THROW(RunPipeline(bad, {1, 3}), ConfigError);
  bad = cfg;
  bad.stages[2].random_speakers = {"CM01"};  // healthy speaker in stage 3
  bad.eval_speakers = {"F02"};
  EXPECT_THROW(RunPipeline(bad, {1, 3}), ConfigError);
  bad = cfg;
  bad.manifest = (*root_ / "absent.tsv").string();
  EXPECT_THROW(RunPipeline(bad, {1}), MissingPrerequisiteError);

  // A manifest naming a missing wav.
  const auto m = WriteFile(*root_ / "broken.tsv",
                           ReadAll(*manifest_) + "zz\tnot_there.wav\tLJ\tbath\tB1\thealthy\n");
  fs::copy(fs::path(*manifest_).parent_path() / "wav", *root_ / "wav",
           fs::copy_options::recursive | fs::copy_options::skip_existing);
  bad = cfg;
  bad.manifest = m.string();
  EXPECT_THROW(RunPipeline(bad, {1}), MissingPrerequisiteError);
}

TEST_F(PipelineTest, AblationSharesPrefixesAndWritesTable) {
  PipelineConfig cfg = TinyConfig("ablation");
  cfg.vocoder_enabled = false;
  cfg.eval_robustness = false;
  const auto rows = RunAblation(cfg, {{1}, {1, 3}});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "1");
  EXPECT_EQ(rows[1].label, "1+3");
  EXPECT_TRUE(rows[0].wer.has_value());
  const std::string csv = ReadAll(fs::path(cfg.output_dir) / "ablation.csv");
  EXPECT_EQ(csv.rfind("stages,train_uer,test_uer,normalizer_wer\n1,", 0), 0u) << csv;
  EXPECT_NE(csv.find("\n1+3,"), std::string::npos);
}

}  // namespace
}  // namespace unitdsr
