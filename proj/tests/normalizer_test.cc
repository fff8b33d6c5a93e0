// tests/normalizer_test.cc

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
#include <numeric>

#include <gtest/gtest.h>

#include "toy_fixture.h"
#include "test_util.h"
#include "unitdsr/ctc.h"
#include "unitdsr/errors.h"
#include "unitdsr/normalizer.h"
#include "unitdsr/random.h"

namespace unitdsr {
namespace {

NormalizerConfig TinyConfig(int k = 16) {
  NormalizerConfig c;
  c.input_dim = 80;
  c.num_units = k;
  c.model_dim = 32;
  c.num_layers = 1;
  c.num_heads = 2;
  c.ff_dim = 64;
  return c;
}

FrameFeatures RandomFeatures(int t, int d, std::uint64_t seed) {
  Rng rng(seed);
  FrameFeatures f;
  f.frames = Matrix(t, d);
  for (Eigen::Index i = 0; i < f.frames.size(); ++i)
    f.frames.data()[i] = UniformDouble(rng) * 4 - 2;
  return f;
}

TEST(NormalizerForward, ShapeLaw) {
  NormalizerModel m(TinyConfig(), 3);
  Matrix l = m.ForwardLogits(RandomFeatures(10, 80, 1));
  EXPECT_EQ(l.rows(), 5);
  EXPECT_EQ(l.cols(), 17);
  EXPECT_EQ(m.ForwardLogits(RandomFeatures(11, 80, 1)).rows(), 5);
  EXPECT_EQ(m.ForwardLogits(RandomFeatures(2, 80, 1)).rows(), 1);
}

TEST(NormalizerForward, DeterministicAndNormalized) {
  NormalizerModel m(TinyConfig(), 3);
  const FrameFeatures f = RandomFeatures(37, 80, 2);
  Matrix a = m.ForwardLogits(f), b = m.ForwardLogits(f);
  ASSERT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    const double mx = a.row(t).maxCoeff();
    double s = 0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      ASSERT_TRUE(std::isfinite(a(t, c)));
      s += std::exp(a(t, c) - mx);
    }
    double total = 0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) total += std::exp(a(t, c) - mx) / s;
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
  // Same seed, same weights.
  NormalizerModel m2(TinyConfig(), 3);
  EXPECT_EQ(m.params().Checksum(), m2.params().Checksum());
  NormalizerModel m3(TinyConfig(), 4);
  EXPECT_NE(m.params().Checksum(), m3.params().Checksum());
}

TEST(NormalizerForward, Errors) {
  NormalizerModel m(TinyConfig(), 3);
  EXPECT_THROW(m.ForwardLogits(RandomFeatures(1, 80, 1)), TooShortError);
  EXPECT_THROW(m.ForwardLogits(RandomFeatures(10, 40, 1)), DimensionMismatchError);
  NormalizerConfig bad = TinyConfig();
  bad.num_heads = 3;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = TinyConfig();
  bad.downsample = 0;
  EXPECT_THROW(bad.Validate(), ConfigError);
}

TEST(NormalizerForward, ClassCountAndGroups) {
  NormalizerModel m(TinyConfig(23), 1);
  EXPECT_EQ(m.NumClasses(), 24);
  EXPECT_EQ(m.Blank(), 23);
  std::set<std::string> groups;
  for (const auto& e : m.params().entries()) groups.insert(e.group);
  EXPECT_EQ(groups, (std::set<std::string>{"frontend", "encoder", "ctc"}));
}

TEST(StageConfigTest, Validation) {
  StageConfig c;
  c.reference_speaker = "CF02";
  c.random_speakers = {"F02"};
  c.dysarthric_speakers = {"F02"};
  c.stage_id = 3;
  EXPECT_NO_THROW(c.Validate());
  c.random_speakers = {"F02", "CM01"};
  EXPECT_THROW(c.Validate(), ConfigError);
  c.random_speakers = {"CM01"};
  EXPECT_THROW(c.Validate(), ConfigError);
  c.stage_id = 2;
  EXPECT_NO_THROW(c.Validate());
  c.random_speakers = {"F02"};
  EXPECT_THROW(c.Validate(), ConfigError);  // dysarthric outside stage 3
  c.random_speakers = {"CM01"};
  c.stage_id = 4;
  EXPECT_THROW(c.Validate(), ConfigError);
  c.stage_id = 1;
  c.max_updates = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

class ToyStageTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new testing_util::ToyData(testing_util::MakeToyData(8, 24));
  }
  static void TearDownTestSuite() { delete data_; }

  static StageConfig Stage1(long long updates, std::uint64_t seed) {
    StageConfig c;
    c.stage_id = 1;
    c.reference_speaker = "LJ";
    c.random_speakers = {"VP1", "VP2", "VP3"};
    c.max_updates = updates;
    c.learning_rate = 2e-3;
    c.seed = seed;
    return c;
  }
  static NormalizerConfig ModelConfig() {
    NormalizerConfig c = TinyConfig(24);
    c.model_dim = 48;
    c.num_layers = 2;
    c.ff_dim = 96;
    return c;
  }

  static testing_util::ToyData* data_;
};
testing_util::ToyData* ToyStageTest::data_ = nullptr;

TEST_F(ToyStageTest, EmptyAndFilterErrors) {
  NormalizerModel m(ModelConfig(), 1);
  EXPECT_THROW(RunFinetuneStage(&m, Stage1(5, 1), {}), EmptyDatasetError);
  auto pairs = testing_util::ToyPairs(*data_, "LJ", {"VP1"}, false);
  auto wrong_ref = pairs;
  wrong_ref[0].reference_speaker = "CF02";
  EXPECT_THROW(RunFinetuneStage(&m, Stage1(5, 1), wrong_ref), SpeakerFilterViolation);
  auto wrong_spk = testing_util::ToyPairs(*data_, "LJ", {"VP1", "CM01"}, false);
  EXPECT_THROW(RunFinetuneStage(&m, Stage1(5, 1), wrong_spk), SpeakerFilterViolation);
  auto bad_target = pairs;
  bad_target[0].target = NormUnitSequence({1, 24});
  EXPECT_THROW(RunFinetuneStage(&m, Stage1(5, 1), bad_target), UnitRangeError);
}

TEST_F(ToyStageTest, FreezeContractAndDeterminism) {
  auto pairs = testing_util::ToyPairs(*data_, "LJ", {"VP1", "VP2", "VP3"}, false);
  NormalizerModel a(ModelConfig(), 9), b(ModelConfig(), 9);
  std::vector<Matrix> frontend;
  for (const auto& e : a.params().entries())
    if (e.group == "frontend") frontend.push_back(e.var.value());
  StageResult ra = RunFinetuneStage(&a, Stage1(40, 5), pairs);
  StageResult rb = RunFinetuneStage(&b, Stage1(40, 5), pairs);
  EXPECT_EQ(ra.frontend_checksum_before, ra.frontend_checksum_after);
  std::size_t i = 0;
  for (const auto& e : a.params().entries()) {
    if (e.group != "frontend") continue;
    const Matrix& now = e.var.value();
    ASSERT_EQ(std::memcmp(now.data(), frontend[i].data(), now.size() * sizeof(double)), 0);
    ++i;
  }
  EXPECT_NE(ra.init_checksum, ra.final_checksum);
  ASSERT_EQ(ra.log.size(), 40u);
  EXPECT_NEAR(ra.log.back().loss, rb.log.back().loss, 1e-6);
  EXPECT_EQ(ra.final_checksum, rb.final_checksum);
  EXPECT_EQ(a.updates, 40);
  EXPECT_EQ(a.last_stage, 1);
  for (const auto& e : ra.audit) EXPECT_NE(e.block, "B2");

  // A different seed changes the data order and hence the result.
  NormalizerModel c(ModelConfig(), 9);
  StageResult rc = RunFinetuneStage(&c, Stage1(40, 6), pairs);
  EXPECT_NE(ra.final_checksum, rc.final_checksum);
}

TEST_F(ToyStageTest, CheckpointRoundTrip) {
  auto pairs = testing_util::ToyPairs(*data_, "LJ", {"VP1"}, false);
  NormalizerModel m(ModelConfig(), 2);
  m.fingerprint = {24, 1};
  RunFinetuneStage(&m, Stage1(6, 1), pairs);
  const auto dir = testing_util::TempDir("normalizer_ckpt");
  const std::string path = (dir / "n.ckpt").string();
  SaveCheckpoint(m.ToCheckpoint(), path);
  NormalizerModel r = NormalizerModel::FromCheckpoint(LoadCheckpoint(path), {24, 1});
  EXPECT_EQ(r.params().Checksum(), m.params().Checksum());
  EXPECT_EQ(r.updates, 6);
  EXPECT_EQ(r.last_stage, 1);
  EXPECT_EQ(r.optimizer_steps, m.optimizer_steps);
  EXPECT_EQ(r.optimizer_state.size(), m.optimizer_state.size());
  const FrameFeatures f = pairs[0].features;
  Matrix a = m.ForwardLogits(f), b = r.ForwardLogits(f);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
  EXPECT_THROW(NormalizerModel::FromCheckpoint(LoadCheckpoint(path), {24, 2}),
               ConfigMismatchError);
  EXPECT_THROW(NormalizerModel::FromCheckpoint(LoadCheckpoint(path), {32, 1}),
               ConfigMismatchError);
}

TEST_F(ToyStageTest, NormalizeIsTheComposition) {
  NormalizerModel m(ModelConfig(), 4);
  for (std::size_t i = 0; i < data_->corpus.size(); i += 17) {
    const Waveform& w = data_->corpus[i].audio;
    NormUnitSequence manual = CtcGreedyDecode(
        m.ForwardLogits(ExtractFeatures(TrimSilence(w), data_->feat_cfg)));
    EXPECT_EQ(Normalize(m, w, data_->feat_cfg), manual);
  }
}

// Loss, overfit and speed-1.2 gates on a small stage-1 run.
TEST_F(ToyStageTest, TrainingReducesLossAndOverfits) {
  auto pairs = testing_util::ToyPairs(*data_, "LJ", {"VP1", "VP2", "VP3"}, false);
  NormalizerModel m(ModelConfig(), 11);
  StageConfig cfg = Stage1(2000, 3);
  cfg.augment.speed_probability = 0.5;
  cfg.augment.speed_min = 0.8;
  cfg.augment.speed_max = 1.25;
  StageResult r = RunFinetuneStage(&m, cfg, pairs);
  auto mean_loss = [&](std::size_t from, std::size_t to) {
    double s = 0;
    for (std::size_t i = from; i < to; ++i) s += r.log[i].loss;
    return s / static_cast<double>(to - from);
  };
  const double initial = mean_loss(0, 10);
  const double final = mean_loss(r.log.size() - 50, r.log.size());
  EXPECT_LT(final, 0.1 * initial) << "initial " << initial << " final " << final;

  double seen = 0, fast = 0;
  for (const auto& p : pairs) {
    seen += UnitErrorRate(Normalize(m, p.audio, data_->feat_cfg), p.target);
    fast += UnitErrorRate(Normalize(m, SpeedPerturb(p.audio, 1.2), data_->feat_cfg), p.target);
  }
  seen /= static_cast<double>(pairs.size());
  fast /= static_cast<double>(pairs.size());
  EXPECT_LT(seen, 0.05);
  EXPECT_LT(fast, 0.15);
}

}  // namespace
}  // namespace unitdsr
