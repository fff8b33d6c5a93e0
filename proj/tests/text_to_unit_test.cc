// tests/text_to_unit_test.cc

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

#include <fstream>

#include <gtest/gtest.h>

#include "test_util.h"
#include "unitdsr/errors.h"
#include "unitdsr/random.h"
#include "unitdsr/text_to_unit.h"

namespace unitdsr {
namespace {

TEST(TextNormalization, Rules) {
  EXPECT_EQ(NormalizeText("  Hello,   World!  "), "hello world");
  EXPECT_EQ(NormalizeText("Don't\tSTOP."), "don't stop");
  EXPECT_EQ(NormalizeText("?!"), "");
  EXPECT_EQ(NormalizeText("caf\xc3\xa9"), "caf\xc3\xa9");  // kept, encodes as OOV
  EXPECT_THROW(CharVocabulary::Encode(""), EmptyTextError);
  EXPECT_THROW(CharVocabulary::Encode(" ... "), EmptyTextError);
  auto ids = CharVocabulary::Encode("a Z9'\xc3\xa9");
  ASSERT_EQ(ids.size(), 7u);
  EXPECT_EQ(ids[0], 2);
  EXPECT_EQ(ids[1], 38);
  EXPECT_EQ(ids[2], 27);
  EXPECT_EQ(ids[3], 37);
  EXPECT_EQ(ids[4], 39);
  EXPECT_EQ(ids[5], CharVocabulary::kOov);
  for (int c = 0; c < 256; ++c) {
    const int id = CharVocabulary::Id(static_cast<char>(c));
    EXPECT_GE(id, 1);
    EXPECT_LT(id, CharVocabulary::Size());
  }
}

TextToUnitConfig SmallConfig(int k) {
  TextToUnitConfig c;
  c.num_units = k;
  c.model_dim = 64;
  c.num_heads = 4;
  c.ff_dim = 128;
  return c;
}

std::string Spell(const std::vector<int>& u) {
  std::string s;
  for (std::size_t i = 0; i < u.size(); ++i) s += (i ? " " : "") + std::to_string(u[i]);
  return s;
}

TEST(TextToUnit, ErrorsAndGuards) {
  TextToUnitModel m(SmallConfig(10), 1);
  TextToUnitTrainOptions o;
  o.max_updates = 1;
  EXPECT_THROW(TrainTextToUnit(&m, {}, o), EmptyDatasetError);
  EXPECT_THROW(TrainTextToUnit(&m, {{"a", "x", {1, 10}}}, o), UnitRangeError);
  EXPECT_THROW(TranslateTextToUnits(m, "", 5), EmptyTextError);
  // Untrained model: length guard and the norm-unit contract hold anyway.
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const int max_len = static_cast<int>(UniformIndex(rng, 8));
    NormUnitSequence out = TranslateTextToUnits(m, "text " + std::to_string(i), max_len);
    EXPECT_LE(static_cast<int>(out.size()), max_len);
    for (std::size_t j = 1; j < out.size(); ++j) EXPECT_NE(out[j], out[j - 1]);
    for (int u : out.units()) EXPECT_LT(u, 10);
  }
}

TEST(TextToUnit, CorpusFileRoundTrip) {
  const auto dir = testing_util::TempDir("t2u_corpus");
  const std::string p = (dir / "c.tsv").string();
  std::vector<TextUnitPair> c = {{"u1", "hello there", {1, 2, 2, 3}}, {"u2", "x", {}}};
  WriteTextUnitCorpus(p, c);
  auto r = ReadTextUnitCorpus(p);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].text, "hello there");
  EXPECT_EQ(r[0].units, (std::vector<int>{1, 2, 2, 3}));
  EXPECT_TRUE(r[1].units.empty());
  std::ofstream(p) << "u1\ta\t1\nu1\tb\t2\n";
  EXPECT_THROW(ReadTextUnitCorpus(p), DuplicateIdError);
  std::ofstream(p) << "u1\ta\n";
  EXPECT_THROW(ReadTextUnitCorpus(p), FieldCountError);
  std::ofstream(p) << "u1\ta\t1 x\n";
  EXPECT_THROW(ReadTextUnitCorpus(p), ManifestError);
}

TEST(TextToUnit, SinglePairMemorized) {
  TextToUnitModel m(SmallConfig(10), 2);
  TextToUnitTrainOptions o;
  o.max_updates = 150;
  o.batch_size = 1;
  o.learning_rate = 3e-3;
  TrainTextToUnit(&m, {{"a", "Hello", {4, 4, 1, 7, 7, 2}}}, o);
  EXPECT_EQ(TranslateTextToUnits(m, "hello", 20), NormUnitSequence({4, 1, 7, 2}));
}

TEST(TextToUnit, CopyTaskAndDeterminism) {
  Rng rng(11);
  std::vector<TextUnitPair> corpus;
  for (int i = 0; i < 60; ++i) {
    std::vector<int> raw;
    const int len = 2 + static_cast<int>(UniformIndex(rng, 4));
    while (static_cast<int>(raw.size()) < len) {
      const int u = static_cast<int>(UniformIndex(rng, 10));
      raw.push_back(u);
      if (UniformDouble(rng) < 0.25) raw.push_back(u);  // spelled repeat
    }
    corpus.push_back({"c" + std::to_string(i), Spell(raw), raw});
  }
  corpus.push_back({"fixed", "2 2 7", {2, 2, 7}});
  TextToUnitTrainOptions o;
  o.max_updates = 1500;
  o.learning_rate = 2e-3;
  o.seed = 5;
  TextToUnitModel m(SmallConfig(10), 4);
  auto log = TrainTextToUnit(&m, corpus, o);
  int exact = 0;
  for (const auto& p : corpus)
    exact += TranslateTextToUnits(m, p.text, 32) == Dedup(p.units);
  EXPECT_GE(exact, static_cast<int>(0.95 * corpus.size()))
      << exact << "/" << corpus.size() << " final loss " << log.back().loss;
  EXPECT_EQ(TranslateTextToUnits(m, "2 2 7", 32), NormUnitSequence({2, 7}));

  // Same seed, same result; a checkpoint round trip keeps the output.
  TextToUnitModel m2(SmallConfig(10), 4);
  TextToUnitTrainOptions short_run = o;
  short_run.max_updates = 30;
  TextToUnitModel m3(SmallConfig(10), 4);
  auto l2 = TrainTextToUnit(&m2, corpus, short_run);
  auto l3 = TrainTextToUnit(&m3, corpus, short_run);
  EXPECT_NEAR(l2.back().loss, l3.back().loss, 1e-6);
  EXPECT_EQ(m2.params().Checksum(), m3.params().Checksum());

  TextToUnitModel r = TextToUnitModel::FromCheckpoint(m.ToCheckpoint());
  EXPECT_EQ(r.params().Checksum(), m.params().Checksum());
  EXPECT_EQ(r.updates, 1500);
  EXPECT_EQ(TranslateTextToUnits(r, "3 1 4", 32), TranslateTextToUnits(m, "3 1 4", 32));
}

}  // namespace
}  // namespace unitdsr
