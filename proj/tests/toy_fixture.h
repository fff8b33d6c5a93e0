// tests/toy_fixture.h

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

// Small toy datasets shared by the model tests.

#ifndef UNITDSR_TESTS_TOY_FIXTURE_H_
#define UNITDSR_TESTS_TOY_FIXTURE_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "unitdsr/codec.h"
#include "unitdsr/dsp.h"
#include "unitdsr/normalizer.h"
#include "unitdsr/toy_corpus.h"

namespace testing_util {

struct ToyData {
  std::vector<unitdsr::ToyUtterance> corpus;
  std::vector<unitdsr::FrameFeatures> features;  // parallel to corpus
  unitdsr::UnitCodebook codebook;
  unitdsr::FeatureConfig feat_cfg;
};

/// A toy corpus of `words` words with a K-unit codebook fit on all blocks
/// but B2.
inline ToyData MakeToyData(int words, int k, std::uint64_t seed = 7) {
  ToyData d;
  unitdsr::ToyCorpusOptions opts;
  opts.num_words = words;
  opts.seed = seed;
  d.corpus = unitdsr::MakeToyCorpus(opts);
  std::vector<unitdsr::FrameFeatures> fit;
  for (const auto& u : d.corpus) {
    d.features.push_back(
        unitdsr::ExtractFeatures(unitdsr::TrimSilence(u.audio), d.feat_cfg));
    if (u.block != "B2") fit.push_back(d.features.back());
  }
  unitdsr::KMeansOptions ko;
  ko.k = k;
  ko.seed = 1;
  d.codebook = unitdsr::FitKMeans(fit, ko);
  return d;
}

/// Pairs for speakers in `random` against `reference`'s B1 take of the same
/// word; `heldout` selects B2 instead of B1/B3.
inline std::vector<unitdsr::TrainingPair> ToyPairs(
    const ToyData& d, const std::string& reference,
    const std::set<std::string>& random, bool heldout) {
  std::map<std::string, unitdsr::NormUnitSequence> target;
  for (std::size_t i = 0; i < d.corpus.size(); ++i)
    if (d.corpus[i].speaker == reference && d.corpus[i].block == "B1")
      target[d.corpus[i].transcript] =
          unitdsr::Dedup(unitdsr::Quantize(d.features[i], d.codebook));
  std::vector<unitdsr::TrainingPair> out;
  for (std::size_t i = 0; i < d.corpus.size(); ++i) {
    const auto& u = d.corpus[i];
    if (!random.count(u.speaker) || (u.block == "B2") != heldout) continue;
    unitdsr::TrainingPair p;
    p.utterance_id = u.id;
    p.speaker = u.speaker;
    p.reference_speaker = reference;
    p.content_key = u.transcript;
    p.block = u.block;
    p.features = d.features[i];
    p.target = target.at(u.transcript);
    p.audio = u.audio;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace testing_util

#endif  // UNITDSR_TESTS_TOY_FIXTURE_H_
