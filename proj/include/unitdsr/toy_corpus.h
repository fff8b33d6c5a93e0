// include/unitdsr/toy_corpus.h

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

// Synthetic parallel word corpus.  Words are strings of formant-shaped
// harmonic or noise phones; speakers differ by a formant warp, pitch and
// tempo.  Dysarthric-analog speakers add slow jittered timing, vowel
// centralisation, inserted pauses and amplitude tremor.

#ifndef UNITDSR_TOY_CORPUS_H_
#define UNITDSR_TOY_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "unitdsr/dsp.h"

namespace unitdsr {

struct ToySpeaker {
  std::string id;
  bool dysarthric = false;
  double formant_scale = 1.0;
  double f0_hz = 150.0;
  double tempo = 1.0;          // duration multiplier
  double level = 0.5;          // peak amplitude
  double centralize = 0.0;     // pull of formants toward a neutral vowel, [0, 1]
  double duration_jitter = 0.08;
  double pause_probability = 0.0;
  double tremor_depth = 0.0;
};

struct ToyUtterance {
  std::string id;
  std::string speaker;
  std::string transcript;
  std::string block;
  bool dysarthric = false;
  Waveform audio;
};

struct ToyCorpusOptions {
  int num_words = 20;
  std::vector<std::string> blocks = {"B1", "B2", "B3"};
  std::uint64_t seed = 7;
  std::vector<ToySpeaker> speakers;  // empty: DefaultToySpeakers()
};

/// LJ (stage-1 reference), VP1-VP3 (stage-1 random speakers), CF02 (stage-2
/// and stage-3 reference), CM01 and CM04 (healthy warps of CF02) and F02
/// (dysarthric-analog warp of CF02).
std::vector<ToySpeaker> DefaultToySpeakers();

/// The first n words of a fixed list (n <= 40).
std::vector<std::string> ToyVocabulary(int n);

/// Phone string of a word; stable across calls.
std::vector<int> ToyPronunciation(const std::string& word);

Waveform SynthesizeToyWord(const std::string& word, const ToySpeaker& speaker,
                           std::uint64_t take_seed);

/// Every speaker says every word once per block.
std::vector<ToyUtterance> MakeToyCorpus(const ToyCorpusOptions& opts);

/// Writes `<dir>/wav/<id>.wav` plus `<dir>/manifest.tsv` with audio paths
/// relative to `dir`.  Returns the manifest path.
std::string WriteToyCorpus(const std::vector<ToyUtterance>& corpus,
                           const std::string& dir);

}  // namespace unitdsr

#endif  // UNITDSR_TOY_CORPUS_H_
