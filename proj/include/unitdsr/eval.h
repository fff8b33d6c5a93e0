// include/unitdsr/eval.h

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

// Objective evaluation: word and unit error rates, relative WER reduction
// and its averages, robustness sweeps over speed and noise, and CSV reports.

#ifndef UNITDSR_EVAL_H_
#define UNITDSR_EVAL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unitdsr/codec.h"
#include "unitdsr/dsp.h"
#include "unitdsr/edit_distance.h"

namespace unitdsr {

struct WerResult {
  double wer = 0.0;  // (S + I + D) / ref_words, a fraction
  EditCounts counts;
  int ref_words = 0;
};

/// Word-level Levenshtein on case-folded, punctuation-stripped words.
/// Throws EmptyReferenceError.
WerResult WordErrorRate(const std::string& hyp, const std::string& ref);
WerResult WordErrorRate(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref);

/// 100 * (original - system) / original.  Throws DivisionDomainError when
/// original is 0.
double RelativeReduction(double wer_system, double wer_original);

struct EvalRecord {
  std::string system;
  std::string speaker;
  double wer = 0.0;  // percent
  std::optional<double> delta;  // percent; needs the original WER
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_words = 0;
};

/// Mean of the defined deltas at full precision.  Throws
/// EmptyCollectionError when none is defined.
double AggregateDeltas(const std::vector<EvalRecord>& records);

/// Fixed one-decimal rendering used by every report.
std::string FormatOneDecimal(double x);

/// A published (original, system, delta) triple checked for consistency.
struct ReportedRow {
  std::string speaker;
  double original_wer = 0.0;
  double system_wer = 0.0;
  double reported_delta = 0.0;
};

struct RowConsistency {
  std::string speaker;
  double computed_delta = 0.0;
  bool consistent = false;  // computed rounds to the reported value
  /// Original WER implied by the reported delta and the system WER.
  double backsolved_original = 0.0;
};

RowConsistency CheckReportedRow(const ReportedRow& row);

/// Sums per-utterance counts into one record per (system, speaker).
/// `hyp` and `ref` map utterance id to text; utterances missing from `hyp`
/// count as empty hypotheses.  Throws EmptyReferenceError.
std::vector<EvalRecord> EvaluateTranscripts(
    const std::string& system,
    const std::map<std::string, std::string>& hyp,
    const std::map<std::string, std::string>& ref,
    const std::map<std::string, std::string>& speaker_of);

/// Fills delta for every record whose speaker has a record under
/// `original_system`.
void AttachDeltas(std::vector<EvalRecord>* records,
                  const std::string& original_system);

/// `<id>\t<text>` per line.  Throws IoError, FieldCountError,
/// DuplicateIdError.
std::map<std::string, std::string> ReadTranscriptFile(const std::string& path);
void WriteTranscriptFile(const std::string& path,
                         const std::map<std::string, std::string>& texts);

/// Toy transcriber: the word whose reference norm units are closest in unit
/// edit distance (ties to the alphabetically first word).
class UnitMatchTranscriber {
 public:
  /// Throws EmptyCollectionError.
  explicit UnitMatchTranscriber(std::map<std::string, NormUnitSequence> lexicon);
  std::string Transcribe(const NormUnitSequence& units) const;

 private:
  std::map<std::string, NormUnitSequence> lexicon_;
};

enum class RobustnessAxis { kSpeedRatio, kSnrDb };
std::string ToString(RobustnessAxis axis);
RobustnessAxis ParseRobustnessAxis(const std::string& name);

/// Ratios 0.4 ... 1.6, or SNRs 0 ... 30 plus clean (+infinity).
std::vector<double> DefaultAxisValues(RobustnessAxis axis);

struct RobustnessCell {
  double value = 0.0;  // +infinity for the clean SNR cell
  double mean = 0.0;   // over successful utterances; NaN when none
  int n_ok = 0;
  int n_fail = 0;
};

struct RobustnessGrid {
  RobustnessAxis axis = RobustnessAxis::kSpeedRatio;
  std::string metric;  // "uer" or "wer"
  std::vector<RobustnessCell> cells;

  /// Throws DomainError when absent.
  const RobustnessCell& At(double value) const;
};

struct TestUtterance {
  std::string id;
  Waveform audio;
};

/// Metric of one (possibly degraded) utterance; may throw.
using UtteranceScorer =
    std::function<double(const TestUtterance& original, const Waveform& input)>;

/// Mean score over the test set; failures are counted, not fatal.
RobustnessCell EvaluateTestset(const std::vector<TestUtterance>& testset,
                               const UtteranceScorer& score);

/// One cell per axis value in the given order, which must be strictly
/// increasing.  Speed ratio 1 and the clean cell pass audio through
/// untouched.  Noise for utterance u at SNR s uses
/// DeriveSeed(seed, "snr:" + u.id, round(s * 1000)).  Throws
/// EmptyDatasetError, DomainError.
RobustnessGrid RobustnessSweep(const std::vector<TestUtterance>& testset,
                               RobustnessAxis axis,
                               const std::vector<double>& values,
                               const std::string& metric,
                               const UtteranceScorer& score,
                               std::uint64_t seed);

/// `system,speaker,wer,delta,subs,ins,dels,ref_words`, sorted by speaker
/// then system; WER and delta in percent to one decimal.
void WriteEvalReport(const std::string& path,
                     const std::vector<EvalRecord>& records);
/// `axis,value,metric,mean,n_ok,n_fail`, cells in axis order.
void WriteGridReport(const std::string& path,
                     const std::vector<RobustnessGrid>& grids);
/// `series\tx\ty\tn` per successful cell, series = `<axis>/<metric>`.
void WritePlotData(const std::string& path,
                   const std::vector<RobustnessGrid>& grids);

}  // namespace unitdsr

#endif  // UNITDSR_EVAL_H_
