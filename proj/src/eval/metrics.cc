// src/eval/metrics.cc

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
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>

#include "unitdsr/errors.h"
#include "unitdsr/eval.h"
#include "unitdsr/text.h"

namespace unitdsr {

WerResult WordErrorRate(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref) {
  if (ref.empty()) throw EmptyReferenceError("reference has no words");
  WerResult r;
  r.counts = AlignCounts<std::string>(hyp, ref);
  r.ref_words = static_cast<int>(ref.size());
  r.wer = static_cast<double>(r.counts.Distance()) / r.ref_words;
  return r;
}

WerResult WordErrorRate(const std::string& hyp, const std::string& ref) {
  return WordErrorRate(NormalizeWords(hyp), NormalizeWords(ref));
}

double RelativeReduction(double wer_system, double wer_original) {
  if (wer_original == 0.0)
    throw DivisionDomainError("relative reduction against an original WER of 0");
  return 100.0 * (wer_original - wer_system) / wer_original;
}

double AggregateDeltas(const std::vector<EvalRecord>& records) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records)
    if (r.delta) {
      sum += *r.delta;
      ++n;
    }
  if (n == 0) throw EmptyCollectionError("no record carries a delta");
  return sum / n;
}

std::string FormatOneDecimal(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  std::string s = buf;
  if (s == "-0.0") s = "0.0";
  return s;
}

RowConsistency CheckReportedRow(const ReportedRow& row) {
  RowConsistency c;
  c.speaker = row.speaker;
  c.computed_delta = RelativeReduction(row.system_wer, row.original_wer);
  c.consistent = FormatOneDecimal(c.computed_delta) == FormatOneDecimal(row.reported_delta);
  c.backsolved_original = row.reported_delta < 100.0
                              ? row.system_wer / (1.0 - row.reported_delta / 100.0)
                              : std::numeric_limits<double>::infinity();
  return c;
}

std::vector<EvalRecord> EvaluateTranscripts(const std::string& system,
                                            const std::map<std::string, std::string>& hyp,
                                            const std::map<std::string, std::string>& ref,
                                            const std::map<std::string, std::string>& speaker_of) {
  std::map<std::string, EvalRecord> by_speaker;
  for (const auto& [id, ref_text] : ref) {
    const auto s = speaker_of.find(id);
    const std::string speaker = s == speaker_of.end() ? "" : s->second;
    const auto h = hyp.find(id);
    const WerResult w = WordErrorRate(h == hyp.end() ? std::string() : h->second, ref_text);
    EvalRecord& r = by_speaker[speaker];
    r.system = system;
    r.speaker = speaker;
    r.substitutions += w.counts.substitutions;
    r.insertions += w.counts.insertions;
    r.deletions += w.counts.deletions;
    r.ref_words += w.ref_words;
  }
  std::vector<EvalRecord> out;
  for (auto& [speaker, r] : by_speaker) {
    r.wer = 100.0 * (r.substitutions + r.insertions + r.deletions) / r.ref_words;
    out.push_back(r);
  }
  return out;
}

void AttachDeltas(std::vector<EvalRecord>* records, const std::string& original_system) {
  std::map<std::string, double> original;
  for (const auto& r : *records)
    if (r.system == original_system) original[r.speaker] = r.wer;
  for (auto& r : *records) {
    if (r.system == original_system) continue;
    const auto o = original.find(r.speaker);
    if (o != original.end() && o->second != 0.0) r.delta = RelativeReduction(r.wer, o->second);
  }
}

std::map<std::string, std::string> ReadTranscriptFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string where = path + ":" + std::to_string(line_no);
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw FieldCountError(where + ": expected `<id>\\t<text>`");
    if (!out.emplace(line.substr(0, tab), line.substr(tab + 1)).second)
      throw DuplicateIdError(where + ": duplicate id " + line.substr(0, tab));
  }
  return out;
}

void WriteTranscriptFile(const std::string& path, const std::map<std::string, std::string>& texts) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  for (const auto& [id, text] : texts) os << id << '\t' << text << '\n';
  if (!os) throw IoError("short write to " + path);
}

UnitMatchTranscriber::UnitMatchTranscriber(std::map<std::string, NormUnitSequence> lexicon)
    : lexicon_(std::move(lexicon)) {
  if (lexicon_.empty()) throw EmptyCollectionError("transcriber lexicon is empty");
}

std::string UnitMatchTranscriber::Transcribe(const NormUnitSequence& units) const {
  const std::string* best = nullptr;
  int best_d = 0;
  for (const auto& [word, ref] : lexicon_) {
    const int d = EditDistance(units.units(), ref.units());
    if (best == nullptr || d < best_d) {
      best = &word;
      best_d = d;
    }
  }
  return *best;
}

}  // namespace unitdsr
