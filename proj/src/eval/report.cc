// src/eval/report.cc

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
#include <fstream>
#include <sstream>
#include <tuple>

#include "unitdsr/errors.h"
#include "unitdsr/eval.h"

namespace unitdsr {

namespace {

std::string AxisValue(const RobustnessCell& c) {
  if (std::isinf(c.value)) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", c.value);
  return buf;
}

std::string Mean(double m) {
  if (std::isnan(m)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", m);
  return buf;
}

// Writes through a temporary sibling so a rerun replaces the file whole.
void WriteWhole(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path);
    os << body;
    if (!os) throw IoError("short write to " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot replace " + path);
}

}  // namespace

void WriteEvalReport(const std::string& path, const std::vector<EvalRecord>& records) {
  std::vector<const EvalRecord*> rows;
  for (const auto& r : records) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const EvalRecord* a, const EvalRecord* b) {
    return std::tie(a->speaker, a->system) < std::tie(b->speaker, b->system);
  });
  std::ostringstream os;
  os << "system,speaker,wer,delta,subs,ins,dels,ref_words\n";
  for (const EvalRecord* r : rows)
    os << r->system << ',' << r->speaker << ',' << FormatOneDecimal(r->wer) << ','
       << (r->delta ? FormatOneDecimal(*r->delta) : "") << ',' << r->substitutions << ','
       << r->insertions << ',' << r->deletions << ',' << r->ref_words << '\n';
  WriteWhole(path, os.str());
}

void WriteGridReport(const std::string& path, const std::vector<RobustnessGrid>& grids) {
  std::ostringstream os;
  os << "axis,value,metric,mean,n_ok,n_fail\n";
  for (const auto& g : grids)
    for (const auto& c : g.cells)
      os << ToString(g.axis) << ',' << AxisValue(c) << ',' << g.metric << ',' << Mean(c.mean)
         << ',' << c.n_ok << ',' << c.n_fail << '\n';
  WriteWhole(path, os.str());
}

void WritePlotData(const std::string& path, const std::vector<RobustnessGrid>& grids) {
  std::ostringstream os;
  os << "series\tx\ty\tn\n";
  for (const auto& g : grids)
    for (const auto& c : g.cells) {
      if (c.n_ok == 0) continue;
      os << ToString(g.axis) << '/' << g.metric << '\t' << AxisValue(c) << '\t' << Mean(c.mean)
         << '\t' << c.n_ok << '\n';
    }
  WriteWhole(path, os.str());
}

}  // namespace unitdsr
