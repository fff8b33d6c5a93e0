// src/codec/units.cc

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

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "unitdsr/codec.h"
#include "unitdsr/edit_distance.h"
#include "unitdsr/errors.h"

namespace unitdsr {

NormUnitSequence::NormUnitSequence(std::vector<int> units)
    : units_(std::move(units)) {
  for (std::size_t i = 1; i < units_.size(); ++i)
    if (units_[i] == units_[i - 1])
      throw DomainError("norm units contain adjacent repeat at position " +
                        std::to_string(i));
}

long long DurationSequence::Total() const {
  long long t = 0;
  for (int d : durations) t += d;
  return t;
}

void CheckUnitRange(std::span<const int> units, int k) {
  for (std::size_t i = 0; i < units.size(); ++i)
    if (units[i] < 0 || units[i] >= k) {
      std::ostringstream os;
      os << "unit " << units[i] << " at position " << i << " outside [0, " << k
         << ")";
      throw UnitRangeError(os.str());
    }
}

NormUnitSequence Dedup(std::span<const int> units) {
  std::vector<int> out;
  out.reserve(units.size());
  for (int u : units)
    if (out.empty() || out.back() != u) out.push_back(u);
  return NormUnitSequence(std::move(out));
}

RunLengthEncoding RunLengthEncode(const UnitSequence& s) {
  if (s.units.empty()) throw EmptySequenceError("cannot run-length encode []");
  std::vector<int> units;
  RunLengthEncoding rle;
  for (int u : s.units) {
    if (!units.empty() && units.back() == u) {
      ++rle.durations.durations.back();
    } else {
      units.push_back(u);
      rle.durations.durations.push_back(1);
    }
  }
  rle.units = NormUnitSequence(std::move(units));
  return rle;
}

UnitSequence ExpandRuns(const NormUnitSequence& units,
                        const DurationSequence& durations) {
  if (units.size() != durations.size())
    throw LengthMismatchError("units and durations differ in length");
  UnitSequence s;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (durations.durations[i] < 1)
      throw DomainError("durations must be >= 1");
    s.units.insert(s.units.end(), durations.durations[i], units[i]);
  }
  return s;
}

int EditDistance(std::span<const int> a, std::span<const int> b) {
  return AlignCounts<int>(a, b).Distance();
}

double UnitErrorRate(const NormUnitSequence& hyp, const NormUnitSequence& ref) {
  if (ref.empty()) throw EmptyReferenceError("unit error rate needs a reference");
  return static_cast<double>(EditDistance(hyp.units(), ref.units())) /
         static_cast<double>(ref.size());
}

void WriteCodebook(const std::string& path, const UnitCodebook& cb) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  os << "UDSC v1 K=" << cb.K() << " D=" << cb.Dim() << " seed=" << cb.seed
     << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < cb.K(); ++k) {
    for (int d = 0; d < cb.Dim(); ++d) {
      if (d) os << ' ';
      os << cb.centroids(k, d);
    }
    os << '\n';
  }
  if (!os) throw IoError("short write to " + path);
}

UnitCodebook ReadCodebook(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::string header;
  std::getline(is, header);
  int k = 0, d = 0;
  unsigned long long seed = 0;
  if (std::sscanf(header.c_str(), "UDSC v1 K=%d D=%d seed=%llu", &k, &d,
                  &seed) != 3 ||
      k < 2 || d < 1)
    throw CorruptFileError(path + ": bad codebook header '" + header + "'");
  UnitCodebook cb;
  cb.seed = seed;
  cb.centroids.resize(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j)
      if (!(is >> cb.centroids(i, j)))
        throw CorruptFileError(path + ": truncated codebook");
  return cb;
}

void WriteUnitFile(const std::string& path,
                   const std::vector<UnitRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  for (const auto& r : records) {
    os << r.utterance_id << '\t';
    for (std::size_t i = 0; i < r.units.size(); ++i) {
      if (i) os << ' ';
      os << r.units[i];
    }
    os << '\n';
  }
  if (!os) throw IoError("short write to " + path);
}

std::vector<UnitRecord> ReadUnitFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<UnitRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw CorruptFileError(path + ":" + std::to_string(line_no) +
                             ": missing tab");
    UnitRecord r;
    r.utterance_id = line.substr(0, tab);
    std::istringstream fields(line.substr(tab + 1));
    int u;
    while (fields >> u) r.units.push_back(u);
    if (!fields.eof())
      throw CorruptFileError(path + ":" + std::to_string(line_no) +
                             ": non-integer unit");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace unitdsr
