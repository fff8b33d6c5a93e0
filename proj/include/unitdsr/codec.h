// include/unitdsr/codec.h

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

#ifndef UNITDSR_CODEC_H_
#define UNITDSR_CODEC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unitdsr/dsp.h"
#include "unitdsr/matrix.h"

namespace unitdsr {

/// Frame-rate cluster indices z_1..z_T, each in [0, K).
struct UnitSequence {
  std::vector<int> units;
  double frame_hop_ms = kCanonicalHopMs;

  std::size_t size() const { return units.size(); }
};

/// A unit sequence with no two equal neighbours ("norm units").
class NormUnitSequence {
 public:
  NormUnitSequence() = default;
  /// Throws DomainError if two adjacent units are equal.
  explicit NormUnitSequence(std::vector<int> units);

  const std::vector<int>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  int operator[](std::size_t i) const { return units_[i]; }

  friend bool operator==(const NormUnitSequence&,
                         const NormUnitSequence&) = default;

 private:
  std::vector<int> units_;
};

/// Frames per norm unit; every entry >= 1.
struct DurationSequence {
  std::vector<int> durations;

  std::size_t size() const { return durations.size(); }
  long long Total() const;
};

/// Throws UnitRangeError unless every unit lies in [0, k).
void CheckUnitRange(std::span<const int> units, int k);

struct KMeansMeta {
  int iterations = 0;
  double final_inertia = 0.0;
  /// Assignment inertia at the start of every Lloyd iteration, followed by
  /// the inertia of the final centroids.
  std::vector<double> inertia_trace;
};

struct UnitCodebook {
  Matrix centroids;  // K x D
  std::uint64_t seed = 0;
  KMeansMeta meta;

  int K() const { return static_cast<int>(centroids.rows()); }
  int Dim() const { return static_cast<int>(centroids.cols()); }
};

struct KMeansOptions {
  int k = 64;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double rel_tol = 1e-4;
};

/// Seeded k-means++ initialisation over the rows of `points`.
/// Throws InsufficientDataError when fewer than k distinct rows exist.
Matrix KMeansPlusPlusInit(const Matrix& points, int k, std::uint64_t seed);

/// k-means++ followed by Lloyd iterations until the relative inertia
/// improvement drops below rel_tol or max_iter is reached.  An empty cluster
/// is re-seeded with the point farthest from its current centroid.
UnitCodebook FitKMeans(const Matrix& points, const KMeansOptions& opts);
UnitCodebook FitKMeans(const std::vector<FrameFeatures>& features,
                       const KMeansOptions& opts);

/// Nearest centroid per frame by squared Euclidean distance; ties go to the
/// lowest index.
UnitSequence Quantize(const FrameFeatures& f, const UnitCodebook& cb);
std::vector<int> NearestCentroids(const Matrix& frames, const Matrix& centroids,
                                  double* inertia = nullptr);

NormUnitSequence Dedup(std::span<const int> units);
inline NormUnitSequence Dedup(const UnitSequence& s) { return Dedup(s.units); }

struct RunLengthEncoding {
  NormUnitSequence units;
  DurationSequence durations;
};

/// Throws EmptySequenceError for an empty input.
RunLengthEncoding RunLengthEncode(const UnitSequence& s);

/// Inverse of RunLengthEncode.  Throws LengthMismatchError or DomainError
/// (duration < 1).
UnitSequence ExpandRuns(const NormUnitSequence& units,
                        const DurationSequence& durations);

int EditDistance(std::span<const int> a, std::span<const int> b);

/// Levenshtein(hyp, ref) / |ref|.  Throws EmptyReferenceError.
double UnitErrorRate(const NormUnitSequence& hyp, const NormUnitSequence& ref);

// Codebook file: "UDSC v1 K=<K> D=<D> seed=<seed>" then K rows of D floats.
void WriteCodebook(const std::string& path, const UnitCodebook& cb);
UnitCodebook ReadCodebook(const std::string& path);

// Unit files: "<utterance_id>\t<space-separated integers>" per line.  Raw
// units use the ".units" extension, norm units ".norm".
struct UnitRecord {
  std::string utterance_id;
  std::vector<int> units;
};
void WriteUnitFile(const std::string& path,
                   const std::vector<UnitRecord>& records);
std::vector<UnitRecord> ReadUnitFile(const std::string& path);

}  // namespace unitdsr

#endif  // UNITDSR_CODEC_H_
