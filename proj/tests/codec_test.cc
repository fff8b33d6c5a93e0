// tests/codec_test.cc

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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <limits>

#include "test_util.h"
#include "unitdsr/codec.h"
#include "unitdsr/edit_distance.h"
#include "unitdsr/errors.h"
#include "unitdsr/random.h"

using namespace unitdsr;

namespace {

std::vector<int> RandomUnits(Rng& rng, int max_len, int k, int min_len = 0) {
  const int len = min_len + static_cast<int>(UniformIndex(rng, max_len - min_len + 1));
  std::vector<int> u(len);
  for (int& x : u) x = static_cast<int>(UniformIndex(rng, k));
  return u;
}

// Levenshtein by plain recursion; exponential, fine for length <= 6.
int RecursiveLevenshtein(const std::vector<int>& a, std::size_t i,
                         const std::vector<int>& b, std::size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  const int sub = RecursiveLevenshtein(a, i + 1, b, j + 1) + (a[i] != b[j]);
  const int del = RecursiveLevenshtein(a, i + 1, b, j) + 1;
  const int ins = RecursiveLevenshtein(a, i, b, j + 1) + 1;
  return std::min({sub, del, ins});
}

Matrix Blobs(int per_blob, const Matrix& centres, double spread, Rng& rng) {
  Matrix pts(per_blob * centres.rows(), centres.cols());
  for (Eigen::Index c = 0; c < centres.rows(); ++c)
    for (int i = 0; i < per_blob; ++i)
      for (Eigen::Index d = 0; d < centres.cols(); ++d)
        pts(c * per_blob + i, d) =
            centres(c, d) + spread * (2 * UniformDouble(rng) - 1);
  return pts;
}

// Plain Lloyd iterations from given centroids with no empty clusters.
Matrix OracleLloyd(const Matrix& pts, Matrix cents, int iters) {
  for (int it = 0; it < iters; ++it) {
    Matrix sum = Matrix::Zero(cents.rows(), cents.cols());
    std::vector<int> count(cents.rows(), 0);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < cents.rows(); ++c) {
        double d = 0;
        for (Eigen::Index j = 0; j < pts.cols(); ++j)
          d += (pts(i, j) - cents(c, j)) * (pts(i, j) - cents(c, j));
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      sum.row(best) += pts.row(i);
      ++count[best];
    }
    for (Eigen::Index c = 0; c < cents.rows(); ++c)
      if (count[c] > 0) cents.row(c) = sum.row(c) / count[c];
  }
  return cents;
}

}  // namespace

TEST(KMeans, RecoversSeparatedBlobs) {
  Rng rng(3);
  Matrix centres(4, 2);
  centres << 0, 0, 10, 0, 0, 10, 10, 10;
  const Matrix pts = Blobs(50, centres, 0.5, rng);
  KMeansOptions opts;
  opts.k = 4;
  opts.seed = 11;
  const UnitCodebook cb = FitKMeans(pts, opts);
  ASSERT_EQ(cb.K(), 4);
  for (Eigen::Index c = 0; c < 4; ++c) {
    double best = 1e9;
    for (Eigen::Index j = 0; j < 4; ++j)
      best = std::min(best, (cb.centroids.row(j) - centres.row(c)).norm());
    EXPECT_LT(best, 0.3);
  }
}

TEST(KMeans, KEqualToPointCountHasZeroInertia) {
  Matrix pts(5, 3);
  pts << 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 4, 4, 4;
  KMeansOptions opts;
  opts.k = 5;
  const UnitCodebook cb = FitKMeans(pts, opts);
  EXPECT_DOUBLE_EQ(cb.meta.final_inertia, 0.0);
}

TEST(KMeans, MatchesLloydOracleFromSameInit) {
  Rng rng(8);
  Matrix centres(3, 2);
  centres << 0, 0, 5, 1, 2, 6;
  const Matrix pts = Blobs(30, centres, 2.0, rng);
  const Matrix init = KMeansPlusPlusInit(pts, 3, 21);
  KMeansOptions opts;
  opts.k = 3;
  opts.seed = 21;
  opts.rel_tol = 0.0;
  opts.max_iter = 3;
  const UnitCodebook cb = FitKMeans(pts, opts);
  const Matrix oracle = OracleLloyd(pts, init, 3);
  ASSERT_EQ(cb.centroids.rows(), oracle.rows());
  EXPECT_LT((cb.centroids - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KMeans, InertiaTraceIsNonIncreasing) {
  Rng rng(12);
  Matrix pts(300, 4);
  for (Eigen::Index i = 0; i < pts.size(); ++i)
    pts.data()[i] = 2 * UniformDouble(rng) - 1;
  KMeansOptions opts;
  opts.k = 8;
  opts.seed = 2;
  opts.rel_tol = 0.0;
  opts.max_iter = 30;
  const UnitCodebook cb = FitKMeans(pts, opts);
  const auto& tr = cb.meta.inertia_trace;
  ASSERT_GE(tr.size(), 2u);
  for (std::size_t i = 1; i < tr.size(); ++i)
    EXPECT_LE(tr[i], tr[i - 1] * (1 + 1e-12)) << "at " << i;
  EXPECT_DOUBLE_EQ(tr.back(), cb.meta.final_inertia);
}

TEST(KMeans, SameSeedSameCentroidsDifferentSeedDiffers) {
  Rng rng(4);
  Matrix pts(200, 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = UniformDouble(rng);
  KMeansOptions opts;
  opts.k = 6;
  opts.seed = 99;
  const UnitCodebook a = FitKMeans(pts, opts);
  const UnitCodebook b = FitKMeans(pts, opts);
  EXPECT_TRUE(a.centroids == b.centroids);
  opts.seed = 100;
  const UnitCodebook c = FitKMeans(pts, opts);
  EXPECT_FALSE(a.centroids == c.centroids);
}

TEST(KMeans, Errors) {
  Matrix pts = Matrix::Zero(10, 2);
  KMeansOptions opts;
  opts.k = 3;
  EXPECT_THROW(FitKMeans(pts, opts), InsufficientDataError);
  Matrix few(2, 2);
  few << 0, 1, 2, 3;
  EXPECT_THROW(FitKMeans(few, opts), InsufficientDataError);
  opts.k = 1;
  EXPECT_THROW(FitKMeans(few, opts), DomainError);
  Matrix bad(4, 2);
  bad << 0, 1, 2, 3, 4, std::numeric_limits<double>::quiet_NaN(), 1, 1;
  opts.k = 2;
  EXPECT_THROW(FitKMeans(bad, opts), DomainError);
}

TEST(Quantize, ExactCentroidAndTieBreak) {
  UnitCodebook cb;
  cb.centroids = Matrix::Zero(8, 2);
  for (int k = 0; k < 8; ++k) cb.centroids(k, 0) = k * 10.0;
  cb.centroids(2, 0) = -1.0;
  cb.centroids(7, 0) = 1.0;
  FrameFeatures f;
  f.frames = Matrix::Zero(2, 2);
  f.frames(0, 0) = 50.0;  // exactly centroid 5
  f.frames(1, 0) = 0.0;   // centroid 0 at distance 0
  UnitSequence u = Quantize(f, cb);
  EXPECT_EQ(u.units, (std::vector<int>{5, 0}));

  cb.centroids(0, 0) = 100.0;  // now 2 and 7 tie for the origin
  u = Quantize(f, cb);
  EXPECT_EQ(u.units[1], 2);
}

TEST(Quantize, AgreesWithBruteForce) {
  Rng rng(31);
  UnitCodebook cb;
  cb.centroids.resize(16, 5);
  for (Eigen::Index i = 0; i < cb.centroids.size(); ++i)
    cb.centroids.data()[i] = UniformDouble(rng);
  FrameFeatures f;
  f.frames.resize(1000, 5);
  for (Eigen::Index i = 0; i < f.frames.size(); ++i)
    f.frames.data()[i] = UniformDouble(rng);
  const UnitSequence u = Quantize(f, cb);
  ASSERT_EQ(u.size(), 1000u);
  for (Eigen::Index t = 0; t < 1000; ++t) {
    int best = -1;
    double bd = 1e300;
    for (int k = 0; k < 16; ++k) {
      const double d = (f.frames.row(t) - cb.centroids.row(k)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    ASSERT_EQ(u.units[t], best);
  }
  f.frames.resize(3, 4);
  EXPECT_THROW(Quantize(f, cb), DimensionMismatchError);
}

TEST(Dedup, Properties) {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<int> z = RandomUnits(rng, 30, 5);
    const NormUnitSequence d = Dedup(z);
    for (std::size_t i = 1; i < d.size(); ++i) ASSERT_NE(d[i], d[i - 1]);
    ASSERT_LE(d.size(), z.size());
    ASSERT_EQ(Dedup(d.units()), d);
    if (!z.empty()) {
      ASSERT_EQ(d[0], z.front());
      ASSERT_EQ(d.units().back(), z.back());
    }
  }
  EXPECT_EQ(Dedup(std::vector<int>{3, 3, 3, 5, 5, 3}).units(),
            (std::vector<int>{3, 5, 3}));
  EXPECT_TRUE(Dedup(std::vector<int>{}).empty());
}

TEST(RunLength, RoundTripAndDurations) {
  Rng rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    UnitSequence z;
    z.units = RandomUnits(rng, 40, 4, 1);
    const RunLengthEncoding rle = RunLengthEncode(z);
    ASSERT_EQ(rle.units.size(), rle.durations.size());
    ASSERT_EQ(rle.durations.Total(), static_cast<long long>(z.size()));
    for (int d : rle.durations.durations) ASSERT_GE(d, 1);
    ASSERT_EQ(rle.units, Dedup(z));
    ASSERT_EQ(ExpandRuns(rle.units, rle.durations).units, z.units);
  }
  EXPECT_THROW(RunLengthEncode(UnitSequence{}), EmptySequenceError);
  EXPECT_THROW(ExpandRuns(NormUnitSequence({1, 2}), DurationSequence{{1}}),
               LengthMismatchError);
  EXPECT_THROW(ExpandRuns(NormUnitSequence({1, 2}), DurationSequence{{1, 0}}),
               DomainError);
  EXPECT_THROW(NormUnitSequence({1, 1}), DomainError);
}

TEST(EditDistance, AgreesWithRecursiveOracle) {
  Rng rng(47);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<int> a = RandomUnits(rng, 6, 3);
    const std::vector<int> b = RandomUnits(rng, 6, 3);
    ASSERT_EQ(EditDistance(a, b), RecursiveLevenshtein(a, 0, b, 0));
    const EditCounts c = AlignCounts<int>(a, b);
    ASSERT_EQ(c.Distance(), EditDistance(a, b));
    ASSERT_EQ(c.insertions - c.deletions,
              static_cast<int>(a.size()) - static_cast<int>(b.size()));
  }
}

TEST(EditDistance, MetricAxioms) {
  Rng rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = RandomUnits(rng, 12, 4);
    const auto b = RandomUnits(rng, 12, 4);
    const auto c = RandomUnits(rng, 12, 4);
    ASSERT_EQ(EditDistance(a, a), 0);
    ASSERT_EQ(EditDistance(a, b), EditDistance(b, a));
    ASSERT_LE(EditDistance(a, c), EditDistance(a, b) + EditDistance(b, c));
  }
}

TEST(UnitErrorRate, ValuesAndErrors) {
  const NormUnitSequence ref({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(UnitErrorRate(ref, ref), 0.0);
  EXPECT_DOUBLE_EQ(UnitErrorRate(NormUnitSequence({1, 2, 3}), ref), 0.25);
  EXPECT_DOUBLE_EQ(UnitErrorRate(NormUnitSequence({5, 6, 7, 8, 9, 5}), ref), 1.5);
  EXPECT_THROW(UnitErrorRate(ref, NormUnitSequence()), EmptyReferenceError);
  EXPECT_DOUBLE_EQ(UnitErrorRate(NormUnitSequence(), ref), 1.0);
}

TEST(CheckUnitRange, RejectsOutOfRange) {
  EXPECT_NO_THROW(CheckUnitRange(std::vector<int>{0, 3}, 4));
  EXPECT_THROW(CheckUnitRange(std::vector<int>{0, 4}, 4), UnitRangeError);
  EXPECT_THROW(CheckUnitRange(std::vector<int>{-1}, 4), UnitRangeError);
}

TEST(CodebookFile, RoundTripIsExact) {
  const auto dir = testing_util::TempDir("codebook");
  Rng rng(59);
  UnitCodebook cb;
  cb.seed = 1234567890123ULL;
  cb.centroids.resize(5, 3);
  for (Eigen::Index i = 0; i < cb.centroids.size(); ++i)
    cb.centroids.data()[i] = UniformDouble(rng) * 1e3 - 5e2;
  const std::string path = (dir / "cb.txt").string();
  WriteCodebook(path, cb);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "UDSC v1 K=5 D=3 seed=1234567890123");
  const UnitCodebook back = ReadCodebook(path);
  EXPECT_EQ(back.seed, cb.seed);
  EXPECT_TRUE(back.centroids == cb.centroids);

  std::ofstream(dir / "bad.txt") << "UDSC v1 K=2 D=2 seed=0\n1 2\n3\n";
  EXPECT_THROW(ReadCodebook((dir / "bad.txt").string()), CorruptFileError);
  std::ofstream(dir / "hdr.txt") << "XXXX v1 K=1 D=1 seed=0\n1\n";
  EXPECT_THROW(ReadCodebook((dir / "hdr.txt").string()), CorruptFileError);
}

TEST(UnitFile, RoundTripAndCorruption) {
  const auto dir = testing_util::TempDir("unitfile");
  const std::vector<UnitRecord> recs = {{"utt1", {1, 2, 3}}, {"utt2", {}},
                                        {"utt3", {0}}};
  const std::string path = (dir / "a.units").string();
  WriteUnitFile(path, recs);
  const auto back = ReadUnitFile(path);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].utterance_id, recs[i].utterance_id);
    EXPECT_EQ(back[i].units, recs[i].units);
  }
  std::ofstream(dir / "bad.units") << "u1\t1 2 x\n";
  EXPECT_THROW(ReadUnitFile((dir / "bad.units").string()), CorruptFileError);
}
