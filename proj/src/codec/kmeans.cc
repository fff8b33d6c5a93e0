// src/codec/kmeans.cc

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
#include <limits>
#include <sstream>

#include "unitdsr/codec.h"
#include "unitdsr/errors.h"
#include "unitdsr/random.h"

namespace unitdsr {

namespace {

double SquaredDistance(const Matrix& a, Eigen::Index i, const Matrix& b,
                       Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index d = 0; d < a.cols(); ++d) {
    const double diff = a(i, d) - b(j, d);
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

std::vector<int> NearestCentroids(const Matrix& frames, const Matrix& centroids,
                                  double* inertia) {
  if (frames.cols() != centroids.cols()) {
    std::ostringstream os;
    os << "feature dim " << frames.cols() << " vs codebook dim "
       << centroids.cols();
    throw DimensionMismatchError(os.str());
  }
  std::vector<int> out(frames.rows());
  double total = 0.0;
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = SquaredDistance(frames, t, centroids, c);
      if (d < best) {  // strict: ties keep the lower index
        best = d;
        arg = static_cast<int>(c);
      }
    }
    out[t] = arg;
    total += best;
  }
  if (inertia) *inertia = total;
  return out;
}

Matrix KMeansPlusPlusInit(const Matrix& points, int k, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  Rng rng(seed);
  Matrix centroids(k, points.cols());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());

  Eigen::Index pick = static_cast<Eigen::Index>(UniformIndex(rng, n));
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double d : dist) total += d;
      if (total <= 0.0) {
        std::ostringstream os;
        os << "k-means++: only " << c << " distinct frames for K=" << k;
        throw InsufficientDataError(os.str());
      }
      const double u = UniformDouble(rng) * total;
      double acc = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (dist[i] <= 0.0) continue;
        acc += dist[i];
        pick = i;
        if (acc > u) break;
      }
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], SquaredDistance(points, i, centroids, c));
  }
  return centroids;
}

UnitCodebook FitKMeans(const Matrix& points, const KMeansOptions& opts) {
  if (opts.k < 2) throw DomainError("k-means needs K >= 2");
  const Eigen::Index n = points.rows();
  if (n < opts.k) {
    std::ostringstream os;
    os << n << " frames cannot populate K=" << opts.k << " clusters";
    throw InsufficientDataError(os.str());
  }
  for (Eigen::Index i = 0; i < points.size(); ++i)
    if (!std::isfinite(points.data()[i]))
      throw DomainError("k-means input has non-finite values");

  UnitCodebook cb;
  cb.seed = opts.seed;
  cb.centroids = KMeansPlusPlusInit(points, opts.k, opts.seed);
  const int k = opts.k;

  double prev = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    double inertia = 0.0;
    std::vector<int> assign = NearestCentroids(points, cb.centroids, &inertia);
    cb.meta.inertia_trace.push_back(inertia);

    std::vector<long> counts(k, 0);
    for (int a : assign) ++counts[a];
    // Re-seed empty clusters with the worst-served points, one each.
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      double worst = -1.0;
      Eigen::Index arg = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[i] || counts[assign[i]] <= 1) continue;
        const double d = SquaredDistance(points, i, cb.centroids, assign[i]);
        if (d > worst) {
          worst = d;
          arg = i;
        }
      }
      if (arg < 0) throw InsufficientDataError("k-means: cannot re-seed");
      taken[arg] = true;
      --counts[assign[arg]];
      assign[arg] = c;
      counts[c] = 1;
    }

    Matrix sums = Matrix::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(assign[i]) += points.row(i);
    for (int c = 0; c < k; ++c) cb.centroids.row(c) = sums.row(c) / counts[c];

    const bool converged =
        std::isfinite(prev) && (prev - inertia) <= opts.rel_tol * prev;
    prev = inertia;
    if (converged) {
      ++it;
      break;
    }
  }
  cb.meta.iterations = it;
  NearestCentroids(points, cb.centroids, &cb.meta.final_inertia);
  cb.meta.inertia_trace.push_back(cb.meta.final_inertia);

  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (cb.centroids.row(a) == cb.centroids.row(b))
        throw InsufficientDataError("k-means produced duplicate centroids");
  return cb;
}

UnitCodebook FitKMeans(const std::vector<FrameFeatures>& features,
                       const KMeansOptions& opts) {
  if (features.empty()) throw InsufficientDataError("no feature matrices");
  const int dim = features.front().Dim();
  Eigen::Index total = 0;
  for (const auto& f : features) {
    if (f.Dim() != dim)
      throw DimensionMismatchError("feature matrices disagree on dimension");
    total += f.NumFrames();
  }
  Matrix points(total, dim);
  Eigen::Index row = 0;
  for (const auto& f : features) {
    points.middleRows(row, f.NumFrames()) = f.frames;
    row += f.NumFrames();
  }
  return FitKMeans(points, opts);
}

UnitSequence Quantize(const FrameFeatures& f, const UnitCodebook& cb) {
  UnitSequence s;
  s.units = NearestCentroids(f.frames, cb.centroids);
  s.frame_hop_ms = f.frame_hop_ms;
  return s;
}

}  // namespace unitdsr
