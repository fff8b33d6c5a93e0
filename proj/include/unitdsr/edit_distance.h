// include/unitdsr/edit_distance.h

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

#ifndef UNITDSR_EDIT_DISTANCE_H_
#define UNITDSR_EDIT_DISTANCE_H_

#include <span>
#include <utility>
#include <vector>

namespace unitdsr {

struct EditCounts {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int Distance() const { return substitutions + insertions + deletions; }
};

/// Unit-cost Levenshtein alignment of `hyp` against `ref`.  Among alignments
/// of minimal distance the one with the most substitutions is reported, which
/// pins the (S, I, D) split: with distance and S fixed, I - D equals
/// |hyp| - |ref|.
template <typename T>
EditCounts AlignCounts(std::span<const T> hyp, std::span<const T> ref) {
  const std::size_t n = hyp.size(), m = ref.size();
  // cost[j] = (distance, -substitutions) for prefix hyp[0,i) vs ref[0,j).
  using Cost = std::pair<int, int>;
  struct Cell {
    Cost cost;
    int ins, dels;
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j)
    prev[j] = {{static_cast<int>(j), 0}, 0, static_cast<int>(j)};
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {{static_cast<int>(i), 0}, static_cast<int>(i), 0};
    for (std::size_t j = 1; j <= m; ++j) {
      const bool match = hyp[i - 1] == ref[j - 1];
      Cell diag = prev[j - 1];
      if (!match) {
        diag.cost.first += 1;
        diag.cost.second -= 1;
      }
      Cell ins = prev[j];
      ins.cost.first += 1;
      ins.ins += 1;
      Cell del = cur[j - 1];
      del.cost.first += 1;
      del.dels += 1;
      Cell best = diag;
      if (ins.cost < best.cost) best = ins;
      if (del.cost < best.cost) best = del;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& end = prev[m];
  return {-end.cost.second, end.ins, end.dels};
}

}  // namespace unitdsr

#endif  // UNITDSR_EDIT_DISTANCE_H_
