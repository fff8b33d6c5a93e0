// src/eval/robustness.cc

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

#include "unitdsr/errors.h"
#include "unitdsr/eval.h"
#include "unitdsr/log.h"
#include "unitdsr/random.h"

namespace unitdsr {

std::string ToString(RobustnessAxis axis) {
  return axis == RobustnessAxis::kSpeedRatio ? "speed" : "snr";
}

RobustnessAxis ParseRobustnessAxis(const std::string& name) {
  if (name == "speed") return RobustnessAxis::kSpeedRatio;
  if (name == "snr") return RobustnessAxis::kSnrDb;
  throw ConfigError("unknown robustness axis '" + name + "' (speed or snr)");
}

std::vector<double> DefaultAxisValues(RobustnessAxis axis) {
  if (axis == RobustnessAxis::kSpeedRatio) return {0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
  return {0, 5, 10, 15, 20, 30, std::numeric_limits<double>::infinity()};
}

const RobustnessCell& RobustnessGrid::At(double value) const {
  for (const auto& c : cells)
    if (c.value == value) return c;
  throw DomainError("grid has no cell at " + std::to_string(value));
}

RobustnessCell EvaluateTestset(const std::vector<TestUtterance>& testset,
                               const UtteranceScorer& score) {
  RobustnessCell cell;
  double sum = 0.0;
  for (const auto& u : testset) {
    try {
      sum += score(u, u.audio);
      ++cell.n_ok;
    } catch (const Error& e) {
      LogWarning(u.id + ": " + e.what());
      ++cell.n_fail;
    }
  }
  cell.mean = cell.n_ok > 0 ? sum / cell.n_ok : std::numeric_limits<double>::quiet_NaN();
  return cell;
}

RobustnessGrid RobustnessSweep(const std::vector<TestUtterance>& testset, RobustnessAxis axis,
                               const std::vector<double>& values, const std::string& metric,
                               const UtteranceScorer& score, std::uint64_t seed) {
  if (testset.empty()) throw EmptyDatasetError("robustness test set is empty");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1]))
      throw DomainError("robustness axis values must be strictly increasing");
  RobustnessGrid grid;
  grid.axis = axis;
  grid.metric = metric;
  for (double v : values) {
    const bool identity = axis == RobustnessAxis::kSpeedRatio ? v == 1.0 : std::isinf(v);
    RobustnessCell cell;
    if (identity) {
      cell = EvaluateTestset(testset, score);
    } else {
      double sum = 0.0;
      for (const auto& u : testset) {
        try {
          Waveform in;
          if (axis == RobustnessAxis::kSpeedRatio) {
            in = SpeedPerturb(u.audio, v);
          } else {
            const int key = static_cast<int>(std::lround(v * 1000.0));
            in = AddNoiseAtSnr(u.audio, v, DeriveSeed(seed, "snr:" + u.id, key));
          }
          sum += score(u, in);
          ++cell.n_ok;
        } catch (const Error& e) {
          LogWarning(ToString(axis) + "=" + std::to_string(v) + " " + u.id + ": " + e.what());
          ++cell.n_fail;
        }
      }
      cell.mean = cell.n_ok > 0 ? sum / cell.n_ok : std::numeric_limits<double>::quiet_NaN();
    }
    cell.value = v;
    grid.cells.push_back(cell);
  }
  return grid;
}

}  // namespace unitdsr
