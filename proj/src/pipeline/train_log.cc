// src/pipeline/train_log.cc

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

#include "unitdsr/train_log.h"

#include <cstdio>
#include <fstream>

#include "unitdsr/errors.h"

namespace unitdsr {

void WriteTrainingLog(const std::string& path, const std::vector<TrainLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "step,loss,lr,wall_ms\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.3f\n", e.step, e.loss, e.lr, e.wall_ms);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace unitdsr
