// include/unitdsr/train_log.h

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

// Per-update training log shared by the trainers.

#ifndef UNITDSR_TRAIN_LOG_H_
#define UNITDSR_TRAIN_LOG_H_

#include <string>
#include <vector>

namespace unitdsr {

struct TrainLogEntry {
  long long step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

/// CSV with header `step,loss,lr,wall_ms`.  Throws IoError.
void WriteTrainingLog(const std::string& path,
                      const std::vector<TrainLogEntry>& log);

}  // namespace unitdsr

#endif  // UNITDSR_TRAIN_LOG_H_
