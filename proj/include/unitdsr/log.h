// include/unitdsr/log.h

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

#ifndef UNITDSR_LOG_H_
#define UNITDSR_LOG_H_

#include <string_view>

namespace unitdsr {

enum class LogLevel { kQuiet = 0, kWarning = 1, kInfo = 2 };

/// Process-wide verbosity; defaults to kWarning.
void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

void LogWarning(std::string_view msg);
void LogInfo(std::string_view msg);

}  // namespace unitdsr

#endif  // UNITDSR_LOG_H_
