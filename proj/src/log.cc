// src/log.cc

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

#include "unitdsr/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace unitdsr {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::kWarning)};
std::mutex g_mutex;
}  // namespace

void SetLogLevel(LogLevel level) { g_level = static_cast<int>(level); }

LogLevel GetLogLevel() { return static_cast<LogLevel>(g_level.load()); }

void LogWarning(std::string_view msg) {
  if (g_level < static_cast<int>(LogLevel::kWarning)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "WARNING: " << msg << '\n';
}

void LogInfo(std::string_view msg) {
  if (g_level < static_cast<int>(LogLevel::kInfo)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "LOG: " << msg << '\n';
}

}  // namespace unitdsr
