// src/pipeline/manifest.cc

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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "unitdsr/errors.h"
#include "unitdsr/pipeline.h"
#include "unitdsr/random.h"

namespace unitdsr {

namespace fs = std::filesystem;

std::string ToString(HealthTag tag) {
  return tag == HealthTag::kDysarthric ? "dysarthric" : "healthy";
}

std::set<std::string> DefaultBlockVocabulary() { return {"B1", "B2", "B3"}; }

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool IsBlank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::vector<ManifestRecord> ParseManifest(const std::string& path,
                                          const std::set<std::string>& blocks) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  std::vector<ManifestRecord> out;
  std::map<std::string, int> first_line;
  std::map<std::string, HealthTag> health;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (IsBlank(line)) continue;
    const std::string where = path + ":" + std::to_string(n) + ": ";
    const auto f = SplitTabs(line);
    if (f.size() != 6)
      throw FieldCountError(where + "expected 6 tab-separated fields, got " +
                            std::to_string(f.size()));
    ManifestRecord r;
    r.utterance_id = f[0];
    r.audio_path = f[1];
    r.speaker_id = f[2];
    r.transcript = f[3];
    r.block_tag = f[4];
    r.line = n;
    if (r.utterance_id.empty()) throw ManifestError(where + "empty utterance id");
    if (r.audio_path.empty()) throw ManifestError(where + "empty audio path");
    if (r.speaker_id.empty()) throw ManifestError(where + "empty speaker id");
    if (!blocks.count(r.block_tag))
      throw ManifestError(where + "unknown block tag '" + r.block_tag + "'");
    if (f[5] == "healthy") {
      r.health_tag = HealthTag::kHealthy;
    } else if (f[5] == "dysarthric") {
      r.health_tag = HealthTag::kDysarthric;
    } else {
      throw ManifestError(where + "unknown health tag '" + f[5] + "'");
    }
    auto [it, fresh] = first_line.emplace(r.utterance_id, n);
    if (!fresh)
      throw DuplicateIdError(where + "utterance id '" + r.utterance_id +
                             "' already used on line " +
                             std::to_string(it->second));
    auto [h, new_speaker] = health.emplace(r.speaker_id, r.health_tag);
    if (!new_speaker && h->second != r.health_tag)
      throw ManifestError(where + "speaker '" + r.speaker_id +
                          "' tagged both healthy and dysarthric");
    out.push_back(std::move(r));
  }
  return out;
}

std::string ResolveAudioPath(const std::string& audio_path,
                             const std::string& manifest_dir) {
  const fs::path p(audio_path);
  if (p.is_absolute()) return p.string();
  if (const char* root = std::getenv("UNITDSR_DATA_DIR"); root && *root)
    return (fs::path(root) / p).string();
  return (fs::path(manifest_dir) / p).string();
}

std::set<std::string> DysarthricSpeakers(
    const std::vector<ManifestRecord>& records) {
  std::set<std::string> out;
  for (const auto& r : records)
    if (r.health_tag == HealthTag::kDysarthric) out.insert(r.speaker_id);
  return out;
}

std::uint64_t HashFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return Fnv1a(ss.str());
}

std::string HexHash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace unitdsr
