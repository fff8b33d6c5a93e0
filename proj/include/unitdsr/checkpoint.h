// include/unitdsr/checkpoint.h

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

// Versioned binary container for model state: ordered string metadata plus
// named double tensors, protected by a CRC-32 of the payload.
//
// Layout (little-endian): "UDSK", u32 version, u64 payload bytes,
// u32 crc32(payload), payload.  Payload: u32 n_meta, n_meta x (str key,
// str value), u32 n_tensors, n_tensors x (str name, u64 rows, u64 cols,
// rows*cols f64 row-major).  A str is u32 length then bytes.

#ifndef UNITDSR_CHECKPOINT_H_
#define UNITDSR_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "unitdsr/matrix.h"

namespace unitdsr {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  /// Throws CorruptFileError when absent.
  const std::string& Meta(const std::string& key) const;
  long long MetaInt(const std::string& key) const;
  /// Null when absent.
  const Matrix* FindTensor(const std::string& name) const;
  /// FNV-1a over tensor names and raw bytes, in stored order.
  std::uint64_t TensorChecksum() const;
};

/// Writes to a temporary sibling then renames.  Throws IoError.
void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
/// Throws IoError (missing), VersionError, CorruptFileError.
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace unitdsr

#endif  // UNITDSR_CHECKPOINT_H_
