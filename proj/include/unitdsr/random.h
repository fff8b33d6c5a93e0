// include/unitdsr/random.h

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

#ifndef UNITDSR_RANDOM_H_
#define UNITDSR_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace unitdsr {

using Rng = std::mt19937_64;

/// Uniform in [0, 1) from the top 53 bits; identical on every platform.
inline double UniformDouble(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(UniformDouble(rng) * static_cast<double>(n));
}

/// Fisher-Yates with UniformIndex, so orders reproduce across standard
/// libraries (std::shuffle does not promise that).
template <typename T>
void Shuffle(std::vector<T>* v, Rng& rng) {
  for (std::size_t i = v->size(); i > 1; --i)
    std::swap((*v)[i - 1], (*v)[UniformIndex(rng, i)]);
}

/// 64-bit FNV-1a.
inline std::uint64_t Fnv1a(std::string_view bytes,
                           std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Component seed = FNV-1a("<global_seed>|<component>|<stage>").  Documented
/// so a partial rerun can recreate any component's stream.
inline std::uint64_t DeriveSeed(std::uint64_t global_seed,
                                std::string_view component, int stage = 0) {
  std::string key = std::to_string(global_seed);
  key += '|';
  key += component;
  key += '|';
  key += std::to_string(stage);
  return Fnv1a(key);
}

}  // namespace unitdsr

#endif  // UNITDSR_RANDOM_H_
