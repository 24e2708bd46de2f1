// Copyright 2026 The SkelScore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SKELSCORE_RNG_HPP_
#define SKELSCORE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace skelscore {

/// FNV-1a 64-bit. Stable across platforms; used for text hashing and for
/// deriving per-clip random streams from (seed, clip id).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  return seed * 0x9E3779B97F4A7C15ULL ^ fnv1a64(tag);
}

/// Fisher-Yates with a plain modulo draw. std::shuffle is avoided because its
/// draw sequence is implementation-defined; this one reproduces everywhere.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace skelscore

#endif  // SKELSCORE_RNG_HPP_
