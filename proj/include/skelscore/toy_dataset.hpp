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

#ifndef SKELSCORE_TOY_DATASET_HPP_
#define SKELSCORE_TOY_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "skelscore/clip.hpp"

namespace skelscore::toy {

/// The generator always emits this skeleton (nose, eyes, ears, shoulders,
/// elbows, wrists, hips, knees, ankles).
inline constexpr int kJointCount = 17;

/// The four motion classes, built from line/sinusoid trajectories plus
/// Gaussian jitter:
///   walk       one person translating across the frame with swinging limbs
///   wave       one person in place, one wrist oscillating above the head
///   handshake  two persons converging, near arms extended to the midpoint
///   fight      two persons close together, hopping, limbs flailing
inline const std::vector<std::string>& toy_classes();

struct ToyConfig {
  std::size_t clips_per_class = 16;
  int frame_count = 30;
  int width = 320;
  int height = 224;
  double fps = 30.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Labeled clips for every class, clips_per_class each, in class order then
/// index order. Deterministic per (seed, class, index); each clip's stream
/// is independent, so regenerating with a larger count extends the list
/// without changing earlier clips.
std::vector<data::RawClip> gen_toy_dataset(const ToyConfig& cfg);

}  // namespace skelscore::toy

#endif  // SKELSCORE_TOY_DATASET_HPP_
