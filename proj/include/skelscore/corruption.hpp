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

#ifndef SKELSCORE_CORRUPTION_HPP_
#define SKELSCORE_CORRUPTION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skelscore/clip.hpp"

namespace skelscore::corrupt {

/// Knobs for synthetic detector/tracker errors. The per-clip random stream is
/// derived from (seed, video_id), so corrupting a clip is a pure function and
/// does not depend on file order.
struct CorruptionSpec {
  double error_ratio = 0.0;  // fraction of joints hit by each of FP and FN
  std::optional<double> fp_sigma;  // noise std in pixels; unset: 5% of frame diagonal
  int track_swap_period = 60;      // frames between tracking shuffles
  std::uint64_t seed = 0;

  void validate() const;
  double sigma_for(const data::RawClip& clip) const;
};

/// Which joints and frames were touched. Joint indices count detected joints
/// flattened in frame order, then person order within the frame, then joint
/// order within the person.
struct SelectionLog {
  std::string clip_id;
  std::vector<std::size_t> fp_indices;
  std::vector<std::size_t> fn_indices;
  std::vector<int> swap_frames;  // start frame of every permuted span
};

/// Adds N(0, sigma^2) to both coordinates of exactly round(ratio * J_total)
/// joints, clamped to frame bounds.
data::RawClip inject_false_positives(const data::RawClip& clip,
                                     const CorruptionSpec& spec,
                                     SelectionLog* log = nullptr);

/// Zeroes coordinates and confidence of exactly round(ratio * J_total)
/// joints (a draw disjoint from FPs when combined in corrupt_clip).
data::RawClip inject_false_negatives(const data::RawClip& clip,
                                     const CorruptionSpec& spec,
                                     SelectionLog* log = nullptr);

/// Every track_swap_period frames, permutes the track ids co-present in that
/// frame span. A clip that never shows two persons at once is returned
/// unchanged with *warned set.
data::RawClip inject_tracking_errors(const data::RawClip& clip,
                                     const CorruptionSpec& spec,
                                     SelectionLog* log = nullptr,
                                     bool* warned = nullptr);

/// FP, then FN (disjoint joint draws), then tracking errors, all from one
/// seeded stream.
data::RawClip corrupt_clip(const data::RawClip& clip,
                           const CorruptionSpec& spec,
                           SelectionLog* log = nullptr);

std::string selection_log_to_json(const std::vector<SelectionLog>& logs);
void write_selection_log(const std::string& path,
                         const std::vector<SelectionLog>& logs);

}  // namespace skelscore::corrupt

#endif  // SKELSCORE_CORRUPTION_HPP_
