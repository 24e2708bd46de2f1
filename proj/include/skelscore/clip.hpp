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

#ifndef SKELSCORE_CLIP_HPP_
#define SKELSCORE_CLIP_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skelscore::data {

/// Malformed input text (bad JSON, wrong types, missing fields).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally valid input that breaks a documented invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RawJoint {
  int k = 0;       // joint index within the declared skeleton
  double x = 0.0;  // pixels
  double y = 0.0;  // pixels
  double c = 0.0;  // detector confidence in [0,1]
};

struct RawPerson {
  int track_id = 0;
  std::vector<RawJoint> joints;
};

struct RawFrame {
  int t = 0;  // time index in [0, frame_count)
  std::vector<RawPerson> persons;
};

/// One pose sequence as emitted by a detector+tracker. The track identity is
/// bookkeeping only; it never reaches the token representation.
struct RawClip {
  std::string video_id;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  int frame_count = 0;
  std::optional<std::string> label;
  std::vector<RawFrame> frames;
};

/// One joint as the 7-dim normalized vector
/// (x, y, t, confidence, joint index, person centroid x, centroid y),
/// every component in [0,1].
struct JointToken {
  std::array<double, 7> v{};
};

/// The unordered token multiset for one clip. Vector by storage, set by
/// meaning: any permutation denotes the same clip.
struct TokenCloud {
  std::vector<JointToken> tokens;
  std::string source;
};

/// Reads one clip per JSONL line. Malformed lines raise ParseError naming the
/// 1-based line number; invariant violations raise ValidationError naming the
/// clip id. joint_count is the declared skeleton size K.
std::vector<RawClip> parse_clip_file(const std::string& path, int joint_count);

/// Validates one in-memory clip against the same invariants.
void validate_clip(const RawClip& clip, int joint_count);

/// Serializes back to the clip JSONL format, one clip per line.
void write_clip_file(const std::string& path,
                     const std::vector<RawClip>& clips);
std::string clip_to_json_line(const RawClip& clip);

/// Converts a valid clip into its token cloud. Persons with zero joints are
/// skipped and tallied into *skipped_persons when non-null.
TokenCloud tokenize_clip(const RawClip& clip, int joint_count,
                         std::size_t* skipped_persons = nullptr);

/// Deterministic partition into n lists whose sizes differ by at most one.
std::vector<std::vector<RawClip>> split_subsets(
    const std::vector<RawClip>& clips, std::size_t n, std::uint64_t seed);

}  // namespace skelscore::data

#endif  // SKELSCORE_CLIP_HPP_
