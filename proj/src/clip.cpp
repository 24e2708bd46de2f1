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

#include "skelscore/clip.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "skelscore/rng.hpp"

namespace skelscore::data {

using nlohmann::json;

namespace {

RawClip clip_from_json(const json& j) {
  RawClip clip;
  clip.video_id = j.at("video_id").get<std::string>();
  clip.width = j.at("width").get<int>();
  clip.height = j.at("height").get<int>();
  clip.fps = j.at("fps").get<double>();
  clip.frame_count = j.at("frame_count").get<int>();
  const json& label = j.at("label");
  if (!label.is_null()) clip.label = label.get<std::string>();
  for (const json& jf : j.at("frames")) {
    RawFrame frame;
    frame.t = jf.at("t").get<int>();
    for (const json& jp : jf.at("persons")) {
      RawPerson person;
      person.track_id = jp.at("track_id").get<int>();
      for (const json& jj : jp.at("joints")) {
        RawJoint joint;
        joint.k = jj.at("k").get<int>();
        joint.x = jj.at("x").get<double>();
        joint.y = jj.at("y").get<double>();
        joint.c = jj.at("c").get<double>();
        person.joints.push_back(joint);
      }
      frame.persons.push_back(std::move(person));
    }
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void validate_clip(const RawClip& clip, int joint_count) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("clip '" + clip.video_id + "': " + what);
  };
  if (clip.width <= 0 || clip.height <= 0)
    fail("frame size " + std::to_string(clip.width) + "x" +
         std::to_string(clip.height) + " must be positive");
  if (clip.frame_count < 1) fail("frame_count must be >= 1");
  for (const RawFrame& f : clip.frames) {
    if (f.t < 0 || f.t >= clip.frame_count)
      fail("frame index " + std::to_string(f.t) + " outside [0," +
           std::to_string(clip.frame_count) + ")");
    for (const RawPerson& p : f.persons) {
      for (const RawJoint& joint : p.joints) {
        if (joint.k < 0 || joint.k >= joint_count)
          fail("joint index " + std::to_string(joint.k) + " outside [0," +
               std::to_string(joint_count) + ")");
        if (joint.c < 0.0 || joint.c > 1.0)
          fail("confidence " + std::to_string(joint.c) + " outside [0,1]");
      }
    }
  }
}

std::vector<RawClip> parse_clip_file(const std::string& path,
                                     int joint_count) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open clip file: " + path);
  std::vector<RawClip> clips;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    RawClip clip;
    try {
      clip = clip_from_json(j);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    validate_clip(clip, joint_count);
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::string clip_to_json_line(const RawClip& clip) {
  json j;
  j["video_id"] = clip.video_id;
  j["width"] = clip.width;
  j["height"] = clip.height;
  j["fps"] = clip.fps;
  j["frame_count"] = clip.frame_count;
  if (clip.label)
    j["label"] = *clip.label;
  else
    j["label"] = nullptr;
  json frames = json::array();
  for (const RawFrame& f : clip.frames) {
    json jf;
    jf["t"] = f.t;
    json persons = json::array();
    for (const RawPerson& p : f.persons) {
      json jp;
      jp["track_id"] = p.track_id;
      json joints = json::array();
      for (const RawJoint& joint : p.joints) {
        json jj;
        jj["k"] = joint.k;
        jj["x"] = joint.x;
        jj["y"] = joint.y;
        jj["c"] = joint.c;
        joints.push_back(std::move(jj));
      }
      jp["joints"] = std::move(joints);
      persons.push_back(std::move(jp));
    }
    jf["persons"] = std::move(persons);
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j.dump();
}

void write_clip_file(const std::string& path,
                     const std::vector<RawClip>& clips) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write clip file: " + path);
  for (const RawClip& clip : clips) out << clip_to_json_line(clip) << '\n';
}

TokenCloud tokenize_clip(const RawClip& clip, int joint_count,
                         std::size_t* skipped_persons) {
  TokenCloud cloud;
  cloud.source = clip.video_id;
  if (skipped_persons != nullptr) *skipped_persons = 0;
  const double w = static_cast<double>(clip.width);
  const double h = static_cast<double>(clip.height);
  const double t_denom =
      clip.frame_count > 1 ? static_cast<double>(clip.frame_count - 1) : 1.0;
  const double k_denom = joint_count > 1 ? joint_count - 1.0 : 1.0;
  for (const RawFrame& frame : clip.frames) {
    const double t_norm = static_cast<double>(frame.t) / t_denom;
    for (const RawPerson& person : frame.persons) {
      if (person.joints.empty()) {
        if (skipped_persons != nullptr) ++*skipped_persons;
        continue;
      }
      double cx = 0.0, cy = 0.0;
      for (const RawJoint& joint : person.joints) {
        cx += joint.x;
        cy += joint.y;
      }
      cx /= static_cast<double>(person.joints.size());
      cy /= static_cast<double>(person.joints.size());
      for (const RawJoint& joint : person.joints) {
        JointToken tok;
        tok.v = {clamp01(joint.x / w),
                 clamp01(joint.y / h),
                 clamp01(t_norm),
                 clamp01(joint.c),
                 clamp01(static_cast<double>(joint.k) / k_denom),
                 clamp01(cx / w),
                 clamp01(cy / h)};
        cloud.tokens.push_back(tok);
      }
    }
  }
  return cloud;
}

std::vector<std::vector<RawClip>> split_subsets(
    const std::vector<RawClip>& clips, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("split_subsets: n must be >= 1");
  if (n > clips.size())
    throw std::invalid_argument(
        "split_subsets: cannot cut " + std::to_string(clips.size()) +
        " clips into " + std::to_string(n) + " subsets");
  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  deterministic_shuffle(order, rng);
  std::vector<std::vector<RawClip>> subsets(n);
  for (std::size_t i = 0; i < order.size(); ++i)
    subsets[i % n].push_back(clips[order[i]]);
  return subsets;
}

}  // namespace skelscore::data
