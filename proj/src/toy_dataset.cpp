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

#include "skelscore/toy_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "skelscore/rng.hpp"

namespace skelscore::toy {

using data::RawClip;
using data::RawFrame;
using data::RawJoint;
using data::RawPerson;

const std::vector<std::string>& toy_classes() {
  static const std::vector<std::string> classes{"fight", "handshake", "walk",
                                                "wave"};
  return classes;
}

void ToyConfig::validate() const {
  if (clips_per_class < 1)
    throw std::invalid_argument("toy config: clips_per_class must be >= 1");
  if (frame_count < 2)
    throw std::invalid_argument("toy config: frame_count must be >= 2");
  if (width < 1 || height < 1)
    throw std::invalid_argument("toy config: frame size must be positive");
  if (!(fps > 0.0)) throw std::invalid_argument("toy config: fps must be > 0");
}

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Joint layout: 0 nose, 1-2 eyes, 3-4 ears, 5-6 shoulders, 7-8 elbows,
// 9-10 wrists, 11-12 hips, 13-14 knees, 15-16 ankles (left index first).
// Offsets are pixels from the body center of a ~120px standing figure,
// y growing downward.
constexpr double kTemplate[kJointCount][2] = {
    {0, -55},  {-4, -58}, {4, -58},  {-8, -56}, {8, -56},  {-15, -40},
    {15, -40}, {-22, -20}, {22, -20}, {-25, 0},  {25, 0},   {-10, 0},
    {10, 0},   {-12, 25}, {12, 25},  {-14, 50}, {14, 50}};

struct Pose {
  double x[kJointCount];
  double y[kJointCount];
};

Pose base_pose(double cx, double cy, double facing) {
  Pose p;
  for (int k = 0; k < kJointCount; ++k) {
    p.x[k] = cx + facing * kTemplate[k][0];
    p.y[k] = cy + kTemplate[k][1];
  }
  return p;
}

constexpr int kLWrist = 9, kRWrist = 10, kLElbow = 7, kRElbow = 8;
constexpr int kLKnee = 13, kRKnee = 14, kLAnkle = 15, kRAnkle = 16;

RawPerson finish_person(int track_id, const Pose& pose, const ToyConfig& cfg,
                        std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 1.5);
  std::uniform_real_distribution<double> conf(0.75, 0.98);
  RawPerson person;
  person.track_id = track_id;
  person.joints.reserve(kJointCount);
  for (int k = 0; k < kJointCount; ++k) {
    RawJoint j;
    j.k = k;
    j.x = std::clamp(pose.x[k] + jitter(rng), 0.0,
                     static_cast<double>(cfg.width));
    j.y = std::clamp(pose.y[k] + jitter(rng), 0.0,
                     static_cast<double>(cfg.height));
    j.c = conf(rng);
    person.joints.push_back(j);
  }
  return person;
}

double frame_phase(int t, int frame_count, double cycles, double phase) {
  return kTau * cycles * static_cast<double>(t) /
             static_cast<double>(frame_count) +
         phase;
}

/// One person crossing the frame, arms and legs counter-swinging.
void make_walk(RawClip& clip, const ToyConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> uphase(0.0, kTau);
  const double dir = u01(rng) < 0.5 ? 1.0 : -1.0;
  const double x0 = (dir > 0 ? 0.15 : 0.85) * cfg.width;
  const double x1 = (dir > 0 ? 0.85 : 0.15) * cfg.width;
  const double cy = (0.52 + 0.04 * (u01(rng) - 0.5)) * cfg.height;
  const double phase = uphase(rng);
  for (int t = 0; t < cfg.frame_count; ++t) {
    const double a =
        static_cast<double>(t) / static_cast<double>(cfg.frame_count - 1);
    const double cx = x0 + a * (x1 - x0);
    Pose pose = base_pose(cx, cy, dir);
    const double swing = std::sin(frame_phase(t, cfg.frame_count, 2.0, phase));
    pose.x[kLKnee] += 8.0 * swing;
    pose.x[kLAnkle] += 12.0 * swing;
    pose.x[kRKnee] -= 8.0 * swing;
    pose.x[kRAnkle] -= 12.0 * swing;
    pose.x[kLWrist] -= 10.0 * swing;
    pose.x[kRWrist] += 10.0 * swing;
    RawFrame frame;
    frame.t = t;
    frame.persons.push_back(finish_person(0, pose, cfg, rng));
    clip.frames.push_back(std::move(frame));
  }
}

/// One person in place, right arm raised, wrist circling above the head.
void make_wave(RawClip& clip, const ToyConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> uphase(0.0, kTau);
  const double cx = (0.3 + 0.4 * u01(rng)) * cfg.width;
  const double cy = (0.52 + 0.04 * (u01(rng) - 0.5)) * cfg.height;
  const double phase = uphase(rng);
  for (int t = 0; t < cfg.frame_count; ++t) {
    Pose pose = base_pose(cx, cy, 1.0);
    const double s = std::sin(frame_phase(t, cfg.frame_count, 3.0, phase));
    pose.x[kRElbow] = cx + 20.0;
    pose.y[kRElbow] = cy - 50.0;
    pose.x[kRWrist] = cx + 24.0 + 18.0 * s;
    pose.y[kRWrist] = cy - 72.0 - 6.0 * s;  // well above the nose at -55
    RawFrame frame;
    frame.t = t;
    frame.persons.push_back(finish_person(0, pose, cfg, rng));
    clip.frames.push_back(std::move(frame));
  }
}

/// Two persons drifting toward each other, near arms extended so both
/// wrists meet around the frame midline.
void make_handshake(RawClip& clip, const ToyConfig& cfg,
                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double cy = (0.52 + 0.04 * (u01(rng) - 0.5)) * cfg.height;
  const double drift = 0.04 * u01(rng);
  for (int t = 0; t < cfg.frame_count; ++t) {
    const double a =
        static_cast<double>(t) / static_cast<double>(cfg.frame_count - 1);
    const double cx0 = (0.30 + (0.08 + drift) * a) * cfg.width;
    const double cx1 = (0.70 - (0.08 + drift) * a) * cfg.width;
    const double mid = 0.5 * cfg.width;
    RawFrame frame;
    frame.t = t;
    for (int person = 0; person < 2; ++person) {
      const double cx = person == 0 ? cx0 : cx1;
      const double facing = person == 0 ? 1.0 : -1.0;
      Pose pose = base_pose(cx, cy, facing);
      const int wrist = person == 0 ? kRWrist : kLWrist;
      const int elbow = person == 0 ? kRElbow : kLElbow;
      pose.x[wrist] = mid - facing * 4.0;  // reach to just short of center
      pose.y[wrist] = cy - 12.0;
      pose.x[elbow] = 0.5 * (cx + mid);
      pose.y[elbow] = cy - 18.0;
      frame.persons.push_back(finish_person(person, pose, cfg, rng));
    }
    clip.frames.push_back(std::move(frame));
  }
}

/// Two persons close together, hopping, wrists and elbows flailing fast.
void make_fight(RawClip& clip, const ToyConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> uphase(0.0, kTau);
  std::normal_distribution<double> flail(0.0, 12.0);
  const double cy0 = (0.52 + 0.04 * (u01(rng) - 0.5)) * cfg.height;
  const double phase0 = uphase(rng);
  const double phase1 = uphase(rng);
  for (int t = 0; t < cfg.frame_count; ++t) {
    RawFrame frame;
    frame.t = t;
    for (int person = 0; person < 2; ++person) {
      const double phase = person == 0 ? phase0 : phase1;
      const double hop =
          std::fabs(std::sin(frame_phase(t, cfg.frame_count, 3.0, phase)));
      const double punch =
          std::sin(frame_phase(t, cfg.frame_count, 4.0, phase));
      const double cx = (person == 0 ? 0.42 : 0.58) * cfg.width;
      const double facing = person == 0 ? 1.0 : -1.0;
      Pose pose = base_pose(cx, cy0 - 14.0 * hop, facing);
      const int wrist = person == 0 ? kRWrist : kLWrist;
      const int elbow = person == 0 ? kRElbow : kLElbow;
      pose.x[wrist] = cx + facing * (30.0 + 22.0 * punch) + flail(rng);
      pose.y[wrist] = cy0 - 30.0 + flail(rng);
      pose.x[elbow] += facing * 10.0 * punch + flail(rng);
      pose.y[elbow] += flail(rng);
      pose.y[kLKnee] -= 10.0 * hop;
      pose.y[kRKnee] -= 10.0 * hop;
      frame.persons.push_back(finish_person(person, pose, cfg, rng));
    }
    clip.frames.push_back(std::move(frame));
  }
}

RawClip make_clip(const std::string& label, std::size_t index,
                  const ToyConfig& cfg) {
  char id[64];
  std::snprintf(id, sizeof(id), "%s_%03zu", label.c_str(), index);
  RawClip clip;
  clip.video_id = id;
  clip.width = cfg.width;
  clip.height = cfg.height;
  clip.fps = cfg.fps;
  clip.frame_count = cfg.frame_count;
  clip.label = label;
  std::mt19937_64 rng(mix_seed(cfg.seed, clip.video_id));
  if (label == "walk")
    make_walk(clip, cfg, rng);
  else if (label == "wave")
    make_wave(clip, cfg, rng);
  else if (label == "handshake")
    make_handshake(clip, cfg, rng);
  else if (label == "fight")
    make_fight(clip, cfg, rng);
  else
    throw std::logic_error("unknown toy class: " + label);
  data::validate_clip(clip, kJointCount);
  return clip;
}

}  // namespace

std::vector<RawClip> gen_toy_dataset(const ToyConfig& cfg) {
  cfg.validate();
  std::vector<RawClip> clips;
  clips.reserve(toy_classes().size() * cfg.clips_per_class);
  for (const auto& label : toy_classes())
    for (std::size_t i = 0; i < cfg.clips_per_class; ++i)
      clips.push_back(make_clip(label, i, cfg));
  return clips;
}

}  // namespace skelscore::toy
