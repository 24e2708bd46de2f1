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

#include "skelscore/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "skelscore/rng.hpp"

namespace skelscore::corrupt {

using data::RawClip;

void CorruptionSpec::validate() const {
  if (error_ratio < 0.0 || error_ratio > 1.0)
    throw std::invalid_argument("corruption: error ratio must be in [0,1]");
  if (fp_sigma && *fp_sigma < 0.0)
    throw std::invalid_argument("corruption: fp_sigma must be >= 0");
  if (track_swap_period < 1)
    throw std::invalid_argument("corruption: swap period must be >= 1");
}

double CorruptionSpec::sigma_for(const RawClip& clip) const {
  if (fp_sigma) return *fp_sigma;
  return 0.05 * std::hypot(static_cast<double>(clip.width),
                           static_cast<double>(clip.height));
}

namespace {

std::size_t total_joints(const RawClip& clip) {
  std::size_t n = 0;
  for (const auto& f : clip.frames)
    for (const auto& p : f.persons) n += p.joints.size();
  return n;
}

/// Visits joints in the flat index order documented on SelectionLog.
template <typename Fn>
void for_flat_joints(RawClip& clip, Fn&& fn) {
  std::size_t idx = 0;
  for (auto& f : clip.frames)
    for (auto& p : f.persons)
      for (auto& j : p.joints) fn(idx++, j);
}

/// First fp_count shuffled flat indices become FPs, the next fn_count FNs.
/// Both lists come back sorted so noise draws follow a fixed order.
void draw_selections(std::size_t j_total, std::size_t fp_count,
                     std::size_t fn_count, std::mt19937_64& rng,
                     std::vector<std::size_t>* fp,
                     std::vector<std::size_t>* fn) {
  if (fp_count + fn_count == 0) return;  // keep the stream untouched
  std::vector<std::size_t> order(j_total);
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order, rng);
  fp->assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fp_count));
  fn->assign(order.begin() + static_cast<std::ptrdiff_t>(fp_count),
             order.begin() + static_cast<std::ptrdiff_t>(fp_count + fn_count));
  std::sort(fp->begin(), fp->end());
  std::sort(fn->begin(), fn->end());
}

void apply_fp(RawClip& clip, const std::vector<std::size_t>& fp, double sigma,
              std::mt19937_64& rng) {
  if (fp.empty()) return;
  std::set<std::size_t> targets(fp.begin(), fp.end());
  std::normal_distribution<double> noise(0.0, sigma);
  const double w = clip.width;
  const double h = clip.height;
  for_flat_joints(clip, [&](std::size_t idx, data::RawJoint& j) {
    if (!targets.count(idx)) return;
    if (sigma > 0.0) {
      j.x = std::clamp(j.x + noise(rng), 0.0, w);
      j.y = std::clamp(j.y + noise(rng), 0.0, h);
    }
  });
}

void apply_fn(RawClip& clip, const std::vector<std::size_t>& fn) {
  if (fn.empty()) return;
  std::set<std::size_t> targets(fn.begin(), fn.end());
  for_flat_joints(clip, [&](std::size_t idx, data::RawJoint& j) {
    if (!targets.count(idx)) return;
    j.x = 0.0;
    j.y = 0.0;
    j.c = 0.0;
  });
}

bool has_copresence(const RawClip& clip) {
  for (const auto& f : clip.frames)
    if (f.persons.size() >= 2) return true;
  return false;
}

void apply_tracking(RawClip& clip, const CorruptionSpec& spec,
                    std::mt19937_64& rng, std::vector<int>* swap_frames) {
  const int period = spec.track_swap_period;
  for (int start = period; start < clip.frame_count; start += period) {
    const int stop = std::min(clip.frame_count, start + period);
    std::set<int> ids;
    for (const auto& f : clip.frames)
      if (f.t >= start && f.t < stop)
        for (const auto& p : f.persons) ids.insert(p.track_id);
    if (ids.size() < 2) continue;
    std::vector<int> from(ids.begin(), ids.end());
    std::vector<int> to = from;
    deterministic_shuffle(to, rng);
    if (swap_frames != nullptr) swap_frames->push_back(start);
    for (auto& f : clip.frames) {
      if (f.t < start || f.t >= stop) continue;
      for (auto& p : f.persons) {
        const auto at = std::lower_bound(from.begin(), from.end(), p.track_id);
        p.track_id = to[static_cast<std::size_t>(at - from.begin())];
      }
    }
  }
}

std::size_t rounded_count(double ratio, std::size_t j_total) {
  return static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(j_total)));
}

RawClip run(const RawClip& clip, const CorruptionSpec& spec, bool want_fp,
            bool want_fn, bool want_track, SelectionLog* log, bool* warned) {
  spec.validate();
  if (warned != nullptr) *warned = false;
  RawClip out = clip;
  std::mt19937_64 rng(mix_seed(spec.seed, clip.video_id));
  const std::size_t j_total = total_joints(clip);
  const std::size_t m = rounded_count(spec.error_ratio, j_total);
  // FN draws stay disjoint from FPs, so at most j_total - m remain for them.
  const std::size_t fp_count = want_fp ? m : 0;
  const std::size_t fn_count = want_fn ? std::min(m, j_total - fp_count) : 0;
  std::vector<std::size_t> fp, fn;
  draw_selections(j_total, fp_count, fn_count, rng, &fp, &fn);
  if (want_fp) apply_fp(out, fp, spec.sigma_for(clip), rng);
  if (want_fn) apply_fn(out, fn);
  std::vector<int> swap_frames;
  if (want_track) {
    if (has_copresence(out)) {
      apply_tracking(out, spec, rng, &swap_frames);
    } else if (warned != nullptr) {
      *warned = true;
    }
  }
  if (log != nullptr) {
    log->clip_id = clip.video_id;
    log->fp_indices = std::move(fp);
    log->fn_indices = std::move(fn);
    log->swap_frames = std::move(swap_frames);
  }
  return out;
}

}  // namespace

RawClip inject_false_positives(const RawClip& clip, const CorruptionSpec& spec,
                               SelectionLog* log) {
  return run(clip, spec, true, false, false, log, nullptr);
}

RawClip inject_false_negatives(const RawClip& clip, const CorruptionSpec& spec,
                               SelectionLog* log) {
  return run(clip, spec, false, true, false, log, nullptr);
}

RawClip inject_tracking_errors(const RawClip& clip, const CorruptionSpec& spec,
                               SelectionLog* log, bool* warned) {
  return run(clip, spec, false, false, true, log, warned);
}

RawClip corrupt_clip(const RawClip& clip, const CorruptionSpec& spec,
                     SelectionLog* log) {
  return run(clip, spec, true, true, true, log, nullptr);
}

std::string selection_log_to_json(const std::vector<SelectionLog>& logs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& log : logs)
    arr.push_back({{"clip_id", log.clip_id},
                   {"fp_indices", log.fp_indices},
                   {"fn_indices", log.fn_indices},
                   {"swap_frames", log.swap_frames}});
  return arr.dump(2);
}

void write_selection_log(const std::string& path,
                         const std::vector<SelectionLog>& logs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write selection log: " + path);
  out << selection_log_to_json(logs) << '\n';
}

}  // namespace skelscore::corrupt
