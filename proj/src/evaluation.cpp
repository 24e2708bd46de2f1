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

#include "skelscore/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace skelscore::eval {

namespace {

void check_scores(const std::vector<LabeledScore>& scores) {
  for (const auto& s : scores) {
    if (!std::isfinite(s.score) || s.score < 0.0 || s.score > 1.0)
      throw std::invalid_argument("metric input: score for '" + s.video_id +
                                  "' is outside [0,1]");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double roc_auc(const std::vector<LabeledScore>& scores) {
  check_scores(scores);
  std::vector<double> normal, abnormal;
  for (const auto& s : scores)
    (s.truth == Truth::kAbnormal ? abnormal : normal).push_back(s.score);
  if (normal.empty() || abnormal.empty())
    throw std::invalid_argument(
        "roc_auc: needs at least one normal and one abnormal score");
  // Pair counting is exact and auditable against the definition; the O(n^2)
  // cost is immaterial at harness scale.
  double wins = 0.0;
  for (double a : abnormal)
    for (double n : normal) {
      if (a > n)
        wins += 1.0;
      else if (a == n)
        wins += 0.5;
    }
  return wins / (static_cast<double>(abnormal.size()) *
                 static_cast<double>(normal.size()));
}

double binary_accuracy(const std::vector<LabeledScore>& scores,
                       double threshold) {
  check_scores(scores);
  if (scores.empty())
    throw std::invalid_argument("binary_accuracy: empty score list");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("binary_accuracy: threshold must be in [0,1]");
  std::size_t correct = 0;
  for (const auto& s : scores) {
    const bool predicted_abnormal = s.score >= threshold;
    if (predicted_abnormal == (s.truth == Truth::kAbnormal)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

ThresholdSweep best_threshold(const std::vector<LabeledScore>& scores) {
  std::set<double> candidates{0.0, 1.0};
  for (const auto& s : scores) candidates.insert(s.score);
  ThresholdSweep best{0.0, -1.0};
  for (double t : candidates) {
    const double acc = binary_accuracy(scores, t);
    if (acc > best.accuracy) best = {t, acc};
  }
  return best;
}

ScoreKind score_kind_from_name(std::string_view name) {
  if (name == "ood") return ScoreKind::kOod;
  if (name == "prompt") return ScoreKind::kPrompt;
  if (name == "joint") return ScoreKind::kJoint;
  throw std::invalid_argument("unknown score kind '" + std::string(name) +
                              "' (expected ood, prompt, or joint)");
}

const char* score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kOod: return "ood";
    case ScoreKind::kPrompt: return "prompt";
    case ScoreKind::kJoint: return "joint";
  }
  return "?";
}

double clip_anomaly_score(const train::Checkpoint& ckpt,
                          const anomaly::GaussianModel& model,
                          const text::PromptSet& prompts,
                          const anomaly::ScoreConfig& cfg, ScoreKind kind,
                          const data::RawClip& clip) {
  const auto x = train::encode_clip_with(ckpt, clip);
  switch (kind) {
    case ScoreKind::kOod:
      return anomaly::ood_only_score(x, model, cfg);
    case ScoreKind::kPrompt:
      return anomaly::prompt_only_score(x, prompts, ckpt.params, cfg);
    case ScoreKind::kJoint:
      return anomaly::joint_anomaly_score(clip.video_id, x, model, prompts,
                                          ckpt.params, cfg)
          .joint;
  }
  throw std::logic_error("unreachable score kind");
}

std::vector<LabeledScore> score_clips(const train::Checkpoint& ckpt,
                                      const anomaly::GaussianModel& model,
                                      const text::PromptSet& prompts,
                                      const anomaly::ScoreConfig& cfg,
                                      ScoreKind kind,
                                      const std::vector<data::RawClip>& clips,
                                      const std::vector<Truth>& truths) {
  if (clips.size() != truths.size())
    throw std::invalid_argument("score_clips: clip and truth counts differ");
  std::vector<LabeledScore> out;
  out.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i)
    out.push_back({clips[i].video_id,
                   clip_anomaly_score(ckpt, model, prompts, cfg, kind,
                                      clips[i]),
                   truths[i]});
  return out;
}

std::vector<RobustnessRow> robustness_curve(
    const train::Checkpoint& ckpt, const anomaly::GaussianModel& model,
    const text::PromptSet& prompts, const anomaly::ScoreConfig& cfg,
    ScoreKind kind, const std::vector<data::RawClip>& clips,
    const std::vector<Truth>& truths, const std::vector<double>& ratios,
    const corrupt::CorruptionSpec& base_spec) {
  std::vector<RobustnessRow> rows;
  rows.reserve(ratios.size());
  for (double ratio : ratios) {
    if (ratio < 0.0 || ratio > 1.0)
      throw std::invalid_argument("robustness_curve: ratio outside [0,1]");
    std::vector<LabeledScore> scored;
    if (ratio == 0.0) {
      scored = score_clips(ckpt, model, prompts, cfg, kind, clips, truths);
    } else {
      corrupt::CorruptionSpec spec = base_spec;
      spec.error_ratio = ratio;
      std::vector<data::RawClip> hit;
      hit.reserve(clips.size());
      for (const auto& c : clips) hit.push_back(corrupt::corrupt_clip(c, spec));
      scored = score_clips(ckpt, model, prompts, cfg, kind, hit, truths);
    }
    rows.push_back({ratio, roc_auc(scored)});
  }
  return rows;
}

std::string robustness_to_csv(const std::vector<RobustnessRow>& rows) {
  std::ostringstream out;
  out << "ratio,auc\n";
  for (const auto& r : rows)
    out << format_double(r.ratio) << ',' << format_double(r.auc) << '\n';
  return out.str();
}

DomainShiftResult domain_shift_eval(
    const train::Checkpoint& ckpt, const text::PromptSet& prompts,
    const anomaly::ScoreConfig& cfg, ScoreKind kind, double epsilon,
    const std::vector<data::RawClip>& fit_clips, int n_subsets,
    std::uint64_t seed, const std::vector<data::RawClip>& eval_clips,
    const std::vector<Truth>& eval_truths) {
  if (n_subsets < 2)
    throw std::invalid_argument("domain_shift_eval: n_subsets must be >= 2");
  const auto subsets = data::split_subsets(
      fit_clips, static_cast<std::size_t>(n_subsets), seed);
  DomainShiftResult result;
  for (const auto& subset : subsets) {
    if (subset.size() < 2)
      throw std::invalid_argument(
          "domain_shift_eval: a subset has fewer than 2 clips; use fewer "
          "subsets or more data");
    std::vector<std::vector<double>> features;
    features.reserve(subset.size());
    for (const auto& c : subset)
      features.push_back(train::encode_clip_with(ckpt, c));
    const auto model = anomaly::fit_normal(features, epsilon);
    const auto scored =
        score_clips(ckpt, model, prompts, cfg, kind, eval_clips, eval_truths);
    result.per_subset.push_back(roc_auc(scored));
  }
  const double n = static_cast<double>(result.per_subset.size());
  double sum = 0.0;
  for (double v : result.per_subset) sum += v;
  result.mean = sum / n;
  double sq = 0.0;
  for (double v : result.per_subset)
    sq += (v - result.mean) * (v - result.mean);
  result.variance = sq / n;
  return result;
}

std::string domain_shift_to_csv(const DomainShiftResult& result) {
  std::ostringstream out;
  out << "subset,auc\n";
  for (std::size_t i = 0; i < result.per_subset.size(); ++i)
    out << i << ',' << format_double(result.per_subset[i]) << '\n';
  out << "mean," << format_double(result.mean) << '\n';
  out << "variance," << format_double(result.variance) << '\n';
  return out.str();
}

void dump_features(const train::Checkpoint& ckpt,
                   const std::vector<data::RawClip>& clips,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write features: " + path);
  const std::size_t dim = ckpt.extractor.feature_dim();
  out << "video_id";
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << ",label\n";
  for (const auto& clip : clips) {
    const auto x = train::encode_clip_with(ckpt, clip);
    out << clip.video_id;
    for (double v : x) out << ',' << format_double(v);
    out << ',' << (clip.label ? *clip.label : "") << '\n';
  }
}

}  // namespace skelscore::eval
