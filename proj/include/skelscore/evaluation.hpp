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

#ifndef SKELSCORE_EVALUATION_HPP_
#define SKELSCORE_EVALUATION_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "skelscore/anomaly.hpp"
#include "skelscore/clip.hpp"
#include "skelscore/corruption.hpp"
#include "skelscore/pretrainer.hpp"
#include "skelscore/text_alignment.hpp"

namespace skelscore::eval {

enum class Truth { kNormal, kAbnormal };

struct LabeledScore {
  std::string video_id;
  double score = 0.0;  // finite, in [0,1]
  Truth truth = Truth::kNormal;
};

/// Probability that a random abnormal outscores a random normal, ties worth
/// half (the Mann-Whitney statistic). Needs at least one of each class and
/// finite scores in [0,1].
double roc_auc(const std::vector<LabeledScore>& scores);

/// Fraction classified correctly with score >= threshold meaning abnormal.
/// threshold must be in [0,1]; empty input is an error.
double binary_accuracy(const std::vector<LabeledScore>& scores,
                       double threshold);

struct ThresholdSweep {
  double threshold = 0.5;
  double accuracy = 0.0;
};

/// Exhaustive sweep over the observed scores (plus the 0 and 1 endpoints);
/// returns the best threshold, lowest threshold winning ties.
ThresholdSweep best_threshold(const std::vector<LabeledScore>& scores);

/// Which factor of the anomaly score drives a metric: the Gaussian factor,
/// the prompt factor, or their product.
enum class ScoreKind { kOod, kPrompt, kJoint };
ScoreKind score_kind_from_name(std::string_view name);
const char* score_kind_name(ScoreKind kind);

/// End-to-end score of one clip with frozen weights. kOod ignores prompts;
/// the other kinds require a non-empty prompt set.
double clip_anomaly_score(const train::Checkpoint& ckpt,
                          const anomaly::GaussianModel& model,
                          const text::PromptSet& prompts,
                          const anomaly::ScoreConfig& cfg, ScoreKind kind,
                          const data::RawClip& clip);

std::vector<LabeledScore> score_clips(const train::Checkpoint& ckpt,
                                      const anomaly::GaussianModel& model,
                                      const text::PromptSet& prompts,
                                      const anomaly::ScoreConfig& cfg,
                                      ScoreKind kind,
                                      const std::vector<data::RawClip>& clips,
                                      const std::vector<Truth>& truths);

struct RobustnessRow {
  double ratio = 0.0;
  double auc = 0.0;
};

/// ROC-AUC after corrupting every clip at each ratio with a fixed seed.
/// Ratio 0 skips corruption entirely, so that row is bit-identical to the
/// clean pipeline.
std::vector<RobustnessRow> robustness_curve(
    const train::Checkpoint& ckpt, const anomaly::GaussianModel& model,
    const text::PromptSet& prompts, const anomaly::ScoreConfig& cfg,
    ScoreKind kind, const std::vector<data::RawClip>& clips,
    const std::vector<Truth>& truths, const std::vector<double>& ratios,
    const corrupt::CorruptionSpec& base_spec);

std::string robustness_to_csv(const std::vector<RobustnessRow>& rows);

struct DomainShiftResult {
  std::vector<double> per_subset;  // metric per disjoint fit subset
  double mean = 0.0;
  double variance = 0.0;  // population variance across subsets
};

/// Splits fit_clips into n_subsets disjoint groups, fits one Gaussian per
/// group, and evaluates each on the same held-out eval set. A subset with
/// fewer than 2 clips cannot be fit and is an error.
DomainShiftResult domain_shift_eval(
    const train::Checkpoint& ckpt, const text::PromptSet& prompts,
    const anomaly::ScoreConfig& cfg, ScoreKind kind, double epsilon,
    const std::vector<data::RawClip>& fit_clips, int n_subsets,
    std::uint64_t seed, const std::vector<data::RawClip>& eval_clips,
    const std::vector<Truth>& eval_truths);

std::string domain_shift_to_csv(const DomainShiftResult& result);

/// CSV of video_id, S feature columns, label (empty when unlabeled).
/// Features come from the frozen checkpoint; rows follow clip order.
void dump_features(const train::Checkpoint& ckpt,
                   const std::vector<data::RawClip>& clips,
                   const std::string& path);

}  // namespace skelscore::eval

#endif  // SKELSCORE_EVALUATION_HPP_
