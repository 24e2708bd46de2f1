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

#ifndef SKELSCORE_ANOMALY_HPP_
#define SKELSCORE_ANOMALY_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skelscore/tape.hpp"
#include "skelscore/text_alignment.hpp"

namespace skelscore::anomaly {

/// Mean and covariance of normal-sample features, with the Cholesky factor of
/// the shrunk covariance (sigma + epsilon I) cached for distance evaluation
/// by triangular solve. No explicit inverse anywhere.
struct GaussianModel {
  std::size_t dim = 0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;  // unbiased sample covariance, without shrinkage
  double epsilon = 1e-3;
  Eigen::LLT<Eigen::MatrixXd> chol;  // factor of sigma + epsilon I
};

/// Score shaping min(1, w1 * d^(1/w2)). The optional prompt pair overrides
/// (w1, w2) for the prompt factor only.
struct ScoreConfig {
  double w1 = 0.3;
  double w2 = 2.0;
  std::optional<double> prompt_w1;
  std::optional<double> prompt_w2;

  void validate() const;
};

/// Mean + unbiased covariance over >= 2 feature vectors, then factorization.
/// Throws when fewer than 2 samples are given or when sigma + epsilon I is
/// not positive definite (the message advises a larger epsilon).
GaussianModel fit_normal(const std::vector<std::vector<double>>& features,
                         double epsilon);

/// Builds a model from explicit moments (deterministic IO / test path).
GaussianModel from_moments(Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                           double epsilon);

double mahalanobis_distance(const GaussianModel& model,
                            const std::vector<double>& x);

/// min(1, w1 * d^(1/w2)) with d the Mahalanobis distance to the model.
double ood_score(const std::vector<double>& x, const GaussianModel& model,
                 const ScoreConfig& cfg);

struct PromptScore {
  double score = 0.0;   // shaped into [0,1]
  double raw = 0.0;     // max cosine (abnormal) or 1 - max cosine (normal)
  std::size_t argmax = 0;  // prompt index of the max similarity
};

/// Projects x into the text space and scores it against every prompt:
/// raw = max_p Cos(f(x), y_p) in abnormal mode, 1 - that max in normal mode;
/// score = min(1, w1 * max(0, raw)^(1/w2)).
PromptScore prompt_action_score(const std::vector<double>& x,
                                const text::PromptSet& prompts,
                                const engine::ParamStore& params,
                                const ScoreConfig& cfg);

struct AnomalyReportRow {
  std::string video_id;
  double ood = 0.0;
  double prompt = 0.0;
  double joint = 0.0;  // always exactly ood * prompt
  std::size_t argmax_prompt = 0;
};

AnomalyReportRow joint_anomaly_score(const std::string& video_id,
                                     const std::vector<double>& x,
                                     const GaussianModel& model,
                                     const text::PromptSet& prompts,
                                     const engine::ParamStore& params,
                                     const ScoreConfig& cfg);

/// Ablation accessors: each factor standalone.
double ood_only_score(const std::vector<double>& x, const GaussianModel& model,
                      const ScoreConfig& cfg);
double prompt_only_score(const std::vector<double>& x,
                         const text::PromptSet& prompts,
                         const engine::ParamStore& params,
                         const ScoreConfig& cfg);

std::string report_to_csv(const std::vector<AnomalyReportRow>& rows);
std::string report_to_json(const std::vector<AnomalyReportRow>& rows);
void write_report(const std::string& path,
                  const std::vector<AnomalyReportRow>& rows,
                  const std::string& format);  // "csv" or "json"

void save_gaussian(const std::string& path, const GaussianModel& model);
GaussianModel load_gaussian(const std::string& path);

}  // namespace skelscore::anomaly

#endif  // SKELSCORE_ANOMALY_HPP_
