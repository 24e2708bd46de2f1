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

#include "skelscore/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "skelscore/clip.hpp"
#include "skelscore/fwd_ops.hpp"

namespace skelscore::anomaly {

using nlohmann::json;

void ScoreConfig::validate() const {
  if (!(w1 > 0.0) || !(w2 > 0.0))
    throw std::invalid_argument("score config: w1 and w2 must be positive");
  if ((prompt_w1 && !(*prompt_w1 > 0.0)) || (prompt_w2 && !(*prompt_w2 > 0.0)))
    throw std::invalid_argument(
        "score config: prompt w1/w2 overrides must be positive");
}

namespace {

void factorize(GaussianModel& model) {
  Eigen::MatrixXd shrunk = model.sigma;
  shrunk.diagonal().array() += model.epsilon;
  model.chol.compute(shrunk);
  if (model.chol.info() != Eigen::Success)
    throw std::runtime_error(
        "covariance factorization failed (matrix not positive definite); "
        "increase epsilon");
}

double shaped(double raw, double w1, double w2) {
  return std::min(1.0, w1 * std::pow(raw, 1.0 / w2));
}

}  // namespace

GaussianModel fit_normal(const std::vector<std::vector<double>>& features,
                         double epsilon) {
  if (features.size() < 2)
    throw std::invalid_argument(
        "fit_normal: need at least 2 feature vectors, got " +
        std::to_string(features.size()));
  const std::size_t dim = features[0].size();
  for (const auto& f : features)
    if (f.size() != dim)
      throw std::invalid_argument("fit_normal: inconsistent feature lengths");
  const auto n = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      x(i, static_cast<Eigen::Index>(j)) = features[i][j];
  GaussianModel model;
  model.dim = dim;
  model.epsilon = epsilon;
  model.mu = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mu.transpose();
  model.sigma =
      centered.transpose() * centered / static_cast<double>(n - 1);
  factorize(model);
  return model;
}

GaussianModel from_moments(Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                           double epsilon) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != mu.size())
    throw std::invalid_argument("from_moments: mu/sigma shape mismatch");
  GaussianModel model;
  model.dim = static_cast<std::size_t>(mu.size());
  model.mu = std::move(mu);
  model.sigma = std::move(sigma);
  model.epsilon = epsilon;
  factorize(model);
  return model;
}

double mahalanobis_distance(const GaussianModel& model,
                            const std::vector<double>& x) {
  if (x.size() != model.dim)
    throw std::invalid_argument(
        "mahalanobis: feature length " + std::to_string(x.size()) +
        " does not match model dim " + std::to_string(model.dim));
  Eigen::VectorXd diff(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    diff(static_cast<Eigen::Index>(i)) = x[i] - model.mu(static_cast<Eigen::Index>(i));
  // (sigma + eps I) = L L^T, so d^2 = || L^-1 diff ||^2 via one solve.
  const Eigen::VectorXd half =
      model.chol.matrixL().solve(diff);
  return half.norm();
}

double ood_score(const std::vector<double>& x, const GaussianModel& model,
                 const ScoreConfig& cfg) {
  cfg.validate();
  return shaped(mahalanobis_distance(model, x), cfg.w1, cfg.w2);
}

PromptScore prompt_action_score(const std::vector<double>& x,
                                const text::PromptSet& prompts,
                                const engine::ParamStore& params,
                                const ScoreConfig& cfg) {
  cfg.validate();
  if (prompts.embeddings.empty())
    throw std::invalid_argument("prompt_action_score: empty prompt set");
  const std::vector<double> f = text::project_feature(x, params);
  if (f.size() != prompts.dim)
    throw std::invalid_argument(
        "prompt_action_score: projected dim " + std::to_string(f.size()) +
        " does not match prompt dim " + std::to_string(prompts.dim));
  PromptScore out;
  double best = -2.0;
  for (std::size_t p = 0; p < prompts.embeddings.size(); ++p) {
    const auto& y = prompts.embeddings[p];
    const engine::CosineResult c =
        engine::cosine_forward(f.data(), y.data(), f.size());
    if (c.value > best) {
      best = c.value;
      out.argmax = p;
    }
  }
  out.raw = prompts.mode == text::PromptMode::kAbnormal ? best : 1.0 - best;
  const double w1 = cfg.prompt_w1.value_or(cfg.w1);
  const double w2 = cfg.prompt_w2.value_or(cfg.w2);
  out.score = shaped(std::max(0.0, out.raw), w1, w2);
  return out;
}

AnomalyReportRow joint_anomaly_score(const std::string& video_id,
                                     const std::vector<double>& x,
                                     const GaussianModel& model,
                                     const text::PromptSet& prompts,
                                     const engine::ParamStore& params,
                                     const ScoreConfig& cfg) {
  AnomalyReportRow row;
  row.video_id = video_id;
  row.ood = ood_score(x, model, cfg);
  const PromptScore p = prompt_action_score(x, prompts, params, cfg);
  row.prompt = p.score;
  row.argmax_prompt = p.argmax;
  row.joint = row.ood * row.prompt;
  return row;
}

double ood_only_score(const std::vector<double>& x, const GaussianModel& model,
                      const ScoreConfig& cfg) {
  return ood_score(x, model, cfg);
}

double prompt_only_score(const std::vector<double>& x,
                         const text::PromptSet& prompts,
                         const engine::ParamStore& params,
                         const ScoreConfig& cfg) {
  return prompt_action_score(x, prompts, params, cfg).score;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_to_csv(const std::vector<AnomalyReportRow>& rows) {
  std::ostringstream out;
  out << "video_id,ood,prompt,joint,argmax_prompt\n";
  for (const auto& r : rows)
    out << r.video_id << ',' << fmt_double(r.ood) << ',' << fmt_double(r.prompt)
        << ',' << fmt_double(r.joint) << ',' << r.argmax_prompt << '\n';
  return out.str();
}

std::string report_to_json(const std::vector<AnomalyReportRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"video_id", r.video_id},
                   {"ood", r.ood},
                   {"prompt", r.prompt},
                   {"joint", r.joint},
                   {"argmax_prompt", r.argmax_prompt}});
  return arr.dump(2);
}

void write_report(const std::string& path,
                  const std::vector<AnomalyReportRow>& rows,
                  const std::string& format) {
  std::string body;
  if (format == "csv")
    body = report_to_csv(rows);
  else if (format == "json")
    body = report_to_json(rows) + "\n";
  else
    throw std::invalid_argument("unknown report format '" + format +
                                "' (expected csv or json)");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << body;
}

void save_gaussian(const std::string& path, const GaussianModel& model) {
  json j;
  j["dim"] = model.dim;
  j["epsilon"] = model.epsilon;
  std::vector<double> mu(model.dim);
  for (std::size_t i = 0; i < model.dim; ++i)
    mu[i] = model.mu(static_cast<Eigen::Index>(i));
  j["mu"] = mu;
  json sigma = json::array();
  for (std::size_t r = 0; r < model.dim; ++r) {
    std::vector<double> row(model.dim);
    for (std::size_t c = 0; c < model.dim; ++c)
      row[c] = model.sigma(static_cast<Eigen::Index>(r),
                           static_cast<Eigen::Index>(c));
    sigma.push_back(row);
  }
  j["sigma"] = std::move(sigma);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump() << '\n';
}

GaussianModel load_gaussian(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data::ParseError("cannot open model file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw data::ParseError(path + ": " + e.what());
  }
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    const auto mu = j.at("mu").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<std::vector<double>>>();
    if (mu.size() != dim || sigma.size() != dim)
      throw data::ValidationError(path + ": mu/sigma do not match dim " +
                                  std::to_string(dim));
    Eigen::VectorXd m(static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd s(static_cast<Eigen::Index>(dim),
                      static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      if (sigma[i].size() != dim)
        throw data::ValidationError(path + ": sigma row " + std::to_string(i) +
                                    " has wrong length");
      m(static_cast<Eigen::Index>(i)) = mu[i];
      for (std::size_t c = 0; c < dim; ++c)
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            sigma[i][c];
    }
    return from_moments(std::move(m), std::move(s),
                        j.at("epsilon").get<double>());
  } catch (const json::exception& e) {
    throw data::ParseError(path + ": " + e.what());
  }
}

}  // namespace skelscore::anomaly
