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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "json.hpp"
#include "skelscore/anomaly.hpp"
#include "skelscore/clip.hpp"
#include "testutil.hpp"

using skelscore::data::ParseError;
using skelscore::engine::ParamStore;
using skelscore::engine::Tensor2;
using skelscore::text::PromptMode;
using skelscore::text::PromptSet;
using namespace skelscore::anomaly;

namespace {

/// Gauss-Jordan inverse; the production path never forms an inverse, so this
/// is a genuinely independent oracle.
std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

double oracle_mahalanobis(const GaussianModel& model,
                          const std::vector<double>& x) {
  const std::size_t n = model.dim;
  std::vector<std::vector<double>> shrunk(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      shrunk[r][c] = model.sigma(static_cast<Eigen::Index>(r),
                                 static_cast<Eigen::Index>(c));
      if (r == c) shrunk[r][c] += model.epsilon;
    }
  const auto inv = invert(shrunk);
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i)
    diff[i] = x[i] - model.mu(static_cast<Eigen::Index>(i));
  double q = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) q += diff[r] * inv[r][c] * diff[c];
  return std::sqrt(q);
}

/// Identity projection head for prompt tests: f(x) = relu(x).
ParamStore identity_projection(std::size_t dim) {
  ParamStore store;
  store.create("proj.w1", Tensor2::identity(dim));
  store.create("proj.b1", Tensor2(1, dim));
  store.create("proj.w2", Tensor2::identity(dim));
  store.create("proj.b2", Tensor2(1, dim));
  return store;
}

PromptSet make_prompts(std::vector<std::vector<double>> embeddings,
                       PromptMode mode) {
  PromptSet set;
  set.mode = mode;
  set.dim = embeddings[0].size();
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    set.prompts.push_back("p" + std::to_string(i));
  set.embeddings = std::move(embeddings);
  return set;
}

}  // namespace

TEST_CASE("two-sample fit reproduces hand-computed moments") {
  const auto model = fit_normal({{0.0, 0.0}, {2.0, 0.0}}, 0.5);
  CHECK(model.dim == 2);
  CHECK(model.mu(0) == 1.0);
  CHECK(model.mu(1) == 0.0);
  CHECK(model.sigma(0, 0) == 2.0);  // unbiased: (1+1)/(2-1)
  CHECK(model.sigma(0, 1) == 0.0);
  CHECK(model.sigma(1, 1) == 0.0);

  // Shrunk covariance diag(2.5, 0.5): d((3,1)) = sqrt(4/2.5 + 1/0.5).
  const double want = std::sqrt(4.0 / 2.5 + 2.0);
  CHECK(testutil::rel_err(mahalanobis_distance(model, {3.0, 1.0}), want) <
        1e-12);
  CHECK(mahalanobis_distance(model, {1.0, 0.0}) == 0.0);
}

TEST_CASE("closed-form unit gaussian scores") {
  const auto model = from_moments(Eigen::VectorXd::Zero(2),
                                  Eigen::MatrixXd::Identity(2, 2), 0.0);
  CHECK(std::fabs(mahalanobis_distance(model, {3.0, 4.0}) - 5.0) < 1e-12);

  ScoreConfig cfg;  // w1=0.3, w2=2
  CHECK(std::fabs(ood_score({3.0, 4.0}, model, cfg) - 0.3 * std::sqrt(5.0)) <
        1e-12);
  cfg.w1 = 0.1;
  CHECK(std::fabs(ood_score({3.0, 4.0}, model, cfg) - 0.1 * std::sqrt(5.0)) <
        1e-12);
  cfg.w1 = 1.0;
  cfg.w2 = 1.0;
  CHECK(ood_score({3.0, 4.0}, model, cfg) == 1.0);  // saturated
  CHECK(ood_score({0.0, 0.0}, model, cfg) == 0.0);  // at the mean
}

TEST_CASE("triangular solve matches the explicit-inverse oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8;
    std::vector<std::vector<double>> samples;
    for (int i = 0; i < 20; ++i) samples.push_back(testutil::random_vec(n, rng));
    const auto model = fit_normal(samples, 1e-3);
    for (int probe = 0; probe < 4; ++probe) {
      const auto x = testutil::random_vec(n, rng, -2.0, 2.0);
      const double got = mahalanobis_distance(model, x);
      const double want = oracle_mahalanobis(model, x);
      CHECK(testutil::rel_err(got, want) < 1e-8);
    }
  }
}

TEST_CASE("distance is invariant under rotation of the space") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> samples;
    for (int i = 0; i < 12; ++i) samples.push_back(testutil::random_vec(2, rng));
    const auto x = testutil::random_vec(2, rng, -2.0, 2.0);

    const double th = angle(rng);
    const double c = std::cos(th), s = std::sin(th);
    auto rot = [&](const std::vector<double>& v) {
      return std::vector<double>{c * v[0] - s * v[1], s * v[0] + c * v[1]};
    };
    std::vector<std::vector<double>> rotated;
    for (const auto& v : samples) rotated.push_back(rot(v));

    const auto m1 = fit_normal(samples, 1e-3);
    const auto m2 = fit_normal(rotated, 1e-3);
    CHECK(testutil::rel_err(mahalanobis_distance(m1, x),
                            mahalanobis_distance(m2, rot(x))) < 1e-8);
  }
}

TEST_CASE("fit_normal input validation") {
  CHECK_THROWS_AS(fit_normal({}, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(fit_normal({{1.0, 2.0}}, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(fit_normal({{1.0, 2.0}, {1.0}}, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("degenerate covariance without shrinkage fails with advice") {
  // Collinear samples: rank-1 covariance, singular at epsilon 0.
  try {
    fit_normal({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}}, 0.0);
    FAIL("expected runtime_error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
  }
  // The default shrinkage rescues the same data.
  CHECK_NOTHROW(fit_normal({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}}, 1e-3));
}

TEST_CASE("score grows along an outward ray and saturates at 1") {
  const auto model = from_moments(Eigen::VectorXd::Zero(3),
                                  Eigen::MatrixXd::Identity(3, 3), 0.0);
  ScoreConfig cfg;
  double prev = -1.0;
  for (double r = 0.0; r < 40.0; r += 0.5) {
    const double sc = ood_score({r, 0.0, 0.0}, model, cfg);
    CHECK(sc >= prev);
    CHECK(sc >= 0.0);
    CHECK(sc <= 1.0);
    prev = sc;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("mahalanobis rejects a wrong-length feature") {
  const auto model = from_moments(Eigen::VectorXd::Zero(2),
                                  Eigen::MatrixXd::Identity(2, 2), 0.0);
  CHECK_THROWS_AS(mahalanobis_distance(model, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("prompt scoring against a controlled projection") {
  const auto params = identity_projection(2);
  ScoreConfig cfg;  // w1=0.3, w2=2

  SUBCASE("abnormal mode picks the best prompt") {
    const auto set =
        make_prompts({{0.0, 1.0}, {1.0, 0.0}}, PromptMode::kAbnormal);
    const auto p = prompt_action_score({1.0, 0.0}, set, params, cfg);
    CHECK(std::fabs(p.raw - 1.0) < 1e-12);
    CHECK(p.argmax == 1);
    CHECK(std::fabs(p.score - 0.3) < 1e-12);  // 0.3 * 1^(1/2)
  }
  SUBCASE("normal mode inverts the similarity") {
    const auto set = make_prompts({{1.0, 0.0}}, PromptMode::kNormal);
    const auto match = prompt_action_score({1.0, 0.0}, set, params, cfg);
    CHECK(match.raw == 0.0);
    CHECK(match.score == 0.0);  // perfectly normal

    const auto miss = prompt_action_score({0.0, 1.0}, set, params, cfg);
    CHECK(std::fabs(miss.raw - 1.0) < 1e-12);
    CHECK(std::fabs(miss.score - 0.3) < 1e-12);
  }
  SUBCASE("negative similarity clamps to zero before the root") {
    // relu in the projection kills negative coordinates, so drive the
    // mismatch through the prompt side.
    const auto set = make_prompts({{-1.0, 0.0}}, PromptMode::kAbnormal);
    const auto p = prompt_action_score({1.0, 0.0}, set, params, cfg);
    CHECK(p.raw < 0.0);
    CHECK(p.score == 0.0);
  }
  SUBCASE("prompt override changes only the prompt factor") {
    const auto set = make_prompts({{1.0, 0.0}}, PromptMode::kAbnormal);
    cfg.prompt_w1 = 0.9;
    const auto p = prompt_action_score({1.0, 0.0}, set, params, cfg);
    CHECK(std::fabs(p.score - 0.9) < 1e-12);
  }
  SUBCASE("positive rescaling of embeddings changes nothing") {
    std::mt19937_64 rng(5);
    const auto x = testutil::random_vec(2, rng, 0.1, 1.0);
    auto set = make_prompts({testutil::random_vec(2, rng, 0.1, 1.0),
                             testutil::random_vec(2, rng, 0.1, 1.0)},
                            PromptMode::kAbnormal);
    const auto before = prompt_action_score(x, set, params, cfg);
    for (auto& e : set.embeddings)
      for (auto& v : e) v *= 137.5;
    const auto after = prompt_action_score(x, set, params, cfg);
    CHECK(std::fabs(before.score - after.score) < 1e-12);
    CHECK(before.argmax == after.argmax);
  }
  SUBCASE("empty prompt set is rejected") {
    PromptSet empty;
    empty.dim = 2;
    CHECK_THROWS_AS(prompt_action_score({1.0, 0.0}, empty, params, cfg),
                    std::invalid_argument);
  }
  SUBCASE("dim mismatch is rejected") {
    const auto set = make_prompts({{1.0, 0.0, 0.0}}, PromptMode::kAbnormal);
    CHECK_THROWS_AS(prompt_action_score({1.0, 0.0}, set, params, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("joint score is exactly the product of its factors") {
  const auto params = identity_projection(2);
  const auto model = from_moments(Eigen::VectorXd::Zero(2),
                                  Eigen::MatrixXd::Identity(2, 2), 0.0);
  const auto set =
      make_prompts({{0.4, 0.6}, {0.9, 0.1}}, PromptMode::kAbnormal);
  ScoreConfig cfg;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto x = testutil::random_vec(2, rng, 0.0, 3.0);
    const auto row = joint_anomaly_score("v", x, model, set, params, cfg);
    CHECK(row.joint == row.ood * row.prompt);  // exact, not approximate
    CHECK(row.ood >= 0.0);
    CHECK(row.ood <= 1.0);
    CHECK(row.prompt >= 0.0);
    CHECK(row.prompt <= 1.0);
    CHECK(row.joint >= 0.0);
    CHECK(row.joint <= 1.0);
    CHECK(row.ood == ood_only_score(x, model, cfg));
    CHECK(row.prompt == prompt_only_score(x, set, params, cfg));
  }
}

TEST_CASE("report serialization") {
  std::vector<AnomalyReportRow> rows{{"vid_1", 0.5, 0.25, 0.125, 1},
                                     {"vid_2", 1.0, 0.0, 0.0, 0}};

  SUBCASE("csv carries the exact header and row order") {
    const auto csv = report_to_csv(rows);
    CHECK(csv.find("video_id,ood,prompt,joint,argmax_prompt\n") == 0);
    CHECK(csv.find("vid_1,0.5,0.25,0.125,1") != std::string::npos);
    CHECK(csv.find("vid_2,1,0,0,0") != std::string::npos);
  }
  SUBCASE("json parses back with identical values") {
    const auto parsed = nlohmann::json::parse(report_to_json(rows));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0]["video_id"] == "vid_1");
    CHECK(parsed[0]["joint"].get<double>() == 0.125);
    CHECK(parsed[1]["argmax_prompt"].get<std::size_t>() == 0);
  }
  SUBCASE("write_report dispatches on format and rejects others") {
    write_report("/tmp/skelscore_test_report.csv", rows, "csv");
    std::ifstream in("/tmp/skelscore_test_report.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "video_id,ood,prompt,joint,argmax_prompt");
    CHECK_THROWS_AS(write_report("/tmp/x.bin", rows, "xml"),
                    std::invalid_argument);
  }
}

TEST_CASE("gaussian files round trip bit-exactly") {
  std::mt19937_64 rng(7);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 9; ++i) samples.push_back(testutil::random_vec(4, rng));
  const auto model = fit_normal(samples, 2e-3);
  const std::string path = "/tmp/skelscore_test_gaussian.json";
  save_gaussian(path, model);
  const auto loaded = load_gaussian(path);
  CHECK(loaded.dim == model.dim);
  CHECK(loaded.epsilon == model.epsilon);
  for (int r = 0; r < 4; ++r) {
    CHECK(loaded.mu(r) == model.mu(r));
    for (int c = 0; c < 4; ++c) CHECK(loaded.sigma(r, c) == model.sigma(r, c));
  }
  // The reloaded factorization scores identically.
  const auto x = testutil::random_vec(4, rng);
  CHECK(mahalanobis_distance(loaded, x) == mahalanobis_distance(model, x));
}

TEST_CASE("gaussian file errors") {
  CHECK_THROWS_AS(load_gaussian("/tmp/skelscore_no_gaussian.json"),
                  ParseError);
  const std::string path = "/tmp/skelscore_test_badgaussian.json";
  std::ofstream(path) << "{}";
  CHECK_THROWS(load_gaussian(path));
}

TEST_CASE("score config validation") {
  ScoreConfig cfg;
  cfg.w1 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.w1 = 0.3;
  cfg.prompt_w2 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
