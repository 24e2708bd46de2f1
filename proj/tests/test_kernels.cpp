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
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "skelscore/kernels.hpp"
#include "testutil.hpp"

using skelscore::kernels::Ops;
using skelscore::kernels::avx2_ops;
using skelscore::kernels::avx2_supported;
using skelscore::kernels::scalar_ops;

namespace {

// Sizes straddling the 4-lane vector width, including tails of 1..3.
const std::vector<std::size_t> kSizes = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 67};

}  // namespace

TEST_CASE("scalar dot matches a plain loop") {
  std::mt19937_64 rng(7);
  for (std::size_t n : kSizes) {
    const auto a = testutil::random_vec(n, rng);
    const auto b = testutil::random_vec(n, rng);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i) want += a[i] * b[i];
    CHECK(scalar_ops().dot(a.data(), b.data(), n) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("scalar matmul_nt matches the naive triple loop") {
  std::mt19937_64 rng(11);
  const auto a = testutil::random_tensor(5, 7, rng);
  const auto b = testutil::random_tensor(3, 7, rng);
  const auto want = testutil::naive_matmul_nt(a, b);
  skelscore::engine::Tensor2 got(5, 3);
  scalar_ops().matmul_nt(a.data(), b.data(), got.data(), 5, 7, 3);
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-12));
}

TEST_CASE("matmul variants agree through transposition") {
  std::mt19937_64 rng(13);
  const std::size_t m = 4, k = 6, n = 5;
  const auto a = testutil::random_tensor(m, k, rng);   // A
  const auto b = testutil::random_tensor(k, n, rng);   // B
  skelscore::engine::Tensor2 c_nn(m, n);
  scalar_ops().matmul_nn(a.data(), b.data(), c_nn.data(), m, k, n);

  // Same product via nt with B stored transposed.
  skelscore::engine::Tensor2 bt(n, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) bt.at(j, i) = b.at(i, j);
  skelscore::engine::Tensor2 c_nt(m, n);
  scalar_ops().matmul_nt(a.data(), bt.data(), c_nt.data(), m, k, n);

  // Same product via tn with A stored transposed.
  skelscore::engine::Tensor2 at(k, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) at.at(j, i) = a.at(i, j);
  skelscore::engine::Tensor2 c_tn(m, n);
  scalar_ops().matmul_tn(at.data(), b.data(), c_tn.data(), m, k, n);

  for (std::size_t i = 0; i < c_nn.size(); ++i) {
    CHECK(testutil::rel_err(c_nt.data()[i], c_nn.data()[i]) < 1e-13);
    CHECK(testutil::rel_err(c_tn.data()[i], c_nn.data()[i]) < 1e-13);
  }
}

TEST_CASE("matmuls accumulate instead of overwriting") {
  const double a = 2.0, b = 3.0;
  double c = 10.0;
  scalar_ops().matmul_nt(&a, &b, &c, 1, 1, 1);
  CHECK(c == 16.0);
}

TEST_CASE("relu zeroes negatives and keeps positives bit-identical") {
  const std::vector<double> x = {-1.0, 0.0, 2.5, -0.0, 1e-300, -1e-300};
  std::vector<double> y(x.size());
  scalar_ops().relu(x.data(), y.data(), x.size());
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 2.5);
  CHECK(!std::signbit(y[3]));  // -0.0 input never leaks through
  CHECK(y[4] == 1e-300);
  CHECK(y[5] == 0.0);
}

TEST_CASE("relu_grad only routes gradient where input is strictly positive") {
  const std::vector<double> x = {-1.0, 0.0, 2.0, 3.0};
  const std::vector<double> dy = {10.0, 10.0, 10.0, 10.0};
  std::vector<double> dx = {1.0, 1.0, 1.0, 1.0};
  scalar_ops().relu_grad(x.data(), dy.data(), dx.data(), x.size());
  CHECK(dx == std::vector<double>{1.0, 1.0, 11.0, 11.0});
}

TEST_CASE("colwise_max takes the channel max with lowest-index ties") {
  const std::vector<double> rows = {1.0, 5.0, 2.0,   //
                                    3.0, 2.0, 2.0};  // tie in column 2
  std::vector<double> out(3);
  std::vector<int> arg(3);
  scalar_ops().colwise_max(rows.data(), 2, 3, out.data(), arg.data());
  CHECK(out == std::vector<double>{3.0, 5.0, 2.0});
  CHECK(arg == std::vector<int>{1, 0, 0});
}

TEST_CASE("colwise_max canonicalizes negative zero") {
  const std::vector<double> rows = {-0.0, 0.0};
  std::vector<double> out(1);
  scalar_ops().colwise_max(rows.data(), 2, 1, out.data(), nullptr);
  CHECK(!std::signbit(out[0]));
}

TEST_CASE("avx2 table matches scalar where supported") {
  if (!avx2_supported()) {
    MESSAGE("no avx2 on this host; dispatch equivalence skipped");
    return;
  }
  const Ops& s = scalar_ops();
  const Ops& v = *avx2_ops();
  std::mt19937_64 rng(17);

  SUBCASE("dot, sum, sumsq_centered, axpy") {
    for (std::size_t n : kSizes) {
      const auto a = testutil::random_vec(n, rng);
      const auto b = testutil::random_vec(n, rng);
      CHECK(testutil::rel_err(v.dot(a.data(), b.data(), n),
                              s.dot(a.data(), b.data(), n)) < 1e-13);
      CHECK(testutil::rel_err(v.sum(a.data(), n), s.sum(a.data(), n)) < 1e-13);
      CHECK(testutil::rel_err(v.sumsq_centered(a.data(), n, 0.25),
                              s.sumsq_centered(a.data(), n, 0.25)) < 1e-13);
      auto ys = b;
      auto yv = b;
      s.axpy(0.7, a.data(), ys.data(), n);
      v.axpy(0.7, a.data(), yv.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(testutil::rel_err(yv[i], ys[i]) < 1e-13);
    }
  }

  SUBCASE("matmuls across odd shapes") {
    for (std::size_t m : {1u, 2u, 5u}) {
      for (std::size_t k : {1u, 3u, 17u}) {
        for (std::size_t n : {1u, 4u, 9u}) {
          const auto a = testutil::random_tensor(m, k, rng);
          const auto bt = testutil::random_tensor(n, k, rng);
          const auto bn = testutil::random_tensor(k, n, rng);
          const auto atn = testutil::random_tensor(k, m, rng);
          skelscore::engine::Tensor2 cs(m, n), cv(m, n);
          s.matmul_nt(a.data(), bt.data(), cs.data(), m, k, n);
          v.matmul_nt(a.data(), bt.data(), cv.data(), m, k, n);
          for (std::size_t i = 0; i < cs.size(); ++i)
            CHECK(testutil::rel_err(cv.data()[i], cs.data()[i]) < 1e-13);
          cs.fill(0.0);
          cv.fill(0.0);
          s.matmul_nn(a.data(), bn.data(), cs.data(), m, k, n);
          v.matmul_nn(a.data(), bn.data(), cv.data(), m, k, n);
          for (std::size_t i = 0; i < cs.size(); ++i)
            CHECK(testutil::rel_err(cv.data()[i], cs.data()[i]) < 1e-13);
          cs.fill(0.0);
          cv.fill(0.0);
          s.matmul_tn(atn.data(), bn.data(), cs.data(), m, k, n);
          v.matmul_tn(atn.data(), bn.data(), cv.data(), m, k, n);
          for (std::size_t i = 0; i < cs.size(); ++i)
            CHECK(testutil::rel_err(cv.data()[i], cs.data()[i]) < 1e-13);
        }
      }
    }
  }

  SUBCASE("relu and relu_grad are bitwise identical to scalar") {
    for (std::size_t n : kSizes) {
      auto x = testutil::random_vec(n, rng);
      if (n > 2) x[1] = -0.0;
      const auto dy = testutil::random_vec(n, rng);
      std::vector<double> ys(n), yv(n);
      s.relu(x.data(), ys.data(), n);
      v.relu(x.data(), yv.data(), n);
      CHECK(std::memcmp(ys.data(), yv.data(), n * sizeof(double)) == 0);
      auto ds = testutil::random_vec(n, rng);
      auto dv = ds;
      s.relu_grad(x.data(), dy.data(), ds.data(), n);
      v.relu_grad(x.data(), dy.data(), dv.data(), n);
      CHECK(std::memcmp(ds.data(), dv.data(), n * sizeof(double)) == 0);
    }
  }

  SUBCASE("colwise_max is bitwise identical to scalar, argmax included") {
    for (std::size_t rows : {1u, 2u, 7u}) {
      for (std::size_t cols : kSizes) {
        auto m = testutil::random_tensor(rows, cols, rng);
        m.data()[0] = -0.0;  // exercise sign canonicalization
        std::vector<double> os(cols), ov(cols);
        std::vector<int> ais(cols), aiv(cols);
        s.colwise_max(m.data(), rows, cols, os.data(), ais.data());
        v.colwise_max(m.data(), rows, cols, ov.data(), aiv.data());
        CHECK(std::memcmp(os.data(), ov.data(), cols * sizeof(double)) == 0);
        CHECK(ais == aiv);
      }
    }
  }
}

TEST_CASE("select switches tables and rejects unknown names") {
  namespace k = skelscore::kernels;
  const std::string before{k::active_name()};
  k::select("scalar");
  CHECK(k::active_name() == "scalar");
  CHECK_THROWS_AS(k::select("sse9"), std::runtime_error);
  if (k::avx2_supported()) {
    k::select("avx2");
    CHECK(k::active_name() == "avx2");
  } else {
    CHECK_THROWS_AS(k::select("avx2"), std::runtime_error);
  }
  k::select("auto");
  CHECK(k::active_name() == (k::avx2_supported() ? "avx2" : "scalar"));
  k::select(before);
}
