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

#ifndef SKELSCORE_TESTS_TESTUTIL_HPP_
#define SKELSCORE_TESTS_TESTUTIL_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "skelscore/tensor.hpp"

namespace testutil {

using skelscore::engine::Tensor2;

inline Tensor2 random_tensor(std::size_t rows, std::size_t cols,
                             std::mt19937_64& rng, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

inline std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng,
                                      double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

/// Naive triple-loop C = A[m x k] * B^T with B[n x k]; independent oracle for
/// the affine kernels.
inline Tensor2 naive_matmul_nt(const Tensor2& a, const Tensor2& b) {
  Tensor2 c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < a.cols(); ++l)
        acc += a.at(i, l) * b.at(j, l);
      c.at(i, j) = acc;
    }
  return c;
}

inline double rel_err(double got, double want) {
  const double denom = std::max({1.0, std::fabs(got), std::fabs(want)});
  return std::fabs(got - want) / denom;
}

/// Central finite differences on one coordinate of a parameter tensor.
inline double central_diff(Tensor2& spot, std::size_t index,
                           const std::function<double()>& eval,
                           double step = 1e-3) {
  const double saved = spot.data()[index];
  spot.data()[index] = saved + step;
  const double up = eval();
  spot.data()[index] = saved - step;
  const double down = eval();
  spot.data()[index] = saved;
  return (up - down) / (2.0 * step);
}

/// Checks every coordinate of `analytic` against a finite-difference probe of
/// `eval` around `spot`. Relative tolerance with denominator
/// max(1, |analytic|, |numeric|).
inline bool gradcheck(Tensor2& spot, const Tensor2& analytic,
                      const std::function<double()>& eval, double tol = 1e-4,
                      double step = 1e-3) {
  for (std::size_t i = 0; i < spot.size(); ++i) {
    const double numeric = central_diff(spot, i, eval, step);
    if (rel_err(analytic.data()[i], numeric) > tol) return false;
  }
  return true;
}

}  // namespace testutil

#endif  // SKELSCORE_TESTS_TESTUTIL_HPP_
