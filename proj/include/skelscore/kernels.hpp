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

#ifndef SKELSCORE_KERNELS_HPP_
#define SKELSCORE_KERNELS_HPP_

#include <cstddef>
#include <string_view>

namespace skelscore::kernels {

/// Dense double-precision primitives behind the tensor ops.
///
/// Every entry has a scalar reference implementation; SIMD variants are
/// selected at runtime (see select()) and are equivalence-tested against the
/// scalar table. matmul_*, axpy and relu_grad accumulate into the output;
/// callers zero the destination when they want an overwrite.
struct Ops {
  const char* name;

  /// C[m x n] += A * B^T with A [m x k], B [n x k], all row-major.
  /// Each output element is an independent dot product over k, so a row of C
  /// depends only on the matching row of A.
  void (*matmul_nt)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);

  /// C[m x n] += A * B with A [m x k], B [k x n].
  void (*matmul_nn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);

  /// C[m x n] += A^T * B with A [k x m], B [k x n].
  void (*matmul_tn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  double (*sum)(const double* x, std::size_t n);

  /// sum of (x[i] - center)^2
  double (*sumsq_centered)(const double* x, std::size_t n, double center);

  /// y[i] = x[i] > 0 ? x[i] : +0.0
  void (*relu)(const double* x, double* y, std::size_t n);

  /// dx[i] += dy[i] where x[i] > 0; dx bits untouched elsewhere.
  void (*relu_grad)(const double* x, const double* dy, double* dx,
                    std::size_t n);

  /// Channel-wise max over nrows rows of length ncols. Ties keep the lowest
  /// row index. The stored max is canonicalized with +0.0 so -0.0 never
  /// leaks into pooled outputs. argmax may be null.
  void (*colwise_max)(const double* rows, std::size_t nrows, std::size_t ncols,
                      double* out, int* argmax);
};

const Ops& scalar_ops();

/// nullptr when the build or the CPU lacks AVX2.
const Ops* avx2_ops();

bool avx2_supported();

/// Active table. Defaults to the best variant the CPU supports; the
/// SKELSCORE_KERNELS environment variable ("scalar" or "avx2") overrides the
/// initial choice.
const Ops& active();

/// Force a table: "auto", "scalar" or "avx2". Throws if unavailable.
void select(std::string_view name);

std::string_view active_name();

}  // namespace skelscore::kernels

#endif  // SKELSCORE_KERNELS_HPP_
