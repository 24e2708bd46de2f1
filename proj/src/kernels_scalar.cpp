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

#include "skelscore/kernels.hpp"

namespace skelscore::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_centered_scalar(const double* x, std::size_t n, double center) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - center;
    acc += d * d;
  }
  return acc;
}

void matmul_nt_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] += dot_scalar(a + i * k, b + j * k, k);
}

void matmul_nn_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      axpy_scalar(a[i * k + p], b + p * n, c + i * n, n);
}

void matmul_tn_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i)
      axpy_scalar(a[p * m + i], b + p * n, c + i * n, n);
}

void relu_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_scalar(const double* x, const double* dy, double* dx,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void colwise_max_scalar(const double* rows, std::size_t nrows,
                        std::size_t ncols, double* out, int* argmax) {
  for (std::size_t j = 0; j < ncols; ++j) {
    out[j] = rows[j];
    if (argmax) argmax[j] = 0;
  }
  for (std::size_t r = 1; r < nrows; ++r) {
    const double* row = rows + r * ncols;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (row[j] > out[j]) {
        out[j] = row[j];
        if (argmax) argmax[j] = static_cast<int>(r);
      }
    }
  }
  for (std::size_t j = 0; j < ncols; ++j) out[j] += 0.0;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      matmul_nt_scalar,
      matmul_nn_scalar,
      matmul_tn_scalar,
      dot_scalar,
      axpy_scalar,
      sum_scalar,
      sumsq_centered_scalar,
      relu_scalar,
      relu_grad_scalar,
      colwise_max_scalar,
  };
  return table;
}

}  // namespace skelscore::kernels
