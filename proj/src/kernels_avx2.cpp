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

// AVX2/FMA variants of the kernel table. This translation unit is compiled
// with -mavx2 -mfma; the dispatcher only hands out this table after a
// runtime CPU check.

#include "skelscore/kernels.hpp"

#if defined(SKELSCORE_COMPILE_AVX2)

#include <immintrin.h>

namespace skelscore::kernels {
namespace {

// Lane reduction with a fixed association: (v0+v2) + (v1+v3).
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_hadd_pd(s, s));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sumsq_centered_avx2(const double* x, std::size_t n, double center) {
  const __m256d vc = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    r += d * d;
  }
  return r;
}

void matmul_nt_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] += dot_avx2(a + i * k, b + j * k, k);
}

void matmul_nn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      axpy_avx2(a[i * k + p], b + p * n, c + i * n, n);
}

void matmul_tn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i)
      axpy_avx2(a[p * m + i], b + p * n, c + i * n, n);
}

void relu_avx2(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(y + i, _mm256_and_pd(v, mask));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_avx2(const double* x, const double* dy, double* dx,
                    std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vdx = _mm256_loadu_pd(dx + i);
    __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
    __m256d added = _mm256_add_pd(vdx, _mm256_loadu_pd(dy + i));
    // Blend keeps the untouched lanes bit-identical to the scalar path.
    _mm256_storeu_pd(dx + i, _mm256_blendv_pd(vdx, added, mask));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void colwise_max_avx2(const double* rows, std::size_t nrows, std::size_t ncols,
                      double* out, int* argmax) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= ncols; j += 4) {
    __m256d best = _mm256_loadu_pd(rows + j);
    __m256d best_idx = _mm256_setzero_pd();
    for (std::size_t r = 1; r < nrows; ++r) {
      __m256d v = _mm256_loadu_pd(rows + r * ncols + j);
      __m256d gt = _mm256_cmp_pd(v, best, _CMP_GT_OQ);
      best = _mm256_blendv_pd(best, v, gt);
      best_idx = _mm256_blendv_pd(best_idx, _mm256_set1_pd(double(r)), gt);
    }
    _mm256_storeu_pd(out + j, _mm256_add_pd(best, zero));
    if (argmax) {
      double idx[4];
      _mm256_storeu_pd(idx, best_idx);
      for (int l = 0; l < 4; ++l) argmax[j + l] = static_cast<int>(idx[l]);
    }
  }
  for (; j < ncols; ++j) {
    double best = rows[j];
    int bi = 0;
    for (std::size_t r = 1; r < nrows; ++r) {
      const double v = rows[r * ncols + j];
      if (v > best) {
        best = v;
        bi = static_cast<int>(r);
      }
    }
    out[j] = best + 0.0;
    if (argmax) argmax[j] = bi;
  }
}

}  // namespace

const Ops* avx2_table() {
  static const Ops table = {
      "avx2",
      matmul_nt_avx2,
      matmul_nn_avx2,
      matmul_tn_avx2,
      dot_avx2,
      axpy_avx2,
      sum_avx2,
      sumsq_centered_avx2,
      relu_avx2,
      relu_grad_avx2,
      colwise_max_avx2,
  };
  return &table;
}

}  // namespace skelscore::kernels

#else

namespace skelscore::kernels {
const Ops* avx2_table() { return nullptr; }
}  // namespace skelscore::kernels

#endif  // SKELSCORE_COMPILE_AVX2
