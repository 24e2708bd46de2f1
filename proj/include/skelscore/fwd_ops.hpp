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

#ifndef SKELSCORE_FWD_OPS_HPP_
#define SKELSCORE_FWD_OPS_HPP_

#include <cstddef>
#include <vector>

#include "skelscore/tensor.hpp"

namespace skelscore::engine {

/// Variance guard for per-row normalization.
inline constexpr double kNormEpsilon = 1e-5;

/// Forward routines shared by the tape ops and the tape-free inference paths.
/// Both callers run the exact same arithmetic, so a frozen model scores
/// identically whether or not gradients are being recorded.

/// y = x * w^T (+ b broadcast per row). w is [out x in], b is [1 x out].
Tensor2 affine_forward(const Tensor2& x, const Tensor2& w, const Tensor2* b);

Tensor2 relu_forward(const Tensor2& x);

/// Per-row standardization with learnable gain/bias, population variance.
/// mean/inv_std (if non-null) receive one entry per row for backward reuse.
Tensor2 layer_normalize_forward(const Tensor2& x, const Tensor2& gain,
                                const Tensor2& bias, std::vector<double>* mean,
                                std::vector<double>* inv_std);

/// Channel-wise max over rows; argmax (if non-null) gets the winning row per
/// channel, ties to the lowest index. Throws on zero rows.
Tensor2 set_max_pool_forward(const Tensor2& x, std::vector<int>* argmax);

struct CosineResult {
  double value = 0.0;
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  bool degenerate = false;  // a zero-norm side; value forced to 0
};

CosineResult cosine_forward(const double* a, const double* b, std::size_t n);
CosineResult cosine_forward(const Tensor2& a, const Tensor2& b);

}  // namespace skelscore::engine

#endif  // SKELSCORE_FWD_OPS_HPP_
