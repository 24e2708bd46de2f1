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

#include "skelscore/fwd_ops.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "skelscore/kernels.hpp"

namespace skelscore::engine {

Tensor2 affine_forward(const Tensor2& x, const Tensor2& w, const Tensor2* b) {
  if (x.cols() != w.cols())
    throw std::invalid_argument("affine: input " + x.shape_str() +
                                " incompatible with weight " + w.shape_str());
  const std::size_t n = x.rows();
  const std::size_t d_out = w.rows();
  Tensor2 y(n, d_out);
  if (b != nullptr) {
    if (b->rows() != 1 || b->cols() != d_out)
      throw std::invalid_argument("affine: bias " + b->shape_str() +
                                  " incompatible with weight " + w.shape_str());
    for (std::size_t r = 0; r < n; ++r)
      std::memcpy(y.row_ptr(r), b->data(), d_out * sizeof(double));
  }
  kernels::active().matmul_nt(x.data(), w.data(), y.data(), n, x.cols(), d_out);
  return y;
}

Tensor2 relu_forward(const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  kernels::active().relu(x.data(), y.data(), x.size());
  return y;
}

Tensor2 layer_normalize_forward(const Tensor2& x, const Tensor2& gain,
                                const Tensor2& bias, std::vector<double>* mean,
                                std::vector<double>* inv_std) {
  const std::size_t n = x.cols();
  if (n == 0) throw std::invalid_argument("layer_normalize: empty rows");
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 ||
      bias.cols() != n)
    throw std::invalid_argument("layer_normalize: gain " + gain.shape_str() +
                                " / bias " + bias.shape_str() +
                                " do not match row width " + std::to_string(n));
  const auto& k = kernels::active();
  Tensor2 y(x.rows(), n);
  if (mean != nullptr) mean->assign(x.rows(), 0.0);
  if (inv_std != nullptr) inv_std->assign(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* row = x.row_ptr(r);
    const double mu = k.sum(row, n) / static_cast<double>(n);
    const double var = k.sumsq_centered(row, n, mu) / static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kNormEpsilon);
    double* out = y.row_ptr(r);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = gain.at(0, i) * ((row[i] - mu) * inv) + bias.at(0, i);
    if (mean != nullptr) (*mean)[r] = mu;
    if (inv_std != nullptr) (*inv_std)[r] = inv;
  }
  return y;
}

Tensor2 set_max_pool_forward(const Tensor2& x, std::vector<int>* argmax) {
  if (x.rows() == 0)
    throw std::invalid_argument("set_max_pool: no rows to pool");
  Tensor2 y(1, x.cols());
  if (argmax != nullptr) {
    argmax->assign(x.cols(), 0);
    kernels::active().colwise_max(x.data(), x.rows(), x.cols(), y.data(),
                                  argmax->data());
  } else {
    kernels::active().colwise_max(x.data(), x.rows(), x.cols(), y.data(),
                                  nullptr);
  }
  return y;
}

CosineResult cosine_forward(const double* a, const double* b, std::size_t n) {
  const auto& k = kernels::active();
  CosineResult r;
  r.dot = k.dot(a, b, n);
  r.norm_a = std::sqrt(k.dot(a, a, n));
  r.norm_b = std::sqrt(k.dot(b, b, n));
  if (r.norm_a == 0.0 || r.norm_b == 0.0) {
    r.degenerate = true;
    r.value = 0.0;
    return r;
  }
  r.value = r.dot / (r.norm_a * r.norm_b);
  return r;
}

CosineResult cosine_forward(const Tensor2& a, const Tensor2& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: " + a.shape_str() +
                                " vs " + b.shape_str());
  return cosine_forward(a.data(), b.data(), a.size());
}

}  // namespace skelscore::engine
