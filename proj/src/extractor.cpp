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

#include "skelscore/extractor.hpp"

#include <cmath>
#include <stdexcept>

#include "skelscore/fwd_ops.hpp"
#include "skelscore/kernels.hpp"

namespace skelscore::model {

namespace {

constexpr std::size_t kTokenDim = 7;

std::string block_prefix(std::size_t i) {
  return "extractor.block" + std::to_string(i) + ".";
}

engine::Tensor2 uniform_init(std::size_t rows, std::size_t cols,
                             std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  engine::Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

engine::Tensor2 ones_row(std::size_t n) {
  engine::Tensor2 t(1, n);
  t.fill(1.0);
  return t;
}

}  // namespace

std::size_t ExtractorConfig::bottleneck(std::size_t d_out) const {
  const auto b = static_cast<std::size_t>(
      std::ceil(bottleneck_ratio * static_cast<double>(d_out)));
  return b < 1 ? 1 : b;
}

void ExtractorConfig::validate() const {
  if (block_widths.empty())
    throw std::invalid_argument("extractor config: need at least one block");
  if (stem_width < 1)
    throw std::invalid_argument("extractor config: stem width must be >= 1");
  for (std::size_t w : block_widths)
    if (w < 1)
      throw std::invalid_argument("extractor config: block width must be >= 1");
  if (!(bottleneck_ratio > 0.0) || bottleneck_ratio > 1.0)
    throw std::invalid_argument(
        "extractor config: bottleneck ratio must be in (0,1]");
  if (activation != "relu")
    throw std::invalid_argument("extractor config: unknown activation '" +
                                activation + "'");
  if (norm != "layer")
    throw std::invalid_argument("extractor config: unknown norm '" + norm +
                                "'");
}

void init_extractor_params(engine::ParamStore& store,
                           const ExtractorConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  store.create("extractor.stem.w",
               uniform_init(cfg.stem_width, kTokenDim, kTokenDim, rng));
  store.create("extractor.stem.b", engine::Tensor2(1, cfg.stem_width));
  store.create("extractor.stem.gain", ones_row(cfg.stem_width));
  store.create("extractor.stem.bias", engine::Tensor2(1, cfg.stem_width));
  std::size_t d_in = cfg.stem_width;
  for (std::size_t i = 0; i < cfg.block_widths.size(); ++i) {
    const std::size_t d_out = cfg.block_widths[i];
    const std::size_t mid = cfg.bottleneck(d_out);
    const std::string p = block_prefix(i);
    store.create(p + "w2", uniform_init(mid, d_in, d_in, rng));
    store.create(p + "norm2.gain", ones_row(mid));
    store.create(p + "norm2.bias", engine::Tensor2(1, mid));
    store.create(p + "w3", uniform_init(mid, mid, mid, rng));
    store.create(p + "norm3.gain", ones_row(mid));
    store.create(p + "norm3.bias", engine::Tensor2(1, mid));
    store.create(p + "w4", uniform_init(d_out, mid, mid, rng));
    store.create(p + "norm4.gain", ones_row(d_out));
    store.create(p + "norm4.bias", engine::Tensor2(1, d_out));
    if (d_in != d_out)
      store.create(p + "w1", uniform_init(d_out, d_in, d_in, rng));
    d_in = d_out;
  }
}

engine::Tape::Value extractor_rows(engine::Tape& tape,
                                   engine::ParamStore& store,
                                   const ExtractorConfig& cfg,
                                   const engine::Tensor2& tokens) {
  cfg.validate();
  if (tokens.cols() != kTokenDim)
    throw std::invalid_argument("extractor: tokens must be Jx7, got " +
                                tokens.shape_str());
  auto u = tape.relu(tape.layer_normalize(
      tape.affine(tape.input(tokens), tape.param(store, "extractor.stem.w"),
                  tape.param(store, "extractor.stem.b")),
      tape.param(store, "extractor.stem.gain"),
      tape.param(store, "extractor.stem.bias")));
  std::size_t d_in = cfg.stem_width;
  for (std::size_t i = 0; i < cfg.block_widths.size(); ++i) {
    const std::size_t d_out = cfg.block_widths[i];
    const std::string p = block_prefix(i);
    auto h = tape.layer_normalize(tape.affine(u, tape.param(store, p + "w2")),
                                  tape.param(store, p + "norm2.gain"),
                                  tape.param(store, p + "norm2.bias"));
    h = tape.layer_normalize(
        tape.affine(tape.relu(h), tape.param(store, p + "w3")),
        tape.param(store, p + "norm3.gain"), tape.param(store, p + "norm3.bias"));
    h = tape.layer_normalize(
        tape.affine(tape.relu(h), tape.param(store, p + "w4")),
        tape.param(store, p + "norm4.gain"), tape.param(store, p + "norm4.bias"));
    auto shortcut =
        d_in == d_out ? u : tape.affine(u, tape.param(store, p + "w1"));
    u = tape.relu(tape.add(h, shortcut));
    d_in = d_out;
  }
  return u;
}

engine::Tape::Value extractor_feature(engine::Tape& tape,
                                      engine::ParamStore& store,
                                      const ExtractorConfig& cfg,
                                      const engine::Tensor2& tokens) {
  return tape.set_max_pool(extractor_rows(tape, store, cfg, tokens));
}

engine::Tensor2 extractor_rows_values(const engine::ParamStore& store,
                                      const ExtractorConfig& cfg,
                                      const engine::Tensor2& tokens) {
  cfg.validate();
  if (tokens.cols() != kTokenDim)
    throw std::invalid_argument("extractor: tokens must be Jx7, got " +
                                tokens.shape_str());
  using engine::affine_forward;
  using engine::layer_normalize_forward;
  using engine::relu_forward;
  auto val = [&](const std::string& name) -> const engine::Tensor2& {
    return store.get(name).value;
  };
  engine::Tensor2 u = relu_forward(layer_normalize_forward(
      affine_forward(tokens, val("extractor.stem.w"),
                     &val("extractor.stem.b")),
      val("extractor.stem.gain"), val("extractor.stem.bias"), nullptr,
      nullptr));
  std::size_t d_in = cfg.stem_width;
  for (std::size_t i = 0; i < cfg.block_widths.size(); ++i) {
    const std::size_t d_out = cfg.block_widths[i];
    const std::string p = block_prefix(i);
    engine::Tensor2 h = layer_normalize_forward(
        affine_forward(u, val(p + "w2"), nullptr), val(p + "norm2.gain"),
        val(p + "norm2.bias"), nullptr, nullptr);
    h = layer_normalize_forward(
        affine_forward(relu_forward(h), val(p + "w3"), nullptr),
        val(p + "norm3.gain"), val(p + "norm3.bias"), nullptr, nullptr);
    h = layer_normalize_forward(
        affine_forward(relu_forward(h), val(p + "w4"), nullptr),
        val(p + "norm4.gain"), val(p + "norm4.bias"), nullptr, nullptr);
    engine::Tensor2 shortcut =
        d_in == d_out ? u : affine_forward(u, val(p + "w1"), nullptr);
    const auto& k = kernels::active();
    k.axpy(1.0, shortcut.data(), h.data(), h.size());
    u = relu_forward(h);
    d_in = d_out;
  }
  return u;
}

engine::Tensor2 tokens_matrix(const data::TokenCloud& cloud) {
  engine::Tensor2 m(cloud.tokens.size(), kTokenDim);
  for (std::size_t r = 0; r < cloud.tokens.size(); ++r)
    for (std::size_t c = 0; c < kTokenDim; ++c)
      m.at(r, c) = cloud.tokens[r].v[c];
  return m;
}

std::vector<double> encode_joint(const data::JointToken& token,
                                 const engine::ParamStore& store,
                                 const ExtractorConfig& cfg) {
  engine::Tensor2 row(1, kTokenDim);
  for (std::size_t c = 0; c < kTokenDim; ++c) row.at(0, c) = token.v[c];
  const engine::Tensor2 out = extractor_rows_values(store, cfg, row);
  return out.values();
}

SkeletonFeature encode_clip(const data::TokenCloud& cloud,
                            const engine::ParamStore& store,
                            const ExtractorConfig& cfg) {
  if (cloud.tokens.empty())
    throw std::invalid_argument("encode_clip: empty token cloud for '" +
                                cloud.source + "'");
  const engine::Tensor2 rows =
      extractor_rows_values(store, cfg, tokens_matrix(cloud));
  const engine::Tensor2 pooled = engine::set_max_pool_forward(rows, nullptr);
  SkeletonFeature f;
  f.x = pooled.values();
  f.source = cloud.source;
  return f;
}

}  // namespace skelscore::model
