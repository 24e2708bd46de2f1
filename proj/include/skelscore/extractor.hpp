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

#ifndef SKELSCORE_EXTRACTOR_HPP_
#define SKELSCORE_EXTRACTOR_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "skelscore/clip.hpp"
#include "skelscore/tape.hpp"
#include "skelscore/tensor.hpp"

namespace skelscore::model {

/// Width plan for the set encoder: a stem layer lifting the 7-dim token, then
/// residual MLP blocks. The clip feature width S is the last block width.
struct ExtractorConfig {
  std::size_t stem_width = 64;
  std::vector<std::size_t> block_widths = {64, 128, 256};
  double bottleneck_ratio = 0.25;
  std::string activation = "relu";
  std::string norm = "layer";

  std::size_t feature_dim() const { return block_widths.back(); }

  /// ceil(ratio * d_out), floored at 1.
  std::size_t bottleneck(std::size_t d_out) const;

  void validate() const;
};

/// Clip-level feature x produced by channel-wise max over per-joint encodings.
struct SkeletonFeature {
  std::vector<double> x;
  std::string source;
};

/// Creates every extractor parameter under "extractor." names. Weights draw
/// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) in a fixed order; norm gains
/// start at 1, biases at 0.
void init_extractor_params(engine::ParamStore& store,
                           const ExtractorConfig& cfg, std::mt19937_64& rng);

/// Encodes a [J x 7] token matrix row-by-row to [J x S] on the tape. Each
/// output row depends only on its input row, which is what makes the pooled
/// feature exactly permutation invariant.
engine::Tape::Value extractor_rows(engine::Tape& tape,
                                   engine::ParamStore& store,
                                   const ExtractorConfig& cfg,
                                   const engine::Tensor2& tokens);

/// Rows + set_max_pool: the [1 x S] clip feature, differentiable.
engine::Tape::Value extractor_feature(engine::Tape& tape,
                                      engine::ParamStore& store,
                                      const ExtractorConfig& cfg,
                                      const engine::Tensor2& tokens);

/// Tape-free forward of the same arithmetic (frozen-weights inference).
engine::Tensor2 extractor_rows_values(const engine::ParamStore& store,
                                      const ExtractorConfig& cfg,
                                      const engine::Tensor2& tokens);

std::vector<double> encode_joint(const data::JointToken& token,
                                 const engine::ParamStore& store,
                                 const ExtractorConfig& cfg);

SkeletonFeature encode_clip(const data::TokenCloud& cloud,
                            const engine::ParamStore& store,
                            const ExtractorConfig& cfg);

/// [J x 7] matrix from a token cloud, one row per token in storage order.
engine::Tensor2 tokens_matrix(const data::TokenCloud& cloud);

}  // namespace skelscore::model

#endif  // SKELSCORE_EXTRACTOR_HPP_
