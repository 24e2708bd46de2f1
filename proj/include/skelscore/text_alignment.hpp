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

#ifndef SKELSCORE_TEXT_ALIGNMENT_HPP_
#define SKELSCORE_TEXT_ALIGNMENT_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "skelscore/tape.hpp"

namespace skelscore::text {

/// Scoring semantics of a prompt list: abnormal prompts describe what should
/// raise the score, normal prompts describe what should lower it.
enum class PromptMode { kAbnormal, kNormal };

std::string prompt_mode_name(PromptMode mode);
PromptMode prompt_mode_from_name(const std::string& name);

struct PromptSet {
  std::vector<std::string> prompts;
  std::vector<std::vector<double>> embeddings;  // one [dim] vector per prompt
  std::size_t dim = 0;
  PromptMode mode = PromptMode::kAbnormal;
};

/// Hash-bucket text encoder: lowercase, split on non-alphanumerics, look each
/// token up in an H x E table, mean-pool, then one affine E -> E. A stand-in
/// for a large pretrained encoder with the same call shape.
struct ToyTextEncoder {
  std::size_t hash_size = 4096;
  std::size_t embed_dim = 64;
};

/// Lowercased alphanumeric runs, in order of appearance.
std::vector<std::string> tokenize_text(const std::string& s);

std::size_t hash_token(const std::string& token, std::size_t hash_size);

/// Creates "text.table", "text.w", "text.b" in the store.
void init_text_params(engine::ParamStore& store, const ToyTextEncoder& enc,
                      std::mt19937_64& rng);

/// Creates the S -> E projection head "proj.w1/b1/w2/b2" (two affine layers
/// with the activation between).
void init_projection_params(engine::ParamStore& store, std::size_t feature_dim,
                            std::size_t embed_dim, std::mt19937_64& rng);

/// Differentiable embedding of one string (training path). Throws when the
/// text has no tokens, naming the text.
engine::Tape::Value text_embed(engine::Tape& tape, engine::ParamStore& store,
                               const ToyTextEncoder& enc,
                               const std::string& s);

/// Tape-free embedding of one string, same arithmetic.
std::vector<double> text_embed_values(const engine::ParamStore& store,
                                      const ToyTextEncoder& enc,
                                      const std::string& s);

PromptSet embed_prompts_builtin(const std::vector<std::string>& prompts,
                                const engine::ParamStore& store,
                                const ToyTextEncoder& enc, PromptMode mode);

/// Differentiable projection f(x) of a [1 x S] feature to [1 x E].
engine::Tape::Value projection_forward(engine::Tape& tape,
                                       engine::ParamStore& store,
                                       engine::Tape::Value feature);

/// Tape-free f(x), same arithmetic.
std::vector<double> project_feature(const std::vector<double>& x,
                                    const engine::ParamStore& store);

void save_prompt_embeddings(const std::string& path, const PromptSet& set);
PromptSet load_prompt_embeddings(const std::string& path);

}  // namespace skelscore::text

#endif  // SKELSCORE_TEXT_ALIGNMENT_HPP_
