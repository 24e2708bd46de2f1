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

#ifndef SKELSCORE_PRETRAINER_HPP_
#define SKELSCORE_PRETRAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "skelscore/clip.hpp"
#include "skelscore/extractor.hpp"
#include "skelscore/tape.hpp"
#include "skelscore/text_alignment.hpp"

namespace skelscore::train {

struct PretrainConfig {
  double alpha = 0.5;      // classification weight in the mixed loss
  double tau_init = 0.07;  // temperature start; learned as log tau
  double tau_min = 0.01;
  double tau_max = 100.0;
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t class_count = 0;  // 0: inferred from the labels
  int joint_count = 17;
  model::ExtractorConfig extractor;
  text::ToyTextEncoder encoder;

  void validate() const;
};

struct FinalLosses {
  double total = 0.0;
  double classification = 0.0;
  double contrastive = 0.0;
};

/// Frozen training artifact: configs, class list, and every parameter.
/// Round-trips bit-exactly through save/load.
struct Checkpoint {
  int format_version = 1;
  model::ExtractorConfig extractor;
  text::ToyTextEncoder encoder;
  std::vector<std::string> classes;
  int joint_count = 17;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  double alpha = 0.5;
  FinalLosses final_loss;
  engine::ParamStore params;
};

/// One labeled training item: token matrix, class index, class name.
struct TrainExample {
  engine::Tensor2 tokens;
  std::size_t target = 0;
  std::string label;
};

/// Cross entropy of the classifier head on one [1 x S] feature.
engine::Tape::Value classification_loss(engine::Tape& tape,
                                        engine::ParamStore& store,
                                        engine::Tape::Value feature,
                                        std::size_t target);

/// Symmetric batch contrastive loss over projected features and text
/// embeddings: half the sum of the two directional softmax losses, each a
/// sum over the batch, logits Cos/tau with tau = exp(log_tau).
engine::Tape::Value contrastive_loss_node(
    engine::Tape& tape, const std::vector<engine::Tape::Value>& features,
    const std::vector<engine::Tape::Value>& texts,
    engine::Tape::Value log_tau);

/// Tape-free evaluation of the same loss for fixed vectors and tau.
double contrastive_loss(const std::vector<std::vector<double>>& features,
                        const std::vector<std::vector<double>>& texts,
                        double tau);

struct BatchLoss {
  engine::Tape::Value total;
  engine::Tape::Value classification;  // sum over the batch
  engine::Tape::Value contrastive;
};

/// alpha * sum of per-clip classification losses + (1 - alpha) * contrastive
/// loss, with each clip's positive text being its class name run through the
/// trainable text encoder.
BatchLoss total_loss_node(engine::Tape& tape, engine::ParamStore& store,
                          const PretrainConfig& cfg,
                          const std::vector<TrainExample>& batch);

/// Full pretraining run. Deterministic given the seed; throws on divergence
/// naming the failing step.
Checkpoint train(const std::vector<data::RawClip>& clips,
                 const PretrainConfig& cfg);

/// Tokenizes and encodes one clip with the frozen checkpoint weights.
std::vector<double> encode_clip_with(const Checkpoint& ckpt,
                                     const data::RawClip& clip);

/// Class index predicted by the checkpoint's classifier head for one clip.
std::size_t classify_clip(const Checkpoint& ckpt, const data::RawClip& clip);

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text,
                                const std::string& origin);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace skelscore::train

#endif  // SKELSCORE_PRETRAINER_HPP_
