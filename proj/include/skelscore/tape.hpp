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

#ifndef SKELSCORE_TAPE_HPP_
#define SKELSCORE_TAPE_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "skelscore/tensor.hpp"

namespace skelscore::engine {

/// Named parameter with its gradient buffer and optimizer moments.
struct Param {
  Tensor2 value;
  Tensor2 grad;
  Tensor2 moment1;
  Tensor2 moment2;
};

/// Owns every learnable tensor by name. Iteration order is the sorted name
/// order, which keeps updates and serialization deterministic.
class ParamStore {
 public:
  Param& create(const std::string& name, Tensor2 init);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  std::size_t count() const { return params_.size(); }

  void zero_grads();

  std::size_t step() const { return step_; }
  void set_step(std::size_t s) { step_ = s; }

  std::map<std::string, Param>& params() { return params_; }
  const std::map<std::string, Param>& params() const { return params_; }

 private:
  std::map<std::string, Param> params_;
  std::size_t step_ = 0;
};

/// One adaptive-moment update (beta1 0.9, beta2 0.999, eps 1e-8) over every
/// parameter in the store, bias-corrected by the shared step counter.
/// Gradients are left untouched; callers zero them between steps.
void sgd_adaptive_step(ParamStore& store, double lr);

enum class OpKind {
  kInput,
  kParam,
  kAffine,
  kRelu,
  kLayerNorm,
  kSetMaxPool,
  kSoftmaxXent,
  kCosine,
  kAdd,
  kScaleConst,
  kScaleByScalar,
  kExpScale,
  kConcatCols,
  kConcatRows,
  kTranspose,
  kSumAll,
  kMeanRows,
  kRowGather,
};

const char* op_name(OpKind kind);

/// Reverse-mode tape over Tensor2 values. Nodes are appended in construction
/// order, so a reverse sweep visits consumers before producers. Every op
/// checks its output for NaN/Inf and throws naming the op. Single-threaded.
class Tape {
 public:
  struct Value {
    std::size_t id = 0;
  };

  Value input(Tensor2 v);

  /// Snapshots the parameter's current value; backpropagate() adds the
  /// resulting gradient into the store's buffer.
  Value param(ParamStore& store, const std::string& name);

  /// x * w^T (+ b broadcast). w is [out x in].
  Value affine(Value x, Value w);
  Value affine(Value x, Value w, Value b);

  Value relu(Value x);

  /// Per-row standardization (population variance, epsilon 1e-5 in the
  /// denominator) with learnable gain and bias, both [1 x cols].
  Value layer_normalize(Value x, Value gain, Value bias);

  /// [J x S] -> [1 x S] channel-wise max; gradient routes to the single
  /// contributing row per channel, ties to the lowest row index.
  Value set_max_pool(Value x);

  /// -log softmax(logits)[target] for a [1 x C] row, C >= 2.
  Value softmax_cross_entropy(Value logits, std::size_t target);

  /// Sum of per-row cross entropies for an [N x C] matrix; targets.size()==N.
  Value softmax_cross_entropy_rows(Value logits,
                                   const std::vector<std::size_t>& targets);

  /// a.b/(|a||b|). Zero-norm input is degenerate: value 0, zero gradient.
  Value cosine_similarity(Value a, Value b);
  bool cosine_degenerate(Value v) const;

  Value add(Value a, Value b);
  Value scale(Value a, double c);

  /// Elementwise a * s where s is a differentiable [1 x 1] scalar.
  Value scale_by(Value a, Value s);

  /// Elementwise exp(c * a). With c = -1 on log tau this yields 1/tau.
  Value exp_scale(Value a, double c);

  Value concat_cols(const std::vector<Value>& parts);
  Value concat_rows(const std::vector<Value>& parts);
  Value transpose(Value a);
  Value sum_all(Value a);

  /// [N x D] -> [1 x D] column means (1/N sum of rows).
  Value mean_rows(Value a);

  /// Stacks table rows by index; gradient scatter-adds back into the table.
  Value row_gather(Value table, const std::vector<std::size_t>& indices);

  /// Seeds d(root)=1 and sweeps the tape in reverse. Node gradients are
  /// rebuilt from zero on every call; parameter gradients in the stores
  /// accumulate, so two calls without zero_grads() double them.
  void backpropagate(Value root);

  const Tensor2& value(Value v) const;
  const Tensor2& grad(Value v) const;
  double scalar_value(Value v) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind;
    Tensor2 val;
    Tensor2 grad;
    std::vector<std::size_t> in;
    double c = 0.0;                // scale factor / exp coefficient
    std::vector<std::size_t> idx;  // targets / gather rows / concat offsets
    std::vector<int> arg;          // pooling argmax
    std::vector<double> aux;       // norm stats / softmax probs / cosine parts
    Param* bound = nullptr;        // kParam only
    bool degenerate = false;       // kCosine only
  };

  Value push(Node node);
  Node& node(Value v) { return nodes_[v.id]; }
  const Node& node(Value v) const { return nodes_[v.id]; }
  void backward_node(Node& n);

  std::vector<Node> nodes_;
};

}  // namespace skelscore::engine

#endif  // SKELSCORE_TAPE_HPP_
