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

#include "skelscore/pretrainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "skelscore/fwd_ops.hpp"
#include "skelscore/rng.hpp"

namespace skelscore::train {

using engine::ParamStore;
using engine::Tape;
using engine::Tensor2;
using nlohmann::json;

void PretrainConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("pretrain config: alpha must be in [0,1]");
  if (!(tau_min > 0.0) || !(tau_max >= tau_min))
    throw std::invalid_argument(
        "pretrain config: need 0 < tau_min <= tau_max");
  if (tau_init < tau_min || tau_init > tau_max)
    throw std::invalid_argument(
        "pretrain config: initial tau outside its bounds");
  if (batch_size < 1)
    throw std::invalid_argument("pretrain config: batch size must be >= 1");
  if (joint_count < 1)
    throw std::invalid_argument("pretrain config: joint count must be >= 1");
  extractor.validate();
}

engine::Tape::Value classification_loss(Tape& tape, ParamStore& store,
                                        Tape::Value feature,
                                        std::size_t target) {
  auto logits = tape.affine(feature, tape.param(store, "cls.w"),
                            tape.param(store, "cls.b"));
  return tape.softmax_cross_entropy(logits, target);
}

engine::Tape::Value contrastive_loss_node(
    Tape& tape, const std::vector<Tape::Value>& features,
    const std::vector<Tape::Value>& texts, Tape::Value log_tau) {
  const std::size_t n = features.size();
  if (n == 0)
    throw std::invalid_argument("contrastive loss: empty batch");
  if (texts.size() != n)
    throw std::invalid_argument(
        "contrastive loss: " + std::to_string(n) + " features vs " +
        std::to_string(texts.size()) + " text embeddings");
  std::vector<Tape::Value> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Tape::Value> cells;
    cells.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      cells.push_back(tape.cosine_similarity(features[i], texts[j]));
    rows.push_back(tape.concat_cols(cells));
  }
  auto logits =
      tape.scale_by(tape.concat_rows(rows), tape.exp_scale(log_tau, -1.0));
  std::vector<std::size_t> diag(n);
  std::iota(diag.begin(), diag.end(), 0);
  auto s2t = tape.softmax_cross_entropy_rows(logits, diag);
  auto t2s = tape.softmax_cross_entropy_rows(tape.transpose(logits), diag);
  return tape.scale(tape.add(s2t, t2s), 0.5);
}

double contrastive_loss(const std::vector<std::vector<double>>& features,
                        const std::vector<std::vector<double>>& texts,
                        double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("contrastive loss: tau must be positive");
  Tape tape;
  ParamStore store;
  store.create("log_tau", Tensor2(1, 1, {std::log(tau)}));
  std::vector<Tape::Value> f, y;
  for (const auto& v : features)
    f.push_back(tape.input(Tensor2(1, v.size(), v)));
  for (const auto& v : texts)
    y.push_back(tape.input(Tensor2(1, v.size(), v)));
  return tape.scalar_value(
      contrastive_loss_node(tape, f, y, tape.param(store, "log_tau")));
}

BatchLoss total_loss_node(Tape& tape, ParamStore& store,
                          const PretrainConfig& cfg,
                          const std::vector<TrainExample>& batch) {
  if (batch.empty())
    throw std::invalid_argument("total loss: empty batch");
  std::vector<Tape::Value> projected, texts;
  Tape::Value cls_sum{};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrainExample& ex = batch[i];
    if (ex.label.empty())
      throw std::invalid_argument("total loss: unlabeled clip in batch");
    auto feature = model::extractor_feature(tape, store, cfg.extractor,
                                            ex.tokens);
    auto cls = classification_loss(tape, store, feature, ex.target);
    cls_sum = i == 0 ? cls : tape.add(cls_sum, cls);
    projected.push_back(text::projection_forward(tape, store, feature));
    texts.push_back(text::text_embed(tape, store, cfg.encoder, ex.label));
  }
  BatchLoss out;
  out.classification = cls_sum;
  out.contrastive = contrastive_loss_node(tape, projected, texts,
                                          tape.param(store, "log_tau"));
  out.total = tape.add(tape.scale(out.classification, cfg.alpha),
                       tape.scale(out.contrastive, 1.0 - cfg.alpha));
  return out;
}

namespace {

void init_all_params(ParamStore& store, const PretrainConfig& cfg,
                     std::size_t class_count, std::mt19937_64& rng) {
  model::init_extractor_params(store, cfg.extractor, rng);
  text::init_projection_params(store, cfg.extractor.feature_dim(),
                               cfg.encoder.embed_dim, rng);
  text::init_text_params(store, cfg.encoder, rng);
  const std::size_t s = cfg.extractor.feature_dim();
  const double bound = 1.0 / std::sqrt(static_cast<double>(s));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor2 w(class_count, s);
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  store.create("cls.w", std::move(w));
  store.create("cls.b", Tensor2(1, class_count));
  store.create("log_tau", Tensor2(1, 1, {std::log(cfg.tau_init)}));
}

void clamp_log_tau(ParamStore& store, const PretrainConfig& cfg) {
  double& v = store.get("log_tau").value.at(0, 0);
  v = std::clamp(v, std::log(cfg.tau_min), std::log(cfg.tau_max));
}

}  // namespace

Checkpoint train(const std::vector<data::RawClip>& clips,
                 const PretrainConfig& cfg) {
  cfg.validate();
  std::set<std::string> label_set;
  for (const auto& clip : clips) {
    if (!clip.label)
      throw std::invalid_argument("pretrain: clip '" + clip.video_id +
                                  "' has no label");
    label_set.insert(*clip.label);
  }
  std::vector<std::string> classes(label_set.begin(), label_set.end());
  if (cfg.class_count > 0 && classes.size() < cfg.class_count)
    throw std::invalid_argument(
        "pretrain: dataset has " + std::to_string(classes.size()) +
        " distinct labels, expected at least " +
        std::to_string(cfg.class_count));
  if (classes.empty())
    throw std::invalid_argument("pretrain: no labeled clips");

  std::vector<TrainExample> examples;
  examples.reserve(clips.size());
  for (const auto& clip : clips) {
    data::validate_clip(clip, cfg.joint_count);
    TrainExample ex;
    const data::TokenCloud cloud = data::tokenize_clip(clip, cfg.joint_count);
    if (cloud.tokens.empty())
      throw data::ValidationError("pretrain: clip '" + clip.video_id +
                                  "' has no joints");
    ex.tokens = model::tokens_matrix(cloud);
    ex.label = *clip.label;
    ex.target = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), ex.label) -
        classes.begin());
    examples.push_back(std::move(ex));
  }

  std::mt19937_64 rng(cfg.seed);
  ParamStore store;
  init_all_params(store, cfg, classes.size(), rng);

  FinalLosses final;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    deterministic_shuffle(order, rng);
    double ep_total = 0.0, ep_cls = 0.0, ep_cont = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + cfg.batch_size);
      std::vector<TrainExample> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(examples[order[i]]);
      ++step;
      try {
        store.zero_grads();
        Tape tape;
        const BatchLoss loss = total_loss_node(tape, store, cfg, batch);
        tape.backpropagate(loss.total);
        ep_total += tape.scalar_value(loss.total);
        ep_cls += tape.scalar_value(loss.classification);
        ep_cont += tape.scalar_value(loss.contrastive);
        sgd_adaptive_step(store, cfg.learning_rate);
        clamp_log_tau(store, cfg);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("pretrain diverged at step " +
                                 std::to_string(step) + ": " + e.what());
      }
      ++batches;
    }
    if (batches > 0 && epoch + 1 == cfg.epochs) {
      final.total = ep_total / static_cast<double>(batches);
      final.classification = ep_cls / static_cast<double>(batches);
      final.contrastive = ep_cont / static_cast<double>(batches);
    }
  }
  store.zero_grads();

  Checkpoint ckpt;
  ckpt.extractor = cfg.extractor;
  ckpt.encoder = cfg.encoder;
  ckpt.classes = std::move(classes);
  ckpt.joint_count = cfg.joint_count;
  ckpt.seed = cfg.seed;
  ckpt.epochs = cfg.epochs;
  ckpt.alpha = cfg.alpha;
  ckpt.final_loss = final;
  ckpt.params = std::move(store);
  return ckpt;
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j;
  j["format_version"] = ckpt.format_version;
  j["extractor"] = {{"stem_width", ckpt.extractor.stem_width},
                    {"block_widths", ckpt.extractor.block_widths},
                    {"bottleneck_ratio", ckpt.extractor.bottleneck_ratio},
                    {"activation", ckpt.extractor.activation},
                    {"norm", ckpt.extractor.norm}};
  j["text_encoder"] = {{"hash_size", ckpt.encoder.hash_size},
                       {"embed_dim", ckpt.encoder.embed_dim}};
  j["classes"] = ckpt.classes;
  j["joint_count"] = ckpt.joint_count;
  j["metadata"] = {{"seed", ckpt.seed},
                   {"epochs", ckpt.epochs},
                   {"alpha", ckpt.alpha},
                   {"final_loss",
                    {{"total", ckpt.final_loss.total},
                     {"classification", ckpt.final_loss.classification},
                     {"contrastive", ckpt.final_loss.contrastive}}}};
  json params = json::object();
  for (const auto& [name, p] : ckpt.params.params())
    params[name] = {{"rows", p.value.rows()},
                    {"cols", p.value.cols()},
                    {"data", p.value.values()}};
  j["params"] = std::move(params);
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text,
                                const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw data::ParseError(origin + ": " + e.what());
  }
  Checkpoint ckpt;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != ckpt.format_version)
      throw data::ValidationError(
          origin + ": checkpoint format version " + std::to_string(version) +
          " is not supported (expected " +
          std::to_string(ckpt.format_version) + "); no silent migration");
    const json& je = j.at("extractor");
    ckpt.extractor.stem_width = je.at("stem_width").get<std::size_t>();
    ckpt.extractor.block_widths =
        je.at("block_widths").get<std::vector<std::size_t>>();
    ckpt.extractor.bottleneck_ratio =
        je.at("bottleneck_ratio").get<double>();
    ckpt.extractor.activation = je.at("activation").get<std::string>();
    ckpt.extractor.norm = je.at("norm").get<std::string>();
    const json& jt = j.at("text_encoder");
    ckpt.encoder.hash_size = jt.at("hash_size").get<std::size_t>();
    ckpt.encoder.embed_dim = jt.at("embed_dim").get<std::size_t>();
    ckpt.classes = j.at("classes").get<std::vector<std::string>>();
    ckpt.joint_count = j.at("joint_count").get<int>();
    const json& jm = j.at("metadata");
    ckpt.seed = jm.at("seed").get<std::uint64_t>();
    ckpt.epochs = jm.at("epochs").get<std::size_t>();
    ckpt.alpha = jm.at("alpha").get<double>();
    const json& jl = jm.at("final_loss");
    ckpt.final_loss.total = jl.at("total").get<double>();
    ckpt.final_loss.classification = jl.at("classification").get<double>();
    ckpt.final_loss.contrastive = jl.at("contrastive").get<double>();
    for (const auto& [name, jp] : j.at("params").items()) {
      const auto rows = jp.at("rows").get<std::size_t>();
      const auto cols = jp.at("cols").get<std::size_t>();
      auto data = jp.at("data").get<std::vector<double>>();
      ckpt.params.create(name, Tensor2(rows, cols, std::move(data)));
    }
  } catch (const json::exception& e) {
    throw data::ParseError(origin + ": " + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << checkpoint_to_json(ckpt) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data::ParseError("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str(), path);
}

std::vector<double> encode_clip_with(const Checkpoint& ckpt,
                                     const data::RawClip& clip) {
  const auto cloud = data::tokenize_clip(clip, ckpt.joint_count);
  return model::encode_clip(cloud, ckpt.params, ckpt.extractor).x;
}

std::size_t classify_clip(const Checkpoint& ckpt, const data::RawClip& clip) {
  const auto feature = encode_clip_with(ckpt, clip);
  Tensor2 x(1, feature.size(), feature);
  const Tensor2 logits = engine::affine_forward(
      x, ckpt.params.get("cls.w").value, &ckpt.params.get("cls.b").value);
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.cols(); ++c)
    if (logits.at(0, c) > logits.at(0, best)) best = c;
  return best;
}

}  // namespace skelscore::train
