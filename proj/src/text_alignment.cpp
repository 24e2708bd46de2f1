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

#include "skelscore/text_alignment.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "skelscore/clip.hpp"
#include "skelscore/fwd_ops.hpp"
#include "skelscore/kernels.hpp"
#include "skelscore/rng.hpp"

namespace skelscore::text {

using nlohmann::json;

std::string prompt_mode_name(PromptMode mode) {
  return mode == PromptMode::kAbnormal ? "abnormal" : "normal";
}

PromptMode prompt_mode_from_name(const std::string& name) {
  if (name == "abnormal") return PromptMode::kAbnormal;
  if (name == "normal") return PromptMode::kNormal;
  throw std::invalid_argument("unknown prompt mode '" + name +
                              "' (expected abnormal or normal)");
}

std::vector<std::string> tokenize_text(const std::string& s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char ch : s) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

std::size_t hash_token(const std::string& token, std::size_t hash_size) {
  return static_cast<std::size_t>(fnv1a64(token) %
                                  static_cast<std::uint64_t>(hash_size));
}

namespace {

engine::Tensor2 uniform_init(std::size_t rows, std::size_t cols,
                             std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  engine::Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

std::vector<std::size_t> token_rows(const ToyTextEncoder& enc,
                                    const std::string& s) {
  const auto tokens = tokenize_text(s);
  if (tokens.empty())
    throw std::invalid_argument("text '" + s +
                                "' has no tokens after normalization");
  std::vector<std::size_t> rows;
  rows.reserve(tokens.size());
  for (const auto& t : tokens) rows.push_back(hash_token(t, enc.hash_size));
  return rows;
}

}  // namespace

void init_text_params(engine::ParamStore& store, const ToyTextEncoder& enc,
                      std::mt19937_64& rng) {
  if (enc.hash_size < 1 || enc.embed_dim < 1)
    throw std::invalid_argument("text encoder: hash size and dim must be >= 1");
  store.create("text.table", uniform_init(enc.hash_size, enc.embed_dim,
                                          enc.embed_dim, rng));
  store.create("text.w", uniform_init(enc.embed_dim, enc.embed_dim,
                                      enc.embed_dim, rng));
  store.create("text.b", engine::Tensor2(1, enc.embed_dim));
}

void init_projection_params(engine::ParamStore& store, std::size_t feature_dim,
                            std::size_t embed_dim, std::mt19937_64& rng) {
  store.create("proj.w1",
               uniform_init(embed_dim, feature_dim, feature_dim, rng));
  store.create("proj.b1", engine::Tensor2(1, embed_dim));
  store.create("proj.w2", uniform_init(embed_dim, embed_dim, embed_dim, rng));
  store.create("proj.b2", engine::Tensor2(1, embed_dim));
}

engine::Tape::Value text_embed(engine::Tape& tape, engine::ParamStore& store,
                               const ToyTextEncoder& enc,
                               const std::string& s) {
  const auto rows = token_rows(enc, s);
  auto mean =
      tape.mean_rows(tape.row_gather(tape.param(store, "text.table"), rows));
  return tape.affine(mean, tape.param(store, "text.w"),
                     tape.param(store, "text.b"));
}

std::vector<double> text_embed_values(const engine::ParamStore& store,
                                      const ToyTextEncoder& enc,
                                      const std::string& s) {
  const auto rows = token_rows(enc, s);
  const engine::Tensor2& table = store.get("text.table").value;
  engine::Tensor2 mean(1, table.cols());
  const double inv = 1.0 / static_cast<double>(rows.size());
  const auto& k = kernels::active();
  for (std::size_t r : rows)
    k.axpy(inv, table.row_ptr(r), mean.data(), table.cols());
  const engine::Tensor2 out = engine::affine_forward(
      mean, store.get("text.w").value, &store.get("text.b").value);
  return out.values();
}

PromptSet embed_prompts_builtin(const std::vector<std::string>& prompts,
                                const engine::ParamStore& store,
                                const ToyTextEncoder& enc, PromptMode mode) {
  if (prompts.empty())
    throw std::invalid_argument("prompt list must not be empty");
  PromptSet set;
  set.prompts = prompts;
  set.dim = enc.embed_dim;
  set.mode = mode;
  for (const auto& p : prompts)
    set.embeddings.push_back(text_embed_values(store, enc, p));
  return set;
}

engine::Tape::Value projection_forward(engine::Tape& tape,
                                       engine::ParamStore& store,
                                       engine::Tape::Value feature) {
  auto h = tape.relu(tape.affine(feature, tape.param(store, "proj.w1"),
                                 tape.param(store, "proj.b1")));
  return tape.affine(h, tape.param(store, "proj.w2"),
                     tape.param(store, "proj.b2"));
}

std::vector<double> project_feature(const std::vector<double>& x,
                                    const engine::ParamStore& store) {
  const engine::Tensor2& w1 = store.get("proj.w1").value;
  if (x.size() != w1.cols())
    throw std::invalid_argument(
        "project_feature: feature length " + std::to_string(x.size()) +
        " does not match projection input " + std::to_string(w1.cols()));
  engine::Tensor2 row(1, x.size(), x);
  const engine::Tensor2 h = engine::relu_forward(
      engine::affine_forward(row, w1, &store.get("proj.b1").value));
  const engine::Tensor2 out = engine::affine_forward(
      h, store.get("proj.w2").value, &store.get("proj.b2").value);
  return out.values();
}

void save_prompt_embeddings(const std::string& path, const PromptSet& set) {
  json j;
  j["mode"] = prompt_mode_name(set.mode);
  j["dim"] = set.dim;
  json prompts = json::array();
  for (std::size_t i = 0; i < set.prompts.size(); ++i) {
    json p;
    p["text"] = set.prompts[i];
    p["embedding"] = set.embeddings[i];
    prompts.push_back(std::move(p));
  }
  j["prompts"] = std::move(prompts);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embeddings file: " + path);
  out << j.dump(2) << '\n';
}

PromptSet load_prompt_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw data::ParseError("cannot open embeddings file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw data::ParseError(path + ": " + e.what());
  }
  PromptSet set;
  try {
    set.mode = prompt_mode_from_name(j.at("mode").get<std::string>());
    set.dim = j.at("dim").get<std::size_t>();
    for (const json& p : j.at("prompts")) {
      set.prompts.push_back(p.at("text").get<std::string>());
      set.embeddings.push_back(p.at("embedding").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw data::ParseError(path + ": " + e.what());
  }
  if (set.prompts.empty())
    throw data::ValidationError(path + ": prompt list must not be empty");
  for (std::size_t i = 0; i < set.embeddings.size(); ++i)
    if (set.embeddings[i].size() != set.dim)
      throw data::ValidationError(
          path + ": prompt '" + set.prompts[i] + "' has dimension " +
          std::to_string(set.embeddings[i].size()) + ", expected " +
          std::to_string(set.dim));
  return set;
}

}  // namespace skelscore::text
