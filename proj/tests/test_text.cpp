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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "skelscore/clip.hpp"
#include "skelscore/tape.hpp"
#include "skelscore/text_alignment.hpp"
#include "testutil.hpp"

using skelscore::data::ParseError;
using skelscore::data::ValidationError;
using skelscore::engine::ParamStore;
using skelscore::engine::Tape;
using skelscore::engine::Tensor2;
using namespace skelscore::text;

namespace {

ToyTextEncoder small_encoder() { return {.hash_size = 64, .embed_dim = 8}; }

ParamStore text_store(const ToyTextEncoder& enc, std::uint64_t seed) {
  ParamStore store;
  std::mt19937_64 rng(seed);
  init_text_params(store, enc, rng);
  return store;
}

}  // namespace

TEST_CASE("tokenize_text lowercases and splits on non-alphanumerics") {
  const auto tokens = tokenize_text("Hello, World! A-B  c42");
  REQUIRE(tokens.size() == 5);
  CHECK(tokens[0] == "hello");
  CHECK(tokens[1] == "world");
  CHECK(tokens[2] == "a");
  CHECK(tokens[3] == "b");
  CHECK(tokens[4] == "c42");

  CHECK(tokenize_text("...!?").empty());
  CHECK(tokenize_text("").empty());
  CHECK(tokenize_text("fight").size() == 1);
}

TEST_CASE("hash_token is stable and in range") {
  const auto h = hash_token("punch", 4096);
  CHECK(h == hash_token("punch", 4096));
  CHECK(h < 4096);
  for (const std::string t : {"a", "b", "walk", "wave", "12", ""})
    CHECK(hash_token(t, 17) < 17);
}

TEST_CASE("prompt mode names round trip") {
  CHECK(prompt_mode_name(PromptMode::kAbnormal) == "abnormal");
  CHECK(prompt_mode_name(PromptMode::kNormal) == "normal");
  CHECK(prompt_mode_from_name("normal") == PromptMode::kNormal);
  CHECK_THROWS_AS(prompt_mode_from_name("weird"), std::invalid_argument);
}

TEST_CASE("text embedding is deterministic with the right width") {
  const auto enc = small_encoder();
  auto store = text_store(enc, 1);
  const auto a = text_embed_values(store, enc, "two people fighting");
  const auto b = text_embed_values(store, enc, "two people fighting");
  REQUIRE(a.size() == enc.embed_dim);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  const auto c = text_embed_values(store, enc, "a person walking");
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_diff |= (a[i] != c[i]);
  CHECK(any_diff);
}

TEST_CASE("token order changes the mean only through membership") {
  // Mean pooling makes token multiplicity matter but position not.
  const auto enc = small_encoder();
  auto store = text_store(enc, 2);
  const auto ab = text_embed_values(store, enc, "punch kick");
  const auto ba = text_embed_values(store, enc, "kick punch");
  for (std::size_t i = 0; i < ab.size(); ++i)
    CHECK(testutil::rel_err(ab[i], ba[i]) < 1e-15);
}

TEST_CASE("tape and tape-free embeddings agree bitwise") {
  const auto enc = small_encoder();
  auto store = text_store(enc, 3);
  Tape tape;
  const auto node = text_embed(tape, store, enc, "someone waving their arm");
  const auto direct = text_embed_values(store, enc, "someone waving their arm");
  const auto& taped = tape.value(node);
  REQUIRE(taped.cols() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(taped.at(0, i) == direct[i]);
}

TEST_CASE("empty text is rejected naming the input") {
  const auto enc = small_encoder();
  auto store = text_store(enc, 4);
  try {
    text_embed_values(store, enc, "!!!");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("!!!") != std::string::npos);
  }
}

TEST_CASE("embed_prompts_builtin fills the set") {
  const auto enc = small_encoder();
  auto store = text_store(enc, 5);
  const std::vector<std::string> prompts{"people fighting", "a hug"};
  const auto set =
      embed_prompts_builtin(prompts, store, enc, PromptMode::kNormal);
  CHECK(set.mode == PromptMode::kNormal);
  CHECK(set.dim == enc.embed_dim);
  REQUIRE(set.prompts.size() == 2);
  REQUIRE(set.embeddings.size() == 2);
  CHECK(set.prompts[1] == "a hug");
  const auto direct = text_embed_values(store, enc, "a hug");
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(set.embeddings[1][i] == direct[i]);

  CHECK_THROWS_AS(embed_prompts_builtin({}, store, enc, PromptMode::kAbnormal),
                  std::invalid_argument);
}

TEST_CASE("prompt embeddings round trip through JSON") {
  const auto enc = small_encoder();
  auto store = text_store(enc, 6);
  const auto set = embed_prompts_builtin({"kick", "shove", "trip"}, store, enc,
                                         PromptMode::kAbnormal);
  const std::string path = "/tmp/skelscore_test_prompts.json";
  save_prompt_embeddings(path, set);
  const auto loaded = load_prompt_embeddings(path);
  CHECK(loaded.mode == set.mode);
  CHECK(loaded.dim == set.dim);
  REQUIRE(loaded.prompts.size() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(loaded.prompts[p] == set.prompts[p]);
    for (std::size_t i = 0; i < set.dim; ++i)
      CHECK(loaded.embeddings[p][i] == set.embeddings[p][i]);  // bit exact
  }
}

TEST_CASE("prompt file errors") {
  const std::string path = "/tmp/skelscore_test_badprompts.json";

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_prompt_embeddings("/tmp/skelscore_nope.json"),
                    ParseError);
  }
  SUBCASE("not json") {
    std::ofstream(path) << "not json";
    CHECK_THROWS_AS(load_prompt_embeddings(path), ParseError);
  }
  SUBCASE("empty prompt list") {
    std::ofstream(path) << R"({"mode":"abnormal","dim":4,"prompts":[]})";
    CHECK_THROWS_AS(load_prompt_embeddings(path), ValidationError);
  }
  SUBCASE("dim mismatch names the prompt") {
    std::ofstream(path)
        << R"({"mode":"abnormal","dim":4,"prompts":[)"
        << R"({"text":"ok","embedding":[1,2,3,4]},)"
        << R"({"text":"short","embedding":[1,2]}]})";
    try {
      load_prompt_embeddings(path);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("short") != std::string::npos);
    }
  }
}

TEST_CASE("projection head maps S to E with the declared shapes") {
  ParamStore store;
  std::mt19937_64 rng(7);
  init_projection_params(store, 12, 8, rng);
  CHECK(store.get("proj.w1").value.rows() == 8);
  CHECK(store.get("proj.w1").value.cols() == 12);
  CHECK(store.get("proj.w2").value.rows() == 8);
  CHECK(store.get("proj.w2").value.cols() == 8);

  const auto y = project_feature(testutil::random_vec(12, rng), store);
  CHECK(y.size() == 8);

  CHECK_THROWS_AS(project_feature(testutil::random_vec(5, rng), store),
                  std::invalid_argument);
}

TEST_CASE("projection tape and value paths agree bitwise") {
  ParamStore store;
  std::mt19937_64 rng(8);
  init_projection_params(store, 6, 4, rng);
  const auto x = testutil::random_vec(6, rng);
  Tape tape;
  const auto node =
      projection_forward(tape, store, tape.input(Tensor2(1, 6, x)));
  const auto direct = project_feature(x, store);
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(tape.value(node).at(0, i) == direct[i]);
}

TEST_CASE("gradients reach the text table through gather and mean") {
  const auto enc = small_encoder();
  auto store = text_store(enc, 9);
  const std::string sentence = "fast punches thrown";

  auto loss = [&]() {
    Tape tape;
    return tape.scalar_value(
        tape.sum_all(text_embed(tape, store, enc, sentence)));
  };

  store.zero_grads();
  {
    Tape tape;
    tape.backpropagate(tape.sum_all(text_embed(tape, store, enc, sentence)));
  }

  const auto row = hash_token("fast", enc.hash_size);
  auto& table = store.get("text.table");
  const std::size_t index = row * enc.embed_dim;  // first column of that row
  const double analytic = table.grad.data()[index];
  const double numeric = testutil::central_diff(table.value, index, loss);
  CHECK(testutil::rel_err(analytic, numeric) < 1e-4);

  auto& w = store.get("text.w");
  const double w_analytic = w.grad.data()[3];
  const double w_numeric = testutil::central_diff(w.value, 3, loss);
  CHECK(testutil::rel_err(w_analytic, w_numeric) < 1e-4);
}
