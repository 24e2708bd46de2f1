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

#include "skelscore/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace skelscore::kernels {

// Defined in kernels_avx2.cpp; returns nullptr when that TU was built
// without AVX2 support.
const Ops* avx2_table();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* pick(std::string_view name) {
  if (name == "scalar") return &scalar_ops();
  if (name == "avx2") {
    const Ops* t = avx2_supported() ? avx2_table() : nullptr;
    if (!t) throw std::runtime_error("kernels: avx2 not available on this build/CPU");
    return t;
  }
  if (name == "auto") {
    if (avx2_supported()) return avx2_table();
    return &scalar_ops();
  }
  throw std::runtime_error("kernels: unknown variant '" + std::string(name) +
                           "' (expected auto, scalar or avx2)");
}

const Ops* initial_table() {
  if (const char* env = std::getenv("SKELSCORE_KERNELS")) return pick(env);
  return pick("auto");
}

const Ops*& active_slot() {
  static const Ops* slot = initial_table();
  return slot;
}

}  // namespace

bool avx2_supported() {
  static const bool ok = avx2_table() != nullptr && cpu_has_avx2();
  return ok;
}

const Ops* avx2_ops() { return avx2_supported() ? avx2_table() : nullptr; }

const Ops& active() { return *active_slot(); }

void select(std::string_view name) { active_slot() = pick(name); }

std::string_view active_name() { return active().name; }

}  // namespace skelscore::kernels
