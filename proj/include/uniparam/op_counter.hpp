// Copyright 2026 The uniparam developers
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

#pragma once

#include <cstdint>

namespace uniparam {

/// Per-invocation instrumentation of scalar floating-point work. Kernels add
/// their multiply/add counts at loop granularity, which makes the totals
/// machine-independent and therefore usable as the primary benchmark signal
/// (wall time on a shared box is informational only).
///
/// Counting convention: one fused multiply-add counts as 2 ops; a bare sign
/// flip or add counts as 1. Callers pass nullptr when they do not care.
struct OpCounter {
  std::uint64_t flops = 0;

  void add(std::uint64_t n) noexcept { flops += n; }
  void reset() noexcept { flops = 0; }
};

inline void count_flops(OpCounter* counter, std::uint64_t n) {
  if (counter != nullptr) counter->add(n);
}

}  // namespace uniparam
