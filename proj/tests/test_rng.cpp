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

#include <doctest.h>

#include <cmath>

#include "uniparam/rng.hpp"

namespace uniparam {

TEST_CASE("same seed replays the same sequence") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams differ by slot and match on replay") {
  Rng a = Rng::stream(7, {1});
  Rng b = Rng::stream(7, {2});
  Rng a2 = Rng::stream(7, {1});
  CHECK(a.next_u64() != b.next_u64());
  CHECK(Rng::stream(7, {1}).next_u64() == a2.next_u64());

  // Deeper paths are distinct from their prefixes.
  CHECK(Rng::stream(7, {1, 1}).next_u64() != Rng::stream(7, {1}).next_u64());
}

TEST_CASE("uniform respects its bounds") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-0.25, 0.5);
    CHECK(v >= -0.25);
    CHECK(v < 0.5);
  }
}

TEST_CASE("unit draws lie in [0, 1)") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.unit();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("below(n) stays in range and hits every residue eventually") {
  Rng rng(11);
  bool seen[5] = {false, false, false, false, false};
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t v = rng.below(5);
    REQUIRE(v < 5);
    seen[v] = true;
  }
  for (const bool s : seen) CHECK(s);
}

TEST_CASE("normal draws have sane first moments") {
  Rng rng(123);
  double sum = 0.0;
  double sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

}  // namespace uniparam
