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
#include <cstdint>

#include "oracles.hpp"
#include "uniparam/quantizer.hpp"
#include "uniparam/rng.hpp"

namespace uniparam {

TEST_CASE("grid-aligned group roundtrips exactly") {
  Vector theta(4);
  theta << 0.0, 1.0, 2.0, 3.0;
  const QuantizedGroup g = quantize_group(theta, 2);
  CHECK(g.beta == 1.0);
  CHECK(g.mu == 0.0);
  CHECK(g.delta == 3.0);
  const Vector back = g.dequantize();
  for (Index i = 0; i < 4; ++i) CHECK(back[i] == theta[i]);
}

TEST_CASE("constant group roundtrips exactly via the zero-range guard") {
  const Vector theta = Vector::Constant(3, 0.7631);
  const QuantizedGroup g = quantize_group(theta, 4);
  CHECK(g.beta == 0.0);
  const Vector back = g.dequantize();
  for (Index i = 0; i < 3; ++i) CHECK(back[i] == 0.7631);
}

TEST_CASE("random group error bounded by beta/2 and matches the loop oracle") {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    Vector theta(32);
    for (Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-2.0, 2.0);
    const QuantizedGroup g = quantize_group(theta, 4);
    const Vector back = g.dequantize();
    const Vector oracle = oracles::quantize_roundtrip_oracle(theta, 4);
    for (Index i = 0; i < theta.size(); ++i) {
      CHECK(std::abs(back[i] - theta[i]) <= g.beta / 2.0 + 1e-15);
      CHECK(back[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("roundtrip bound holds across widths on many random groups") {
  Rng rng(77);
  for (int bits = 1; bits <= 8; ++bits) {
    for (int trial = 0; trial < 1250; ++trial) {  // 10^4 groups across widths
      Vector theta(16);
      for (Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-1.0, 1.0);
      const QuantizedGroup g = quantize_group(theta, bits);
      const Vector back = g.dequantize();
      const double bound = g.beta / 2.0 + 1e-15;
      for (Index i = 0; i < theta.size(); ++i) {
        REQUIRE(std::abs(back[i] - theta[i]) <= bound);
        REQUIRE(back[i] >= theta.minCoeff() - 1e-15);
        REQUIRE(back[i] <= theta.maxCoeff() + 1e-15);
      }
    }
  }
}

TEST_CASE("wide codes make fake quantization nearly exact") {
  Rng rng(5);
  Vector theta(64);
  for (Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-1.0, 1.0);
  QuantConfig cfg;
  cfg.bits = 24;
  cfg.group_size = 64;
  const Vector q = quantize_dequantize(theta, cfg);
  const double beta = (theta.maxCoeff() - theta.minCoeff()) / (std::pow(2.0, 24) - 1.0);
  for (Index i = 0; i < theta.size(); ++i)
    CHECK(std::abs(q[i] - theta[i]) <= beta / 2.0 + 1e-15);
}

TEST_CASE("pruned groups (0 bits) dequantize to zeros") {
  Vector theta(5);
  theta << 1.0, -2.0, 3.0, -4.0, 5.0;
  const QuantizedGroup g = quantize_group(theta, 0);
  CHECK(g.codes.empty());
  const Vector back = g.dequantize();
  for (Index i = 0; i < 5; ++i) CHECK(back[i] == 0.0);
}

TEST_CASE("quantize splits into groups and dequantize reassembles") {
  Rng rng(13);
  Vector theta(37);  // deliberately not a multiple of the group size
  for (Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-1.0, 1.0);
  QuantConfig cfg;
  cfg.bits = 6;
  cfg.group_size = 8;
  const auto groups = quantize(theta, cfg);
  CHECK(groups.size() == 5);
  CHECK(groups.back().count == 5);
  const Vector back = dequantize(groups);
  REQUIRE(back.size() == theta.size());
  CHECK((back - quantize_dequantize(theta, cfg)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("straight-through backward is the upstream, bit for bit") {
  Rng rng(21);
  Vector upstream(17);
  for (Index i = 0; i < upstream.size(); ++i) upstream[i] = rng.normal();
  const Vector grad = ste_backward(upstream);
  REQUIRE(grad.size() == upstream.size());
  for (Index i = 0; i < upstream.size(); ++i) CHECK(grad[i] == upstream[i]);
}

TEST_CASE("bits-per-parameter table values are exact rationals") {
  CHECK(bits_per_param(8, 128) == make_rational(33, 4));
  CHECK(bits_per_param(4, 128) == make_rational(17, 4));
  CHECK(bits_per_param(3, 128) == make_rational(13, 4));
  CHECK(bits_per_param(2, 128) == make_rational(9, 4));
  CHECK(bits_per_param(1, 128) == make_rational(5, 4));
  CHECK(bits_per_param(8, 128).value() == 8.25);
  CHECK(bits_per_param(4, 128).value() == 4.25);
  CHECK(bits_per_param(3, 128).value() == 3.25);
  CHECK(bits_per_param(2, 128).value() == 2.25);
  CHECK(bits_per_param(1, 128).value() == 1.25);
}

TEST_CASE("memory accounting rounds up to whole bytes") {
  CHECK(memory_bytes(1000, make_rational(17, 4)) == 532);  // 4250 bits -> 531.25 B
  CHECK(memory_bytes(36864, make_rational(32, 1)) == 147456);
  CHECK(memory_bytes(0, make_rational(17, 4)) == 0);
  CHECK(memory_bytes(1, make_rational(1, 128)) == 1);
}

TEST_CASE("adaptive loading reduces to uniform at kappa = 0") {
  const std::vector<double> deltas = {0.1, 5.0, 0.0, 2.5};
  const auto bits = adaptive_bit_load(deltas, 4, 0.0, 8);
  for (const int b : bits) CHECK(b == 4);
}

TEST_CASE("adaptive loading is uniform for equal ranges at kappa = 1") {
  const std::vector<double> deltas = {0.3, 0.3, 0.3};
  const auto bits = adaptive_bit_load(deltas, 4, 1.0, 8);
  for (const int b : bits) CHECK(b == 4);
}

TEST_CASE("adaptive loading is monotone in the range") {
  const std::vector<double> deltas = {1.0, 2.0, 4.0};
  const auto bits = adaptive_bit_load(deltas, 4, 1.0, 8);
  REQUIRE(bits.size() == 3);
  CHECK(bits[0] <= bits[1]);
  CHECK(bits[1] <= bits[2]);
  CHECK(bits[2] <= 8);
  for (const int b : bits) CHECK(b >= 0);
}

TEST_CASE("verbatim rule is kept for comparison and differs at equal ranges") {
  const std::vector<double> deltas = {0.3, 0.3, 0.3};
  const auto bits = adaptive_bit_load(deltas, 4, 1.0, 8, BitLoadRule::kVerbatim);
  // log2(ratio) = 0 -> q * 0 = 0: the printed formula prunes everything here,
  // which is exactly why the corrected rule is the default.
  for (const int b : bits) CHECK(b == 0);
}

TEST_CASE("half-float conversions roundtrip representable values") {
  const float values[] = {0.0f, 1.0f, -1.0f, 0.5f, 0.09375f, 2048.0f, -0.25f};
  for (const float v : values) CHECK(half_to_float(float_to_half(v)) == v);
  // Rounding stays within one ulp-at-half-precision for small magnitudes.
  const float f = 0.1234f;
  CHECK(std::abs(half_to_float(float_to_half(f)) - f) < 1e-3f);
}

TEST_CASE("blob serialization roundtrips codes exactly") {
  Rng rng(31);
  Vector theta(300);
  for (Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-1.0, 1.0);
  QuantConfig cfg;
  cfg.bits = 3;
  cfg.group_size = 128;
  const auto groups = quantize(theta, cfg);
  const auto blob = serialize_quantized(groups, cfg);
  QuantConfig parsed_cfg;
  const auto parsed = parse_quantized(blob, &parsed_cfg);
  CHECK(parsed_cfg.bits == 3);
  CHECK(parsed_cfg.group_size == 128);
  REQUIRE(parsed.size() == groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    REQUIRE(parsed[g].codes.size() == groups[g].codes.size());
    for (std::size_t i = 0; i < groups[g].codes.size(); ++i)
      CHECK(parsed[g].codes[i] == groups[g].codes[i]);
    // Scales travel as binary16; the dequantized values stay within the
    // coarser of the two grids.
    CHECK(parsed[g].beta ==
          doctest::Approx(groups[g].beta).epsilon(1e-3));
  }
}

}  // namespace uniparam
