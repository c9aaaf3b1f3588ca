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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "uniparam/linalg.hpp"

namespace uniparam {

/// Group-wise affine integer quantization of trainable parameters.
///
/// Each group of g consecutive values is quantized to n-bit codes on the grid
///   theta_q = round((theta - mu) / beta) * beta + mu,
/// with beta = (theta_max - theta_min) / (2^n - 1) and mu = theta_min taken
/// per group. Rounding is round-half-away-from-zero (std::round), pinned so
/// replays are bit-exact.

struct QuantConfig {
  int bits = 8;
  Index group_size = 128;
  int scale_bits = 16;  // storage precision of beta and mu in the blob
  double kappa = 0.0;   // adaptive-loading exponent (0 = uniform)
};

struct QuantizedGroup {
  int bits = 0;
  Index count = 0;     // number of values in the group
  double beta = 0.0;   // grid step (0 for constant or pruned groups)
  double mu = 0.0;     // grid origin (group minimum)
  double delta = 0.0;  // value range theta_max - theta_min of the group
  std::vector<std::uint32_t> codes;  // empty when pruned (bits == 0)

  /// decode(code) = code * beta + mu; stays inside [theta_min, theta_max].
  Vector dequantize() const;
};

/// Quantize one group. bits == 0 marks the group pruned: no codes are kept
/// and the group dequantizes to zeros (the parameters are structurally
/// removed). A constant group (delta == 0) sets beta = 0 and all codes to 0,
/// so it dequantizes to mu exactly.
QuantizedGroup quantize_group(const Vector& theta, int bits);

/// Quantize a flat vector in groups of cfg.group_size (the final group may be
/// shorter). Per-group bit widths may be supplied for adaptive loading;
/// when omitted every group uses cfg.bits.
std::vector<QuantizedGroup> quantize(const Vector& theta, const QuantConfig& cfg,
                                     const std::vector<int>* per_group_bits = nullptr);

Vector dequantize(const std::vector<QuantizedGroup>& groups);

/// Fake-quantization forward (quantize then dequantize in one call): the
/// value seen by any consumer during quantization-aware training.
Vector quantize_dequantize(const Vector& theta, const QuantConfig& cfg);

/// Straight-through backward of quantize_dequantize: the upstream gradient
/// unchanged, bit for bit. Exists as a named operation so the declared
/// surrogate (identity) is explicit and testable.
Vector ste_backward(const Vector& upstream);

/// Exact rational, used for bits-per-parameter accounting so table entries
/// like 4 + 32/128 = 4.25 never pass through binary rounding.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

Rational make_rational(std::uint64_t num, std::uint64_t den);

/// Storage cost per parameter: n + 2*scale_bits/g bits (n payload bits plus
/// the amortized group header of one scale and one zero value).
Rational bits_per_param(int bits, Index group_size, int scale_bits = 16);

/// Bytes needed for `count` parameters at the given per-parameter bit cost,
/// rounded up to a whole byte: ceil(count * bits / 8). Integer-exact.
std::uint64_t memory_bytes(std::uint64_t count, const Rational& bits);

enum class BitLoadRule {
  // q_i = clamp(round(q + log2(delta_i^kappa / mean)), 0, max). Reduces to
  // uniform q at kappa = 0 and at equal ranges, as the limiting behaviour
  // requires.
  kCorrected,
  // q_i = clamp(round(q * log2(delta_i^kappa / mean)), 0, max), kept verbatim
  // from the source formula for comparison; it does not reproduce the uniform
  // limits (see the corrected rule).
  kVerbatim,
};

/// Per-group bit widths from per-group value ranges. Zero bits = pruned.
/// mean is the arithmetic mean of delta_i^kappa; if every range is zero the
/// allocation falls back to uniform base bits.
std::vector<int> adaptive_bit_load(const std::vector<double>& deltas, int base_bits,
                                   double kappa, int max_bits,
                                   BitLoadRule rule = BitLoadRule::kCorrected);

/// IEEE 754 binary16 conversions (round to nearest, ties to even), used for
/// the serialized beta/mu headers. In-memory groups keep full doubles; only
/// the blob pays the 16-bit precision accounted by bits_per_param.
std::uint16_t float_to_half(float value);
float half_to_float(std::uint16_t bits);

/// Blob layout (all little-endian):
///   magic "UPQB", u8 version = 1, u8 bits, u16 scale_bits,
///   u32 group_size, u32 group_count, u64 total_value_count,
/// then per group: u16 beta (binary16), u16 mu (binary16), codes packed
/// n bits each, LSB-first within each byte, padded to a byte boundary.
std::vector<std::byte> serialize_quantized(const std::vector<QuantizedGroup>& groups,
                                           const QuantConfig& cfg);
std::vector<QuantizedGroup> parse_quantized(const std::vector<std::byte>& blob,
                                            QuantConfig* cfg_out = nullptr);

}  // namespace uniparam
