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

#include "uniparam/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace uniparam {

Vector QuantizedGroup::dequantize() const {
  if (bits == 0) {
    // Pruned group: the parameters are structurally removed.
    return Vector::Zero(count);
  }
  Vector out(count);
  for (Index i = 0; i < count; ++i) {
    out[i] = static_cast<double>(codes[static_cast<std::size_t>(i)]) * beta + mu;
  }
  return out;
}

QuantizedGroup quantize_group(const Vector& theta, int bits) {
  if (theta.size() == 0) throw std::invalid_argument("quantize_group: empty group");
  if (bits < 0 || bits > 24) throw std::invalid_argument("quantize_group: bits out of range");

  QuantizedGroup group;
  group.bits = bits;
  group.count = theta.size();
  const double lo = theta.minCoeff();
  const double hi = theta.maxCoeff();
  group.mu = lo;
  group.delta = hi - lo;
  if (bits == 0) {
    group.mu = 0.0;
    return group;
  }

  const double levels = static_cast<double>((std::uint64_t{1} << bits) - 1);
  group.codes.assign(static_cast<std::size_t>(theta.size()), 0);
  if (group.delta == 0.0) {
    // Constant group: beta guards to 0, every code is 0, decode gives mu
    // exactly.
    group.beta = 0.0;
    return group;
  }
  group.beta = group.delta / levels;
  for (Index i = 0; i < theta.size(); ++i) {
    double code = std::round((theta[i] - group.mu) / group.beta);
    code = std::clamp(code, 0.0, levels);
    group.codes[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(code);
  }
  return group;
}

std::vector<QuantizedGroup> quantize(const Vector& theta, const QuantConfig& cfg,
                                     const std::vector<int>* per_group_bits) {
  if (cfg.group_size < 1) throw std::invalid_argument("quantize: group size must be positive");
  const Index n = theta.size();
  const std::size_t group_count =
      n == 0 ? 0 : static_cast<std::size_t>((n + cfg.group_size - 1) / cfg.group_size);
  if (per_group_bits != nullptr && per_group_bits->size() != group_count) {
    throw std::invalid_argument("quantize: per-group bit vector has wrong length");
  }
  std::vector<QuantizedGroup> groups;
  groups.reserve(group_count);
  for (std::size_t g = 0; g < group_count; ++g) {
    const Index start = static_cast<Index>(g) * cfg.group_size;
    const Index len = std::min(cfg.group_size, n - start);
    const int bits = per_group_bits != nullptr ? (*per_group_bits)[g] : cfg.bits;
    groups.push_back(quantize_group(theta.segment(start, len), bits));
  }
  return groups;
}

Vector dequantize(const std::vector<QuantizedGroup>& groups) {
  Index total = 0;
  for (const auto& g : groups) total += g.count;
  Vector out(total);
  Index at = 0;
  for (const auto& g : groups) {
    out.segment(at, g.count) = g.dequantize();
    at += g.count;
  }
  return out;
}

Vector quantize_dequantize(const Vector& theta, const QuantConfig& cfg) {
  if (theta.size() == 0) return theta;
  return dequantize(quantize(theta, cfg));
}

Vector ste_backward(const Vector& upstream) { return upstream; }

Rational make_rational(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw std::invalid_argument("make_rational: zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return Rational{num / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
}

Rational bits_per_param(int bits, Index group_size, int scale_bits) {
  if (bits < 0 || scale_bits < 0 || group_size < 1) {
    throw std::invalid_argument("bits_per_param: invalid arguments");
  }
  const std::uint64_t g = static_cast<std::uint64_t>(group_size);
  return make_rational(static_cast<std::uint64_t>(bits) * g +
                           2 * static_cast<std::uint64_t>(scale_bits),
                       g);
}

std::uint64_t memory_bytes(std::uint64_t count, const Rational& bits) {
  // ceil(count * bits / 8) in exact integer arithmetic.
  const std::uint64_t den = 8 * bits.den;
  return (count * bits.num + den - 1) / den;
}

std::vector<int> adaptive_bit_load(const std::vector<double>& deltas, int base_bits,
                                   double kappa, int max_bits, BitLoadRule rule) {
  if (base_bits < 0 || max_bits < 0 || kappa < 0.0) {
    throw std::invalid_argument("adaptive_bit_load: negative argument");
  }
  std::vector<double> powered(deltas.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] < 0.0) throw std::invalid_argument("adaptive_bit_load: negative range");
    powered[i] = std::pow(deltas[i], kappa);  // pow(0, 0) == 1: kappa = 0 ignores ranges
    mean += powered[i];
  }
  if (!deltas.empty()) mean /= static_cast<double>(deltas.size());

  std::vector<int> out(deltas.size(), 0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    double raw;
    if (mean == 0.0) {
      // Every range is zero: nothing distinguishes the groups, fall back to
      // uniform loading.
      raw = static_cast<double>(base_bits);
    } else if (rule == BitLoadRule::kCorrected) {
      raw = std::round(static_cast<double>(base_bits) + std::log2(powered[i] / mean));
    } else {
      raw = std::round(static_cast<double>(base_bits) * std::log2(powered[i] / mean));
    }
    raw = std::clamp(raw, 0.0, static_cast<double>(max_bits));
    out[i] = static_cast<int>(raw);
  }
  return out;
}

std::uint16_t float_to_half(float value) {
  const std::uint32_t f = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t sign = (f >> 16) & 0x8000u;
  const std::uint32_t exp = (f >> 23) & 0xffu;
  std::uint32_t mant = f & 0x7fffffu;

  if (exp == 0xffu) {  // inf / NaN; keep NaN payload top bits, force quiet bit
    return static_cast<std::uint16_t>(sign | 0x7c00u |
                                      (mant != 0 ? (0x200u | (mant >> 13)) : 0u));
  }
  const int new_exp = static_cast<int>(exp) - 127 + 15;
  if (new_exp >= 0x1f) return static_cast<std::uint16_t>(sign | 0x7c00u);  // overflow
  if (new_exp <= 0) {
    if (new_exp < -10) return static_cast<std::uint16_t>(sign);  // underflow to zero
    // Subnormal half: shift the (implicit-1) mantissa into place with
    // round-to-nearest-even.
    mant |= 0x800000u;
    const int shift = 14 - new_exp;
    std::uint32_t half_mant = mant >> shift;
    const std::uint32_t rem = mant & ((1u << shift) - 1u);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (half_mant & 1u))) half_mant += 1;
    return static_cast<std::uint16_t>(sign | half_mant);
  }
  std::uint32_t half = sign | (static_cast<std::uint32_t>(new_exp) << 10) | (mant >> 13);
  const std::uint32_t rem = mant & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) half += 1;  // may carry into exp
  return static_cast<std::uint16_t>(half);
}

float half_to_float(std::uint16_t bits) {
  const std::uint32_t sign = static_cast<std::uint32_t>(bits & 0x8000u) << 16;
  const std::uint32_t exp = (bits >> 10) & 0x1fu;
  std::uint32_t mant = bits & 0x3ffu;
  std::uint32_t f;
  if (exp == 0) {
    if (mant == 0) {
      f = sign;
    } else {
      int e = -1;
      do {
        mant <<= 1;
        ++e;
      } while (!(mant & 0x400u));
      mant &= 0x3ffu;
      f = sign | (static_cast<std::uint32_t>(127 - 15 - e) << 23) | (mant << 13);
    }
  } else if (exp == 0x1fu) {
    f = sign | 0x7f800000u | (mant << 13);
  } else {
    f = sign | ((exp - 15 + 127) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(f);
}

namespace {

void append_bytes(std::vector<std::byte>& out, const void* data, std::size_t n) {
  const auto* p = static_cast<const std::byte*>(data);
  out.insert(out.end(), p, p + n);
}

template <typename T>
void append_le(std::vector<std::byte>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T read_le(const std::vector<std::byte>& in, std::size_t& at) {
  if (at + sizeof(T) > in.size()) throw std::invalid_argument("quantized blob truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<std::uint8_t>(in[at + i])) << (8 * i);
  }
  at += sizeof(T);
  return value;
}

constexpr char kMagic[4] = {'U', 'P', 'Q', 'B'};

}  // namespace

std::vector<std::byte> serialize_quantized(const std::vector<QuantizedGroup>& groups,
                                           const QuantConfig& cfg) {
  std::uint64_t total = 0;
  for (const auto& g : groups) {
    if (g.bits != cfg.bits) {
      throw std::invalid_argument(
          "serialize_quantized: blob format stores one bit width; group differs");
    }
    total += static_cast<std::uint64_t>(g.count);
  }
  std::vector<std::byte> out;
  append_bytes(out, kMagic, 4);
  append_le<std::uint8_t>(out, 1);  // version
  append_le<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.bits));
  append_le<std::uint16_t>(out, static_cast<std::uint16_t>(cfg.scale_bits));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.group_size));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(groups.size()));
  append_le<std::uint64_t>(out, total);

  for (const auto& g : groups) {
    append_le<std::uint16_t>(out, float_to_half(static_cast<float>(g.beta)));
    append_le<std::uint16_t>(out, float_to_half(static_cast<float>(g.mu)));
    // Pack codes LSB-first: bit b of the stream lands in byte b/8, bit b%8.
    const int n = g.bits;
    std::vector<std::byte> packed((static_cast<std::size_t>(g.count) * n + 7) / 8,
                                  std::byte{0});
    std::size_t cursor = 0;
    for (Index i = 0; i < g.count; ++i) {
      const std::uint32_t code = g.codes[static_cast<std::size_t>(i)];
      for (int b = 0; b < n; ++b, ++cursor) {
        if ((code >> b) & 1u) {
          packed[cursor / 8] |= static_cast<std::byte>(1u << (cursor % 8));
        }
      }
    }
    out.insert(out.end(), packed.begin(), packed.end());
  }
  return out;
}

std::vector<QuantizedGroup> parse_quantized(const std::vector<std::byte>& blob,
                                            QuantConfig* cfg_out) {
  std::size_t at = 0;
  if (blob.size() < 4 || std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw std::invalid_argument("quantized blob: bad magic");
  }
  at = 4;
  const auto version = read_le<std::uint8_t>(blob, at);
  if (version != 1) throw std::invalid_argument("quantized blob: unknown version");
  QuantConfig cfg;
  cfg.bits = read_le<std::uint8_t>(blob, at);
  cfg.scale_bits = read_le<std::uint16_t>(blob, at);
  cfg.group_size = read_le<std::uint32_t>(blob, at);
  const auto group_count = read_le<std::uint32_t>(blob, at);
  auto total = read_le<std::uint64_t>(blob, at);
  if (cfg.bits < 1) throw std::invalid_argument("quantized blob: zero bit width");

  const double levels = static_cast<double>((std::uint64_t{1} << cfg.bits) - 1);
  std::vector<QuantizedGroup> groups;
  groups.reserve(group_count);
  for (std::uint32_t gi = 0; gi < group_count; ++gi) {
    QuantizedGroup g;
    g.bits = cfg.bits;
    g.beta = static_cast<double>(half_to_float(read_le<std::uint16_t>(blob, at)));
    g.mu = static_cast<double>(half_to_float(read_le<std::uint16_t>(blob, at)));
    g.count = static_cast<Index>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.group_size), total));
    if (g.count == 0) throw std::invalid_argument("quantized blob: count mismatch");
    total -= static_cast<std::uint64_t>(g.count);
    g.delta = g.beta * levels;
    const std::size_t nbytes = (static_cast<std::size_t>(g.count) * cfg.bits + 7) / 8;
    if (at + nbytes > blob.size()) throw std::invalid_argument("quantized blob truncated");
    g.codes.assign(static_cast<std::size_t>(g.count), 0);
    std::size_t cursor = 0;
    for (Index i = 0; i < g.count; ++i) {
      std::uint32_t code = 0;
      for (int b = 0; b < cfg.bits; ++b, ++cursor) {
        const auto byte = static_cast<std::uint8_t>(blob[at + cursor / 8]);
        code |= static_cast<std::uint32_t>((byte >> (cursor % 8)) & 1u) << b;
      }
      g.codes[static_cast<std::size_t>(i)] = code;
    }
    at += nbytes;
    groups.push_back(std::move(g));
  }
  if (total != 0) throw std::invalid_argument("quantized blob: count mismatch");
  if (cfg_out != nullptr) *cfg_out = cfg;
  return groups;
}

}  // namespace uniparam
