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
#include <string>

#include "uniparam/linalg.hpp"
#include "uniparam/op_counter.hpp"
#include "uniparam/param_store.hpp"

namespace uniparam {

/// How the N'xK parameter matrix B_K occupies the square generator B.
enum class FillMode {
  /// Column k (1-based) populates the sub-diagonal entries (k+1..N', k) of B;
  /// entries on or above the diagonal of the embedded column are structural
  /// zeros. This is the canonical strictly-lower-triangular fill.
  kTriangle,
  /// Every entry of B_K is a free parameter (used by reflection columns that
  /// are not triangle-constrained). skew_assemble still reads only the
  /// strictly-lower portion of the embedded columns.
  kFree,
};

/// Values held by the frozen columns (index >= K') at initialization.
enum class FrozenFill { kZero, kRandom };

/// The low-rank Lie-algebra parameter block: an N'xK matrix B_K stored
/// column-major as one flat ParamStore, with only the first K' columns
/// trainable. The skew generator is A = B - B^T where B embeds B_K.
class LieParams {
 public:
  static LieParams zeros(Index n_prime, Index k, FillMode mode = FillMode::kTriangle,
                         Index k_prime = -1, std::string name = "lie");

  /// Structural entries of the first K' columns drawn from
  /// uniform(-scale, scale); frozen columns per `frozen`. Draws happen in
  /// column-major order over structural entries, so a (seed, shape) pair
  /// pins the values exactly.
  static LieParams random(Index n_prime, Index k, double scale, std::uint64_t seed,
                          FillMode mode = FillMode::kTriangle, Index k_prime = -1,
                          FrozenFill frozen = FrozenFill::kZero, std::string name = "lie");

  Index n_prime() const { return n_; }
  Index rank() const { return k_; }
  Index intrinsic_rank() const { return k_prime_; }
  FillMode mode() const { return mode_; }

  /// Effective (possibly fake-quantized) B_K.
  Matrix matrix() const;
  /// Master full-precision B_K.
  Matrix raw_matrix() const;

  const ParamStorePtr& store() const { return store_; }

  /// True when (i, k) is a structural parameter slot (not a triangle zero).
  bool entry_active(Index i, Index k) const;

  Index trainable_count() const { return store_->trainable_count(); }

 private:
  LieParams(Index n, Index k, Index k_prime, FillMode mode, ParamStorePtr store);

  Index n_ = 0;
  Index k_ = 0;
  Index k_prime_ = 0;
  FillMode mode_ = FillMode::kTriangle;
  ParamStorePtr store_;
};

/// N'(N'-1)/2 — the number of strictly-lower-triangular slots.
Index lie_triangle_capacity(Index n_prime);

/// Number of structural parameter entries for the given shape.
Index lie_active_entry_count(Index n_prime, Index k, FillMode mode);

/// Assemble the dense skew generator A = B - B^T from the effective values.
/// Exactly antisymmetric by construction: A(i,k) and A(k,i) are written from
/// the same scalar.
Matrix skew_assemble(const LieParams& params);

/// Core of skew_assemble on a raw N'xK snapshot (strictly-lower entries of
/// the embedded columns are read; anything else is ignored).
Matrix skew_assemble_b(const Matrix& b);

/// Matrix-free y = A x (or A^T x = -A x) straight from the column snapshot,
/// in O(N'K) instead of O(N'^2). `b` uses only strictly-lower entries.
Vector skew_apply_b(const Matrix& b, const Vector& x, bool transpose = false,
                    OpCounter* counter = nullptr);

Vector skew_apply(const LieParams& params, const Vector& x, bool transpose = false,
                  OpCounter* counter = nullptr);

/// Zero gradient entries of frozen columns (and structural zeros); trainable
/// entries pass through unchanged.
Matrix mask_gradient(const LieParams& params, Matrix grad);

}  // namespace uniparam
