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

#include <optional>
#include <string>
#include <string_view>

#include "uniparam/lie_params.hpp"
#include "uniparam/operator.hpp"

namespace uniparam {

/// Maps from Lie parameters to an orthogonal matrix.
enum class MapKind {
  kExponential,  // Q = exp(A), scaling-and-squaring
  kTaylor,       // Q = sum_{p<=P} A^p / p!
  kCayley,       // Q = (I+A)(I-A)^{-1}
  kNeumann,      // Q = (I+A) sum_{p<=P} A^p, Cayley's series expansion
  kHouseholder,  // product of reflections I - 2 vhat vhat^T over columns
  kGivens,       // product of plane rotations G_{n-k}(B_{n,k})
};

/// Series order used where accuracy matters (matches the reference
/// experiment setting) and a light order for throughput comparisons.
inline constexpr int kAccuracyOrder = 18;
inline constexpr int kSpeedOrder = 3;

struct MapSpec {
  MapKind kind = MapKind::kTaylor;
  int order = kAccuracyOrder;  // used by Taylor and Neumann only
};

std::string map_kind_name(MapKind kind);
MapKind parse_map_kind(std::string_view name);  // throws std::invalid_argument

/// Generic dense matrix exponential: scaling-and-squaring around a fixed
/// internal series order. Used by the exponential map and its adjoint.
Matrix matrix_exp(const Matrix& m);

/// Dense Cayley transform of a skew generator. (I+A) commutes with
/// (I-A)^{-1} (both are rational functions of A), so one LU solve suffices.
Matrix cayley_of_skew(const Matrix& a);

// The six parameter-level constructions.
Matrix exp_map(const LieParams& params);
Matrix taylor_map(const LieParams& params, int order = kAccuracyOrder);
Matrix cayley_map(const LieParams& params);
Matrix neumann_map(const LieParams& params, int order = kAccuracyOrder);
Matrix householder_map(const LieParams& params);
Matrix givens_map(const LieParams& params);

Matrix materialize_map(const LieParams& params, const MapSpec& spec,
                       OpCounter* counter = nullptr);

/// y = Q x (or Q^T x) without materializing Q. Series and gate-product maps
/// run in O((P+1) N' K) / O(N' K); the exponential and Cayley maps have no
/// contracted form and fall back to their dense construction.
Vector contracted_apply(const LieParams& params, const MapSpec& spec, const Vector& x,
                        bool transpose = false, OpCounter* counter = nullptr);

/// First K columns of Q: a Stiefel point with U^T U = I_K within the parent
/// map's tolerance.
Matrix stiefel_truncate(const Matrix& q, Index k);

/// Adapter for the row convention (first K rows, transposed back to N x K).
Matrix stiefel_truncate_rows(const Matrix& q, Index k);

/// Orthogonality tolerance a well-conditioned instance of the map must meet;
/// nullopt for the truncated Neumann series, which degrades by design as
/// ||A|| approaches 1. The Taylor figure assumes the accuracy order (18) and
/// small parameters (init scale <= 0.01) so the truncated tail sits below
/// the solver-grade threshold.
std::optional<double> unitarity_tolerance(MapKind kind, Index n_prime);

/// UnitaryOperator facade over (LieParams, MapSpec).
class LieMapOperator final : public UnitaryOperator {
 public:
  LieMapOperator(LieParams params, MapSpec spec);

  const LieParams& params() const { return params_; }
  const MapSpec& spec() const { return spec_; }

  Index dim() const override { return params_.n_prime(); }
  Vector apply(const Vector& x, bool transpose, OpCounter* counter) const override;
  Matrix materialize(OpCounter* counter) const override;
  Vector apply_vjp(const Vector& x, const Vector& ybar, bool transpose, GradMap& grads,
                   OpCounter* counter) const override;
  void collect_stores(std::vector<ParamStorePtr>& out) const override;

 private:
  LieParams params_;
  MapSpec spec_;
};

}  // namespace uniparam
