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
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uniparam/csd.hpp"
#include "uniparam/diag_nodes.hpp"
#include "uniparam/grad.hpp"

namespace uniparam {

struct MatrixShape {
  std::string name;
  Index rows = 0;
  Index cols = 0;
};

/// The set of adapted weight matrices of a frozen model: hidden size and
/// layer count expand into one (rows, cols) entry per adapted projection per
/// layer.
struct ModelGeometry {
  std::string name;
  Index hidden = 0;
  int layer_count = 0;
  std::vector<std::string> projections;
  std::vector<MatrixShape> matrices;

  static ModelGeometry custom(std::string name, Index hidden, int layer_count,
                              std::vector<std::string> projections);

  /// Shipped presets: "deberta-base" (hidden 768, 12 layers, query+value ->
  /// 24 square matrices) and "llama31-405b" (hidden 16384, 126 layers,
  /// query+value -> 252). Throws std::invalid_argument for unknown names.
  static ModelGeometry preset(std::string_view name);
};

/// Low-rank baseline accounting: K (rows + cols) per adapted matrix.
Index lora_param_count(Index rows, Index cols, Index rank);
Index lora_param_count(const ModelGeometry& geometry, Index rank);

/// "36.9K" / "8.26M" style formatting. `unit` is 'K' or 'M'; one decimal,
/// except two decimals for sub-10 values in the 'M' unit. human_count picks
/// the unit by magnitude (>= 1e6 -> M, >= 1e3 -> K, plain integer below).
std::string format_count(std::uint64_t count, char unit);
std::string human_count(std::uint64_t count);

/// Mebibytes with two decimals, e.g. "0.14MB".
std::string format_mb(std::uint64_t bytes);

enum class LambdaKind { kReal, kRademacher };

/// The rank-K multiplicative update for one frozen matrix W (rows x cols):
///   y = W x + (alpha / K) * U (Lambda (V^T x)),
/// with U the first K columns of an orthogonal rows x rows operator and V
/// the first K columns of an orthogonal cols x cols operator — both applied
/// matrix-free (pad / truncate instead of slicing a dense Q). Lambda starts
/// at zero, so a freshly constructed adapter leaves the frozen forward
/// bit-identical (real Lambda only; the Rademacher variant has ±1 entries by
/// construction).
class Adapter {
 public:
  struct Config {
    Index rows = 0;
    Index cols = 0;
    Index rank = 1;
    double alpha = 32.0;
    LambdaKind lambda = LambdaKind::kReal;
    double tau = 1.0;        // Rademacher temperature
    CsdConfig unitary;       // leaf kind, circuit depth, Lie shape, init, seed
  };

  explicit Adapter(const Config& config);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return rank_; }
  double alpha() const { return alpha_; }

  const UnitaryOperator& u() const { return *u_; }
  const UnitaryOperator& v() const { return *v_; }
  const RealDiag* real_lambda() const { return std::get_if<RealDiag>(&lambda_); }
  const RademacherDiag* rademacher_lambda() const {
    return std::get_if<RademacherDiag>(&lambda_);
  }
  RademacherDiag* rademacher_lambda() { return std::get_if<RademacherDiag>(&lambda_); }

  /// (alpha / K) * U Lambda V^T x, matrix-free.
  Vector delta_apply(const Vector& x, OpCounter* counter = nullptr) const;

  /// W x + delta_apply(x).
  Vector forward(const Matrix& w, const Vector& x, OpCounter* counter = nullptr) const;

  /// Dense (alpha / K) * U Lambda V^T (for tests and small sizes).
  Matrix materialize_delta(OpCounter* counter = nullptr) const;

  /// Records delta_apply on a tape (differentiable path).
  Tape::NodeId delta_node(Tape& tape, Tape::NodeId x) const;

  std::vector<ParamStorePtr> stores() const;

  /// Exact trainable-scalar enumeration (circuit angles + cosine-sine angles
  /// + unmasked Lie entries + Lambda).
  Index trainable_param_count() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index rank_ = 0;
  double alpha_ = 32.0;
  std::unique_ptr<UnitaryOperator> u_;
  std::unique_ptr<UnitaryOperator> v_;
  std::variant<RealDiag, RademacherDiag> lambda_;
};

}  // namespace uniparam
