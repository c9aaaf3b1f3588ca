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

#include <vector>

#include "uniparam/linalg.hpp"
#include "uniparam/op_counter.hpp"
#include "uniparam/param_store.hpp"

namespace uniparam {

/// A differentiable recipe for an orthogonal N x N matrix Q: circuits,
/// Lie-algebra maps, and cosine-sine compositions all implement this, which
/// is what lets the adapter and the tape treat "some orthogonal Q" uniformly
/// and lets non-power-of-two sizes nest power-of-two blocks.
///
/// All evaluations are pure given a parameter snapshot; implementations hold
/// their scalars in ParamStores and must not cache across mutation.
class UnitaryOperator {
 public:
  virtual ~UnitaryOperator() = default;

  virtual Index dim() const = 0;

  /// y = Q x (or Q^T x). Matrix-free where the parameterization allows it.
  virtual Vector apply(const Vector& x, bool transpose = false,
                       OpCounter* counter = nullptr) const = 0;

  /// Dense Q, column by column through apply unless a subclass has something
  /// cheaper. Intended for moderate dimensions.
  virtual Matrix materialize(OpCounter* counter = nullptr) const;

  /// Reverse-mode step for y = Q x (or Q^T x): accumulates parameter
  /// gradients of <ybar, y> into `grads` and returns the input adjoint
  /// d<ybar, y>/dx. Implementations may recompute forward activations.
  virtual Vector apply_vjp(const Vector& x, const Vector& ybar, bool transpose,
                           GradMap& grads, OpCounter* counter = nullptr) const = 0;

  virtual void collect_stores(std::vector<ParamStorePtr>& out) const = 0;

  std::vector<ParamStorePtr> stores() const;
  Index trainable_param_count() const;
};

/// The fixed identity — zero parameters. Used for size-1 decomposition
/// leaves.
class IdentityOperator final : public UnitaryOperator {
 public:
  explicit IdentityOperator(Index dim) : dim_(dim) {}

  Index dim() const override { return dim_; }
  Vector apply(const Vector& x, bool transpose, OpCounter* counter) const override;
  Matrix materialize(OpCounter* counter) const override;
  Vector apply_vjp(const Vector& x, const Vector& ybar, bool transpose, GradMap& grads,
                   OpCounter* counter) const override;
  void collect_stores(std::vector<ParamStorePtr>& out) const override;

 private:
  Index dim_;
};

}  // namespace uniparam
