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

#include "uniparam/op_counter.hpp"
#include "uniparam/param_store.hpp"
#include "uniparam/rng.hpp"

namespace uniparam {

/// Trainable real diagonal factor of length K: y = values ⊙ x.
class RealDiag {
 public:
  static RealDiag zeros(Index k, std::string name = "diag");
  static RealDiag random(Index k, double scale, std::uint64_t seed, std::string name = "diag");
  explicit RealDiag(ParamStorePtr store);

  Index dim() const { return store_->size(); }
  const ParamStorePtr& store() const { return store_; }

  Vector apply(const Vector& x, OpCounter* counter = nullptr) const;

  /// xbar = values ⊙ ybar; accumulates values_bar = ybar ⊙ x.
  Vector apply_vjp(const Vector& x, const Vector& ybar, GradMap& grads,
                   OpCounter* counter = nullptr) const;

 private:
  ParamStorePtr store_;
};

enum class RademacherMode { kDeterministic, kSampled };

/// Binary ±1 diagonal driven by real logits through a two-class argmax over
/// (logit, -logit). The hard forward is exactly ±1 (so the diagonal squares
/// to the identity); gradients flow through the straight-through softmax
/// surrogate, whose two-class form is tanh(logit/tau).
class RademacherDiag {
 public:
  static RademacherDiag zeros(Index k, double tau = 1.0, std::string name = "rademacher");
  static RademacherDiag random(Index k, double scale, std::uint64_t seed, double tau = 1.0,
                               std::string name = "rademacher");
  RademacherDiag(ParamStorePtr store, double tau);

  Index dim() const { return store_->size(); }
  const ParamStorePtr& store() const { return store_; }
  double tau() const { return tau_; }

  /// Selects the halved second-order estimator slope instead of the plain
  /// straight-through slope (see logit_vjp).
  void set_reinmax(bool on) { reinmax_ = on; }
  bool reinmax() const { return reinmax_; }

  /// Deterministic argmax signs: +1 where the logit is >= 0 (ties to +1).
  /// Invariant under positive rescaling of the logits.
  Vector hard_signs() const;

  /// Sampled signs from an explicit stream: P(+1) = sigmoid(2 logit / tau).
  Vector sampled_signs(Rng& rng) const;

  /// The smooth surrogate tanh(logit / tau) in (-1, 1).
  Vector surrogate() const;

  /// Forward signs as the rest of the stack consumes them: hard by default,
  /// the surrogate inside a SurrogateForwardGuard (so finite differences
  /// probe the function the backward pass differentiates).
  Vector forward() const;

  /// Gradient over logits for upstream adjoints on the sign vector:
  ///   upstream_i * (1 - tanh^2(logit_i / tau)) / tau
  /// (halved when the reinmax flag is set: with two classes the midpoint
  /// renormalization of the second-order estimator is affine and its slope
  /// reduces to exactly half the straight-through slope).
  Vector logit_vjp(const Vector& upstream) const;

  /// y = forward() ⊙ x.
  Vector apply(const Vector& x, OpCounter* counter = nullptr) const;

  /// xbar = forward() ⊙ ybar (the forward is linear in x, so this is exact);
  /// accumulates logit gradients through the surrogate slope.
  Vector apply_vjp(const Vector& x, const Vector& ybar, GradMap& grads,
                   OpCounter* counter = nullptr) const;

 private:
  ParamStorePtr store_;
  double tau_ = 1.0;
  bool reinmax_ = false;
};

}  // namespace uniparam
