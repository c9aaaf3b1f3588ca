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

#include "uniparam/operator.hpp"
#include "uniparam/unitary_maps.hpp"

namespace uniparam {

/// Recursive size split for non-power-of-two dimensions: N = N1 + N2 with
/// N1 the largest power of two below N; N1 stays a leaf, N2 splits again
/// until it is a power of two (or 1).
struct SplitPlan {
  Index size = 0;
  bool leaf = true;                  // power-of-two (or size-1) node
  Index major = 0;                   // N1 when split
  std::unique_ptr<SplitPlan> minor;  // the N2 branch when split
};

SplitPlan split_plan(Index n);

/// Compact one-line rendering: "leaf(8)", "(8, 4)", "(16, (8, 4))".
std::string plan_compact(const SplitPlan& plan);

/// Indented multi-line rendering for the CLI.
std::string plan_tree(const SplitPlan& plan);

/// What fills the power-of-two leaves of a composed operator.
enum class LeafKind { kPauli, kLieMap };

struct CsdConfig {
  LeafKind leaf = LeafKind::kPauli;
  int layers = 1;                        // circuit leaves: entangling layers
  Index rank = 4;                        // map leaves: Lie columns K
  MapSpec map = {MapKind::kTaylor, kAccuracyOrder};
  double init_scale = 0.0;               // 0 -> zero-initialized leaves
  std::uint64_t seed = 0;
};

/// Orthogonal N x N operator for non-power-of-two N, assembled as
///   Q = blockdiag(U1[N1], U2[N2]) * M(theta) * blockdiag(V1[N2], V2[N1])
/// where M is the cosine-sine coupling block
///   rows (N2, N1-N2, N2) x cols (N2, N2, N1-N2):
///     [[C, -S, 0], [0, 0, I], [S, C, 0]],  C = diag(cos theta_j), S = sin.
/// U1 and V2 are power-of-two leaves; U2 and V1 recurse on N2. The N2
/// cosine-sine angles initialize to zero, which makes M a fixed permutation
/// (the identity when N1 = N2) and keeps Q exactly orthogonal at any angle.
class CsdOperator final : public UnitaryOperator {
 public:
  CsdOperator(Index n, const CsdConfig& config);

  Index dim() const override { return n_; }
  Index minor_size() const { return n_ - major_; }
  Index major_size() const { return major_; }
  const ParamStorePtr& cs_angles() const { return angles_; }

  const UnitaryOperator& u1() const { return *u1_; }
  const UnitaryOperator& u2() const { return *u2_; }
  const UnitaryOperator& v1() const { return *v1_; }
  const UnitaryOperator& v2() const { return *v2_; }

  Vector apply(const Vector& x, bool transpose, OpCounter* counter) const override;
  Vector apply_vjp(const Vector& x, const Vector& ybar, bool transpose, GradMap& grads,
                   OpCounter* counter) const override;
  void collect_stores(std::vector<ParamStorePtr>& out) const override;

 private:
  Index n_ = 0;
  Index major_ = 0;  // N1
  std::unique_ptr<UnitaryOperator> u1_, u2_, v1_, v2_;
  ParamStorePtr angles_;  // N2 cosine-sine angles
};

/// Factory covering every size: identity at N = 1, a configured leaf at
/// powers of two, and the recursive cosine-sine composition otherwise.
/// Child parameter stores derive their seeds from config.seed and the
/// position in the tree, so a (seed, N, config) triple pins every scalar.
std::unique_ptr<UnitaryOperator> make_unitary_node(Index n, const CsdConfig& config);

/// Dense assembly of the same composition (used by tests and small sizes).
Matrix csd_assemble(const UnitaryOperator& op, OpCounter* counter = nullptr);

}  // namespace uniparam
