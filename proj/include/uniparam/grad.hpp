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

#include <functional>
#include <vector>

#include "uniparam/diag_nodes.hpp"
#include "uniparam/operator.hpp"

namespace uniparam {

/// Minimal reverse-mode tape. A forward pass records one node per
/// operation (value + pullback closure); backward() replays the pullbacks
/// in reverse creation order, accumulating parameter gradients additively
/// into a GradMap keyed by store address. Tapes are single-use and
/// single-threaded; referenced operators and diagonals must outlive the
/// tape.
class Tape {
 public:
  using NodeId = int;

  explicit Tape(OpCounter* counter = nullptr) : counter_(counter) {}

  /// Leaf holding a constant input vector.
  NodeId input(Vector x);

  NodeId apply(const UnitaryOperator& op, NodeId x, bool transpose = false);
  NodeId diag(const RealDiag& d, NodeId x);
  NodeId diag(const RademacherDiag& d, NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId add_const(NodeId a, const Vector& c);
  NodeId head(NodeId a, Index k);   // first k entries
  NodeId pad(NodeId a, Index n);    // zero-extend to length n
  NodeId squared_norm(NodeId a);    // length-1 node
  NodeId dot(NodeId a, NodeId b);   // length-1 node

  const Vector& value(NodeId id) const;

  /// Reverse sweep from `output` seeded with `upstream` (shape must match
  /// the output node). Consumes the tape: a second call throws
  /// std::logic_error.
  GradMap backward(NodeId output, const Vector& upstream);

 private:
  struct Node {
    Vector value;
    Vector adjoint;  // lazily sized
    std::function<void(Tape&, const Vector&, GradMap&)> pull;
  };

  NodeId push(Vector value, std::function<void(Tape&, const Vector&, GradMap&)> pull);
  void bump(NodeId id, const Vector& contribution);
  const Vector& checked(NodeId id) const;

  std::vector<Node> nodes_;
  OpCounter* counter_ = nullptr;
  bool consumed_ = false;
};

/// Finite-difference check of a tape program. `build` records the forward
/// pass on the given tape and returns a scalar (length-1) node; the check
/// compares the analytic gradient of that scalar against central differences
/// (step h) at every trainable entry of `stores`, under a
/// SurrogateForwardGuard so discrete ops expose their declared surrogate.
/// Returns the max of |analytic - numeric| / max(1, |numeric|).
double gradcheck(const std::function<Tape::NodeId(Tape&)>& build,
                 const std::vector<ParamStorePtr>& stores, double step = 1e-5);

/// Standard relative tolerance for gradcheck at the default step.
inline constexpr double kGradCheckTolerance = 1e-4;

/// Plain gradient descent: raw <- raw - lr * grad on trainable entries only;
/// frozen entries are never touched (bit-identical across any number of
/// steps). Stores without an entry in `grads` are left alone.
void sgd_step(const std::vector<ParamStorePtr>& stores, const GradMap& grads, double lr);

}  // namespace uniparam
