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
#include <vector>

#include <json.hpp>

#include "uniparam/operator.hpp"

namespace uniparam {

/// Angle count of the brickwork circuit: q initial rotations plus 2(q-1) per
/// entangling layer, i.e. (2L+1)q - 2L. Logarithmic in the matrix dimension
/// N = 2^q.
Index pauli_param_count(int qubits, int layers);

/// One gate of the circuit. Qubit numbering is 1-based with qubit 1 the most
/// significant bit of the state index (bit position q - t for qubit t).
struct CircuitGate {
  enum class Kind { kRy, kCz };
  Kind kind = Kind::kRy;
  int qubit_a = 1;        // RY target, or first qubit of a CZ pair
  int qubit_b = 0;        // second qubit of a CZ pair (CZ only)
  Index angle_index = -1; // position in the angle store (RY only)
};

/// A real-amplitude brickwork circuit on q qubits acting on R^{2^q}:
/// one RY column on every qubit, then per layer a CZ brick on pairs
/// (1,2),(3,4),... followed by RY on qubits 1..q-1, a CZ brick on
/// (2,3),(4,5),... and RY on qubits 2..q. Gate order and angle layout are
/// frozen as "brickwork-v1" so serialized angle vectors replay exactly.
///
/// The matrix is orthogonal by construction (every factor is a rotation or a
/// diagonal sign flip), and both apply directions run in O(gates * 2^q)
/// without ever forming the 2^q x 2^q matrix.
class TwoDesignCircuit {
 public:
  static TwoDesignCircuit zeros(int qubits, int layers, std::string name = "pauli");

  /// Angles drawn in store order from uniform(-scale, scale); pi-scale draws
  /// give the expressive random-start regime.
  static TwoDesignCircuit random(int qubits, int layers, double scale, std::uint64_t seed,
                                 std::string name = "pauli");

  int qubits() const { return qubits_; }
  int layers() const { return layers_; }
  Index dim() const { return Index(1) << qubits_; }
  Index angle_count() const { return store_->size(); }

  const std::vector<CircuitGate>& gates() const { return gates_; }
  const ParamStorePtr& store() const { return store_; }

  nlohmann::json to_json() const;
  static TwoDesignCircuit from_json(const nlohmann::json& j);

 private:
  TwoDesignCircuit(int qubits, int layers, ParamStorePtr store);

  int qubits_ = 1;
  int layers_ = 0;
  ParamStorePtr store_;
  std::vector<CircuitGate> gates_;
};

/// y = Q x (transpose: reversed gates with negated rotation angles).
Vector apply_circuit(const TwoDesignCircuit& circuit, const Vector& x, bool transpose = false,
                     OpCounter* counter = nullptr);

/// Dense Q for inspection and testing; guarded to q <= 12.
Matrix materialize_circuit(const TwoDesignCircuit& circuit, OpCounter* counter = nullptr);

/// Reverse-mode step: walks the gate chain backwards, restoring each gate
/// input with the inverse gate (rotations invert by angle negation, sign
/// bricks are involutions), and returns xbar while accumulating angle
/// gradients.
Vector circuit_vjp(const TwoDesignCircuit& circuit, const Vector& x, const Vector& ybar,
                   bool transpose, GradMap& grads, OpCounter* counter = nullptr);

/// UnitaryOperator facade.
class PauliCircuitOperator final : public UnitaryOperator {
 public:
  explicit PauliCircuitOperator(TwoDesignCircuit circuit);

  const TwoDesignCircuit& circuit() const { return circuit_; }

  Index dim() const override { return circuit_.dim(); }
  Vector apply(const Vector& x, bool transpose, OpCounter* counter) const override;
  Matrix materialize(OpCounter* counter) const override;
  Vector apply_vjp(const Vector& x, const Vector& ybar, bool transpose, GradMap& grads,
                   OpCounter* counter) const override;
  void collect_stores(std::vector<ParamStorePtr>& out) const override;

 private:
  TwoDesignCircuit circuit_;
};

}  // namespace uniparam
