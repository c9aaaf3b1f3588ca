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

#include "uniparam/pauli_circuit.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "uniparam/rng.hpp"

namespace uniparam {

namespace {

constexpr int kMaxQubits = 24;          // angle-count arithmetic guard
constexpr int kMaxMaterializeQubits = 12;
constexpr const char* kLayout = "brickwork-v1";

void check_shape(int qubits, int layers) {
  if (qubits < 1 || qubits > kMaxQubits)
    throw std::invalid_argument("circuit qubit count out of range [1, 24]");
  if (layers < 0) throw std::invalid_argument("circuit layer count must be >= 0");
}

/// Bit position (0 = least significant) of 1-based qubit t: qubit 1 is the
/// most significant bit of the state index.
inline int bit_of(int qubits, int qubit) { return qubits - qubit; }

std::vector<CircuitGate> build_gates(int qubits, int layers) {
  std::vector<CircuitGate> gates;
  Index angle = 0;
  auto ry = [&](int qubit) {
    gates.push_back({CircuitGate::Kind::kRy, qubit, 0, angle++});
  };
  auto cz = [&](int a) { gates.push_back({CircuitGate::Kind::kCz, a, a + 1, -1}); };

  for (int t = 1; t <= qubits; ++t) ry(t);
  for (int l = 0; l < layers; ++l) {
    for (int a = 1; a + 1 <= qubits; a += 2) cz(a);
    for (int t = 1; t <= qubits - 1; ++t) ry(t);
    for (int a = 2; a + 1 <= qubits; a += 2) cz(a);
    for (int t = 2; t <= qubits; ++t) ry(t);
  }
  return gates;
}

/// In-place half-angle rotation of the (bit = 0, bit = 1) amplitude pairs of
/// the target bit position. 3N scalar flops.
void ry_kernel(Vector& x, int bit, double theta, OpCounter* counter) {
  const Index n = x.size();
  const Index stride = Index(1) << bit;
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  for (Index base = 0; base < n; base += 2 * stride) {
    for (Index i = base; i < base + stride; ++i) {
      const double a = x[i];
      const double b = x[i + stride];
      x[i] = c * a - s * b;
      x[i + stride] = s * a + c * b;
    }
  }
  count_flops(counter, 3 * static_cast<std::uint64_t>(n));
}

/// Sign flip on every index with both target bits set (N/4 of them).
void cz_kernel(Vector& x, int bit_a, int bit_b, OpCounter* counter) {
  const Index n = x.size();
  const Index mask = (Index(1) << bit_a) | (Index(1) << bit_b);
  for (Index i = 0; i < n; ++i) {
    if ((i & mask) == mask) x[i] = -x[i];
  }
  count_flops(counter, static_cast<std::uint64_t>(n) / 4);
}

// Matrix-wide variants used by materialize: one pass over the gate list
// transforms all columns at once.
void ry_kernel_rows(Matrix& m, int bit, double theta, OpCounter* counter) {
  const Index n = m.rows();
  const Index stride = Index(1) << bit;
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  Eigen::RowVectorXd tmp(m.cols());
  for (Index base = 0; base < n; base += 2 * stride) {
    for (Index i = base; i < base + stride; ++i) {
      tmp = m.row(i);
      m.row(i) = c * tmp - s * m.row(i + stride);
      m.row(i + stride) = s * tmp + c * m.row(i + stride);
    }
  }
  count_flops(counter, 3 * static_cast<std::uint64_t>(n) * m.cols());
}

void cz_kernel_rows(Matrix& m, int bit_a, int bit_b, OpCounter* counter) {
  const Index n = m.rows();
  const Index mask = (Index(1) << bit_a) | (Index(1) << bit_b);
  for (Index i = 0; i < n; ++i) {
    if ((i & mask) == mask) m.row(i) = -m.row(i);
  }
  count_flops(counter, (static_cast<std::uint64_t>(n) / 4) * m.cols());
}

}  // namespace

Index pauli_param_count(int qubits, int layers) {
  check_shape(qubits, layers);
  return (2 * Index(layers) + 1) * qubits - 2 * Index(layers);
}

TwoDesignCircuit::TwoDesignCircuit(int qubits, int layers, ParamStorePtr store)
    : qubits_(qubits), layers_(layers), store_(std::move(store)) {
  gates_ = build_gates(qubits_, layers_);
}

TwoDesignCircuit TwoDesignCircuit::zeros(int qubits, int layers, std::string name) {
  const Index count = pauli_param_count(qubits, layers);
  auto store = make_param_store(std::move(name), Vector::Zero(count));
  store->meta = {{"kind", "pauli"},
                 {"layout", kLayout},
                 {"qubits", qubits},
                 {"layers", layers}};
  return TwoDesignCircuit(qubits, layers, std::move(store));
}

TwoDesignCircuit TwoDesignCircuit::random(int qubits, int layers, double scale,
                                          std::uint64_t seed, std::string name) {
  TwoDesignCircuit circuit = zeros(qubits, layers, std::move(name));
  Rng rng(seed);
  Vector& raw = circuit.store_->raw();
  for (Index i = 0; i < raw.size(); ++i) raw[i] = rng.uniform(-scale, scale);
  circuit.store_->seed = seed;
  return circuit;
}

nlohmann::json TwoDesignCircuit::to_json() const {
  const Vector& raw = store_->raw();
  nlohmann::json angles = nlohmann::json::array();
  for (Index i = 0; i < raw.size(); ++i) angles.push_back(raw[i]);
  return {{"kind", "pauli-two-design"},
          {"layout", kLayout},
          {"qubits", qubits_},
          {"layers", layers_},
          {"angles", std::move(angles)}};
}

TwoDesignCircuit TwoDesignCircuit::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "pauli-two-design")
    throw std::invalid_argument("circuit json: wrong kind");
  if (j.value("layout", "") != kLayout)
    throw std::invalid_argument("circuit json: unsupported layout");
  const int qubits = j.at("qubits").get<int>();
  const int layers = j.at("layers").get<int>();
  TwoDesignCircuit circuit = zeros(qubits, layers);
  const auto& angles = j.at("angles");
  if (static_cast<Index>(angles.size()) != circuit.angle_count())
    throw std::invalid_argument("circuit json: angle count mismatch");
  Vector& raw = circuit.store_->raw();
  for (Index i = 0; i < raw.size(); ++i) raw[i] = angles[static_cast<std::size_t>(i)].get<double>();
  return circuit;
}

Vector apply_circuit(const TwoDesignCircuit& circuit, const Vector& x, bool transpose,
                     OpCounter* counter) {
  if (x.size() != circuit.dim())
    throw std::invalid_argument("apply_circuit: input length mismatch");
  const Vector angles = circuit.store()->read();
  const auto& gates = circuit.gates();
  const int q = circuit.qubits();
  Vector y = x;

  auto run = [&](const CircuitGate& gate, double sign) {
    if (gate.kind == CircuitGate::Kind::kRy) {
      ry_kernel(y, bit_of(q, gate.qubit_a), sign * angles[gate.angle_index], counter);
    } else {
      cz_kernel(y, bit_of(q, gate.qubit_a), bit_of(q, gate.qubit_b), counter);
    }
  };

  if (!transpose) {
    for (const auto& gate : gates) run(gate, 1.0);
  } else {
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) run(*it, -1.0);
  }
  return y;
}

Matrix materialize_circuit(const TwoDesignCircuit& circuit, OpCounter* counter) {
  if (circuit.qubits() > kMaxMaterializeQubits)
    throw std::invalid_argument("materialize_circuit: guarded to at most 12 qubits");
  const Vector angles = circuit.store()->read();
  const int q = circuit.qubits();
  Matrix m = Matrix::Identity(circuit.dim(), circuit.dim());
  for (const auto& gate : circuit.gates()) {
    if (gate.kind == CircuitGate::Kind::kRy) {
      ry_kernel_rows(m, bit_of(q, gate.qubit_a), angles[gate.angle_index], counter);
    } else {
      cz_kernel_rows(m, bit_of(q, gate.qubit_a), bit_of(q, gate.qubit_b), counter);
    }
  }
  return m;
}

Vector circuit_vjp(const TwoDesignCircuit& circuit, const Vector& x, const Vector& ybar,
                   bool transpose, GradMap& grads, OpCounter* counter) {
  if (x.size() != circuit.dim() || ybar.size() != circuit.dim())
    throw std::invalid_argument("circuit_vjp: length mismatch");
  const Vector angles = circuit.store()->read();
  const auto& gates = circuit.gates();
  const int q = circuit.qubits();
  const Index n = circuit.dim();
  const double sign = transpose ? -1.0 : 1.0;

  Vector cur = apply_circuit(circuit, x, transpose, counter);
  Vector adj = ybar;
  Vector gbar = Vector::Zero(circuit.angle_count());

  auto pull_gate = [&](const CircuitGate& gate) {
    if (gate.kind == CircuitGate::Kind::kCz) {
      const int ba = bit_of(q, gate.qubit_a);
      const int bb = bit_of(q, gate.qubit_b);
      cz_kernel(cur, ba, bb, counter);  // involution: restores the gate input
      cz_kernel(adj, ba, bb, counter);
      return;
    }
    const int bit = bit_of(q, gate.qubit_a);
    const double theta = sign * angles[gate.angle_index];
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const Index stride = Index(1) << bit;
    double g = 0.0;
    for (Index base = 0; base < n; base += 2 * stride) {
      for (Index i = base; i < base + stride; ++i) {
        const Index j = i + stride;
        // Restore the gate input by the inverse rotation.
        const double a = c * cur[i] + s * cur[j];
        const double b = -s * cur[i] + c * cur[j];
        cur[i] = a;
        cur[j] = b;
        // d(out)/d(theta) = 0.5 * [[-s, -c], [c, -s]] applied to the input.
        g += adj[i] * 0.5 * (-s * a - c * b) + adj[j] * 0.5 * (c * a - s * b);
        // Pull the adjoint through the gate transpose (angle negation).
        const double p = c * adj[i] + s * adj[j];
        const double r = -s * adj[i] + c * adj[j];
        adj[i] = p;
        adj[j] = r;
      }
    }
    gbar[gate.angle_index] += sign * g;
    count_flops(counter, 20 * static_cast<std::uint64_t>(n) / 2);
  };

  if (!transpose) {
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) pull_gate(*it);
  } else {
    for (const auto& gate : gates) pull_gate(gate);
  }

  accumulate_grad(grads, circuit.store().get(), gbar);
  return adj;
}

PauliCircuitOperator::PauliCircuitOperator(TwoDesignCircuit circuit)
    : circuit_(std::move(circuit)) {}

Vector PauliCircuitOperator::apply(const Vector& x, bool transpose, OpCounter* counter) const {
  return apply_circuit(circuit_, x, transpose, counter);
}

Matrix PauliCircuitOperator::materialize(OpCounter* counter) const {
  return materialize_circuit(circuit_, counter);
}

Vector PauliCircuitOperator::apply_vjp(const Vector& x, const Vector& ybar, bool transpose,
                                       GradMap& grads, OpCounter* counter) const {
  return circuit_vjp(circuit_, x, ybar, transpose, grads, counter);
}

void PauliCircuitOperator::collect_stores(std::vector<ParamStorePtr>& out) const {
  out.push_back(circuit_.store());
}

}  // namespace uniparam
