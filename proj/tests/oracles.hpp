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

// Independent reference implementations ("oracles") used by the test suite.
// Each one recomputes a library result through a structurally different
// route — explicit loops, dense Kronecker products, naive series — so a test
// never compares an implementation against itself.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uniparam/lie_params.hpp"
#include "uniparam/linalg.hpp"
#include "uniparam/pauli_circuit.hpp"

namespace uniparam::oracles {

/// Brute-force triangle fill: column k of B_K lands on rows k+1..N'-1 of
/// column k of the embedded B; A = B - B^T assembled entry by entry.
inline Matrix triangle_skew_oracle(const Matrix& b_k, Index n) {
  Matrix b = Matrix::Zero(n, n);
  for (Index k = 0; k < b_k.cols(); ++k) {
    for (Index i = k + 1; i < n; ++i) b(i, k) = b_k(i, k);
  }
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = b(i, j) - b(j, i);
  }
  return a;
}

/// Free fill: B_K sits verbatim in the first K columns of B.
/// Skew assembly reads only the strictly-lower portion of the embedded
/// columns in every fill mode; free-mode head entries exist for the
/// reflection/rotation kinds and are structural zeros here.
inline Matrix free_skew_oracle(const Matrix& b_k, Index n) {
  Matrix b = Matrix::Zero(n, n);
  b.block(0, 0, n, b_k.cols()) = b_k;
  b.triangularView<Eigen::Upper>().setZero();
  return Matrix(b - b.transpose());
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Dense matrix of one gate via Kronecker products (qubit 1 = leftmost
/// factor / most significant bit).
inline Matrix dense_gate_oracle(const CircuitGate& gate, int qubits, const Vector& angles) {
  const Index n = Index(1) << qubits;
  if (gate.kind == CircuitGate::Kind::kRy) {
    Matrix m = Matrix::Identity(1, 1);
    for (int t = 1; t <= qubits; ++t) {
      m = kron(m, t == gate.qubit_a ? Matrix(ry(angles[gate.angle_index]))
                                    : Matrix(Matrix::Identity(2, 2)));
    }
    return m;
  }
  // CZ on (qubit_a, qubit_b): -1 where both bits are set.
  Matrix m = Matrix::Zero(n, n);
  for (Index idx = 0; idx < n; ++idx) {
    const bool bit_a = (idx >> (qubits - gate.qubit_a)) & 1;
    const bool bit_b = (idx >> (qubits - gate.qubit_b)) & 1;
    m(idx, idx) = (bit_a && bit_b) ? -1.0 : 1.0;
  }
  return m;
}

/// Gate-by-gate dense product: later gates act later, so they multiply from
/// the left.
inline Matrix dense_circuit_oracle(const TwoDesignCircuit& circuit) {
  const Index n = circuit.dim();
  const Vector angles = circuit.store()->read();
  Matrix q = Matrix::Identity(n, n);
  for (const CircuitGate& gate : circuit.gates()) {
    q = dense_gate_oracle(gate, circuit.qubits(), angles) * q;
  }
  return q;
}

/// Scaling-and-squaring exponential with an explicit 30-term series (term
/// matrices with factorial division — deliberately not Horner form).
inline Matrix exp_series_oracle(Matrix a, int order = 30) {
  int squarings = 0;
  while (a.cwiseAbs().rowwise().sum().maxCoeff() > 0.5) {
    a *= 0.5;
    ++squarings;
  }
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  for (int p = 1; p <= order; ++p) {
    term = Matrix(term * a) / static_cast<double>(p);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = Matrix(sum * sum);
  return sum;
}

/// Dense reflection I - 2 v v^T / (v^T v); identity for the zero vector.
inline Matrix reflection_oracle(const Vector& v) {
  const Index n = v.size();
  const double nsq = v.squaredNorm();
  if (nsq == 0.0) return Matrix::Identity(n, n);
  return Matrix(Matrix::Identity(n, n) - (2.0 / nsq) * (v * v.transpose()));
}

/// Product of dense reflections over the embedded columns of B, matching the
/// map's order: column k = K-1 acts first on a vector, so
/// Q = H_0 H_1 ... H_{K-1}.
inline Matrix householder_oracle(const LieParams& params) {
  const Index n = params.n_prime();
  const Matrix b = params.matrix();
  Matrix q = Matrix::Identity(n, n);
  for (Index k = 0; k < b.cols(); ++k) q = Matrix(q * reflection_oracle(b.col(k)));
  return q;
}

/// Dense plane rotation by theta on coordinates (i, j).
inline Matrix rotation_oracle(Index n, Index i, Index j, double theta) {
  Matrix g = Matrix::Identity(n, n);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  g(i, i) = c;
  g(i, j) = -s;
  g(j, i) = s;
  g(j, j) = c;
  return g;
}

/// Dense product of plane rotations. Application order (first to touch a
/// vector): columns K-1 down to 0, rows N'-1 down to k+1; entry B(r, k)
/// rotates coordinates (r - k - 1, r - k) by half the stored value (the
/// parameterization shares the circuit half-angle convention). Later gates
/// multiply from the left.
inline Matrix givens_oracle(const LieParams& params) {
  const Index n = params.n_prime();
  const Matrix b = params.matrix();
  Matrix q = Matrix::Identity(n, n);
  for (Index k = b.cols() - 1; k >= 0; --k) {
    for (Index r = n - 1; r >= k + 1; --r) {
      q = Matrix(rotation_oracle(n, r - k - 1, r - k, 0.5 * b(r, k)) * q);
    }
  }
  return q;
}

/// Dense cosine-sine coupling block with row blocks (n2, n1-n2, n2) and
/// column blocks (n2, n2, n1-n2):  [[C, -S, 0], [0, 0, I], [S, C, 0]].
inline Matrix coupling_oracle(const Vector& theta, Index n1) {
  const Index n2 = theta.size();
  const Index n = n1 + n2;
  Matrix m = Matrix::Zero(n, n);
  for (Index j = 0; j < n2; ++j) {
    const double c = std::cos(theta[j]);
    const double s = std::sin(theta[j]);
    m(j, j) = c;
    m(j, n2 + j) = -s;
    m(n1 + j, j) = s;
    m(n1 + j, n2 + j) = c;
  }
  for (Index i = 0; i < n1 - n2; ++i) m(n2 + i, 2 * n2 + i) = 1.0;
  return m;
}

/// Elementwise quantization loop, independent of the vectorized
/// implementation: grid round of (theta - min) / beta.
inline Vector quantize_roundtrip_oracle(const Vector& theta, int bits) {
  const double lo = theta.minCoeff();
  const double hi = theta.maxCoeff();
  const double levels = std::pow(2.0, bits) - 1.0;
  if (hi == lo) return Vector::Constant(theta.size(), lo);
  const double beta = (hi - lo) / levels;
  Vector out(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    out[i] = std::round((theta[i] - lo) / beta) * beta + lo;
  }
  return out;
}

}  // namespace uniparam::oracles
