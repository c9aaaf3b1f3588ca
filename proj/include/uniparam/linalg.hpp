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

#include <Eigen/Dense>

namespace uniparam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// 2x2 rotation through half the given angle:
///   [[cos(t/2), -sin(t/2)],
///    [sin(t/2),  cos(t/2)]]
/// This is the real rotation block used by both the circuit RY gates and the
/// Givens factors, so it lives here rather than in either module.
Eigen::Matrix2d ry(double theta);

/// Max entrywise deviation of the Gram matrix from identity.
/// Square Q: max|Q Q^T - I|. Tall Q (more rows than columns, a Stiefel
/// point): max|Q^T Q - I_K|. Wide Q: max|Q Q^T - I| over the row Gram.
double unitarity_error(const Matrix& q);

bool is_power_of_two(Index n);

/// Exact base-2 logarithm; throws std::invalid_argument unless n is a power
/// of two.
int log2_exact(Index n);

/// Largest power of two that is <= n (n >= 1).
Index floor_pow2(Index n);

}  // namespace uniparam
