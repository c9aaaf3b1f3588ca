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

#include "uniparam/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace uniparam {

Eigen::Matrix2d ry(double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Eigen::Matrix2d m;
  m << c, -s, s, c;
  return m;
}

namespace {

// max|G - I| where G is accumulated as a symmetric rank-k update; only the
// lower triangle is touched, halving the cost of the Gram product.
double gram_deviation(const Matrix& factor) {
  const Index n = factor.rows();
  Matrix gram = Matrix::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(factor);
  double err = 0.0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double target = (i == j) ? 1.0 : 0.0;
      err = std::max(err, std::abs(gram(i, j) - target));
    }
  }
  return err;
}

}  // namespace

double unitarity_error(const Matrix& q) {
  if (q.rows() > q.cols()) {
    // Tall Stiefel point: deviation of Q^T Q from I_K.
    return gram_deviation(Matrix(q.transpose()));
  }
  // Square (or wide): deviation of Q Q^T from I.
  return gram_deviation(q);
}

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(Index n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("log2_exact: not a power of two");
  }
  int k = 0;
  while ((Index{1} << k) < n) ++k;
  return k;
}

Index floor_pow2(Index n) {
  if (n < 1) throw std::invalid_argument("floor_pow2: n must be positive");
  Index p = 1;
  while (p * 2 <= n) p *= 2;
  return p;
}

}  // namespace uniparam
