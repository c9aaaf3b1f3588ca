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

#include "uniparam/operator.hpp"

#include <stdexcept>

namespace uniparam {

Matrix UnitaryOperator::materialize(OpCounter* counter) const {
  const Index n = dim();
  Matrix q(n, n);
  Vector basis = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    basis[j] = 1.0;
    q.col(j) = apply(basis, false, counter);
    basis[j] = 0.0;
  }
  return q;
}

std::vector<ParamStorePtr> UnitaryOperator::stores() const {
  std::vector<ParamStorePtr> out;
  collect_stores(out);
  return out;
}

Index UnitaryOperator::trainable_param_count() const {
  Index n = 0;
  for (const auto& store : stores()) n += store->trainable_count();
  return n;
}

Vector IdentityOperator::apply(const Vector& x, bool, OpCounter*) const {
  if (x.size() != dim_) throw std::invalid_argument("IdentityOperator: length mismatch");
  return x;
}

Matrix IdentityOperator::materialize(OpCounter*) const { return Matrix::Identity(dim_, dim_); }

Vector IdentityOperator::apply_vjp(const Vector& x, const Vector& ybar, bool, GradMap&,
                                   OpCounter*) const {
  if (x.size() != dim_ || ybar.size() != dim_) {
    throw std::invalid_argument("IdentityOperator: length mismatch");
  }
  return ybar;
}

void IdentityOperator::collect_stores(std::vector<ParamStorePtr>&) const {}

}  // namespace uniparam
