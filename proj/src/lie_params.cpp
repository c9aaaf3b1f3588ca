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

#include "uniparam/lie_params.hpp"

#include <stdexcept>
#include <utility>

#include "uniparam/rng.hpp"

namespace uniparam {

namespace {

void validate_shape(Index n, Index k, Index k_prime, FillMode mode) {
  if (n < 1) throw std::invalid_argument("LieParams: node size must be positive");
  if (k < 1) throw std::invalid_argument("LieParams: rank must be positive");
  if (k_prime < 1 || k_prime > k) {
    throw std::invalid_argument("LieParams: intrinsic rank must satisfy 1 <= K' <= K");
  }
  if (mode == FillMode::kTriangle) {
    // Column k needs at least one sub-diagonal slot, so K <= N'-1; that also
    // keeps K within the triangle capacity N'(N'-1)/2 for every N' >= 2.
    if (k > n - 1 || k > lie_triangle_capacity(n)) {
      throw std::invalid_argument("LieParams: rank exceeds triangle capacity");
    }
  }
}

}  // namespace

LieParams::LieParams(Index n, Index k, Index k_prime, FillMode mode, ParamStorePtr store)
    : n_(n), k_(k), k_prime_(k_prime), mode_(mode), store_(std::move(store)) {
  auto& mask = store_->trainable();
  for (Index col = 0; col < k_; ++col) {
    for (Index row = 0; row < n_; ++row) {
      const bool structural = entry_active(row, col);
      const bool train = structural && col < k_prime_;
      mask[static_cast<std::size_t>(col * n_ + row)] = train ? 1 : 0;
    }
  }
  store_->meta = {{"kind", "lie"},
                  {"n_prime", n_},
                  {"rank", k_},
                  {"intrinsic_rank", k_prime_},
                  {"fill", mode_ == FillMode::kTriangle ? "triangle" : "free"}};
}

LieParams LieParams::zeros(Index n_prime, Index k, FillMode mode, Index k_prime,
                           std::string name) {
  if (k_prime < 0) k_prime = k;
  validate_shape(n_prime, k, k_prime, mode);
  auto store = make_param_store(std::move(name), Vector::Zero(n_prime * k));
  return LieParams(n_prime, k, k_prime, mode, std::move(store));
}

LieParams LieParams::random(Index n_prime, Index k, double scale, std::uint64_t seed,
                            FillMode mode, Index k_prime, FrozenFill frozen,
                            std::string name) {
  if (k_prime < 0) k_prime = k;
  validate_shape(n_prime, k, k_prime, mode);
  LieParams params(n_prime, k, k_prime, mode,
                   make_param_store(std::move(name), Vector::Zero(n_prime * k)));
  Rng rng = Rng::stream(seed, {0});
  auto& values = params.store_->raw();
  for (Index col = 0; col < k; ++col) {
    const bool fill = col < k_prime || frozen == FrozenFill::kRandom;
    for (Index row = 0; row < n_prime; ++row) {
      if (!params.entry_active(row, col)) continue;
      const double v = rng.uniform(-scale, scale);  // drawn even when frozen-zero,
      if (fill) values[col * n_prime + row] = v;    // keeping streams shape-stable
    }
  }
  params.store_->seed = seed;
  return params;
}

bool LieParams::entry_active(Index i, Index k) const {
  if (i < 0 || i >= n_ || k < 0 || k >= k_) return false;
  return mode_ == FillMode::kFree || i > k;
}

Matrix LieParams::matrix() const {
  const Vector values = store_->read();
  return Eigen::Map<const Matrix>(values.data(), n_, k_);
}

Matrix LieParams::raw_matrix() const {
  return Eigen::Map<const Matrix>(store_->raw().data(), n_, k_);
}

Index lie_triangle_capacity(Index n_prime) { return n_prime * (n_prime - 1) / 2; }

Index lie_active_entry_count(Index n_prime, Index k, FillMode mode) {
  if (mode == FillMode::kFree) return n_prime * k;
  // Column j (0-based) holds N'-1-j sub-diagonal entries.
  return k * (n_prime - 1) - k * (k - 1) / 2;
}

Matrix skew_assemble_b(const Matrix& b) {
  const Index n = b.rows();
  const Index k = b.cols();
  if (k > n) throw std::invalid_argument("skew_assemble: more columns than triangle rows");
  Matrix a = Matrix::Zero(n, n);
  for (Index col = 0; col < k; ++col) {
    for (Index row = col + 1; row < n; ++row) {
      const double v = b(row, col);
      a(row, col) = v;
      a(col, row) = -v;
    }
  }
  return a;
}

Matrix skew_assemble(const LieParams& params) { return skew_assemble_b(params.matrix()); }

Vector skew_apply_b(const Matrix& b, const Vector& x, bool transpose, OpCounter* counter) {
  const Index n = b.rows();
  const Index k = b.cols();
  if (x.size() != n) throw std::invalid_argument("skew_apply: length mismatch");
  Vector y = Vector::Zero(n);
  std::uint64_t flops = 0;
  // y = B x - B^T x over the strictly-lower column support.
  for (Index col = 0; col < k; ++col) {
    const Index len = n - 1 - col;
    if (len <= 0) continue;
    const auto column = b.col(col).tail(len);
    y.tail(len) += x[col] * column;
    y[col] -= column.dot(x.tail(len));
    flops += 4 * static_cast<std::uint64_t>(len);
  }
  count_flops(counter, flops);
  // A^T = -A for a skew generator.
  return transpose ? Vector(-y) : y;
}

Vector skew_apply(const LieParams& params, const Vector& x, bool transpose,
                  OpCounter* counter) {
  const Matrix b = params.matrix();
  return skew_apply_b(b, x, transpose, counter);
}

Matrix mask_gradient(const LieParams& params, Matrix grad) {
  if (grad.rows() != params.n_prime() || grad.cols() != params.rank()) {
    throw std::invalid_argument("mask_gradient: gradient shape mismatch");
  }
  for (Index col = 0; col < grad.cols(); ++col) {
    for (Index row = 0; row < grad.rows(); ++row) {
      const bool train = params.entry_active(row, col) && col < params.intrinsic_rank();
      if (!train) grad(row, col) = 0.0;
    }
  }
  return grad;
}

}  // namespace uniparam
