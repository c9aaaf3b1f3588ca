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

#include "uniparam/unitary_maps.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/LU>

namespace uniparam {

namespace {

// ---------------------------------------------------------------------------
// Series maps (Taylor and truncated Cayley/Neumann), one shared engine.
//
// Both are y = sum_p out_coeff[p] * t_p with the recurrence
//   t_0 = x,  t_p = step_scale[p] * (A t_{p-1}),
// evaluated matrix-free through skew_apply_b. Taylor folds 1/p! into the
// recurrence (step_scale[p] = 1/p) for stability; the Cayley series uses
// bare powers with coefficients {1, 2, ..., 2, 1}.
// ---------------------------------------------------------------------------

struct PolySpec {
  std::vector<double> step_scale;  // index 0 unused
  std::vector<double> out_coeff;
};

PolySpec poly_spec(MapKind kind, int order) {
  if (order < 0) throw std::invalid_argument("series order must be >= 0");
  PolySpec spec;
  if (kind == MapKind::kTaylor) {
    const int degree = order;
    spec.step_scale.resize(static_cast<std::size_t>(degree) + 1, 1.0);
    spec.out_coeff.resize(static_cast<std::size_t>(degree) + 1, 1.0);
    for (int p = 1; p <= degree; ++p) spec.step_scale[static_cast<std::size_t>(p)] = 1.0 / p;
  } else if (kind == MapKind::kNeumann) {
    // (I + A) sum_{p<=order} A^p = I + 2A + ... + 2A^order + A^{order+1}.
    const int degree = order + 1;
    spec.step_scale.resize(static_cast<std::size_t>(degree) + 1, 1.0);
    spec.out_coeff.resize(static_cast<std::size_t>(degree) + 1, 2.0);
    spec.out_coeff.front() = 1.0;
    spec.out_coeff.back() = 1.0;
  } else {
    throw std::invalid_argument("poly_spec: not a series map");
  }
  return spec;
}

Vector poly_apply_b(const Matrix& b, const PolySpec& spec, const Vector& x, bool transpose,
                    OpCounter* counter) {
  const auto degree = spec.out_coeff.size() - 1;
  Vector y = spec.out_coeff[0] * x;
  Vector t = x;
  for (std::size_t p = 1; p <= degree; ++p) {
    t = skew_apply_b(b, t, transpose, counter);
    if (spec.step_scale[p] != 1.0) {
      t *= spec.step_scale[p];
      count_flops(counter, static_cast<std::uint64_t>(t.size()));
    }
    y += spec.out_coeff[p] * t;
    count_flops(counter, 2 * static_cast<std::uint64_t>(t.size()));
  }
  return y;
}

/// Reverse-mode pass for y = poly(A) x or poly(A^T) x. Accumulates into
/// `bbar` (dense N' x K, strictly-lower support of the embedded columns) and
/// returns xbar. Storage is the (degree+1) forward states.
Vector poly_vjp_b(const Matrix& b, const PolySpec& spec, const Vector& x, const Vector& ybar,
                  bool transpose, Matrix& bbar, OpCounter* counter);

/// bbar(i,k) += c * (u[i] v[k] - v[i] u[k]) over the strictly-lower support
/// row i > col k. This is the pullback of Abar -> Bbar restricted to the
/// entries the skew assembly actually reads, fused with the rank-one
/// Abar += c * u v^T contribution of one recurrence step.
void accumulate_skew_outer(Matrix& bbar, const Vector& u, const Vector& v, double c,
                           OpCounter* counter) {
  const Index n = bbar.rows();
  const Index k = bbar.cols();
  std::uint64_t flops = 0;
  for (Index col = 0; col < k; ++col) {
    const double vc = v[col];
    const double uc = u[col];
    for (Index row = col + 1; row < n; ++row) {
      bbar(row, col) += c * (u[row] * vc - v[row] * uc);
    }
    flops += 5 * static_cast<std::uint64_t>(n - col - 1);
  }
  count_flops(counter, flops);
}

Vector poly_vjp_b(const Matrix& b, const PolySpec& spec, const Vector& x, const Vector& ybar,
                  bool transpose, Matrix& bbar, OpCounter* counter) {
  const auto degree = spec.out_coeff.size() - 1;

  std::vector<Vector> states;
  states.reserve(degree + 1);
  states.push_back(x);
  for (std::size_t p = 1; p <= degree; ++p) {
    Vector t = skew_apply_b(b, states.back(), transpose, counter);
    if (spec.step_scale[p] != 1.0) t *= spec.step_scale[p];
    states.push_back(std::move(t));
  }

  // tbar_degree = out_coeff[degree] * ybar; walking p down:
  //   Abar += step_scale[p] * tbar_p state_{p-1}^T   (transposed roles when
  //                                                    the forward op was A^T)
  //   tbar_{p-1} = out_coeff[p-1] * ybar + step_scale[p] * A^T tbar_p
  Vector tbar = spec.out_coeff[degree] * ybar;
  for (std::size_t p = degree; p >= 1; --p) {
    const Vector& prev = states[p - 1];
    if (transpose) {
      accumulate_skew_outer(bbar, prev, tbar, spec.step_scale[p], counter);
    } else {
      accumulate_skew_outer(bbar, tbar, prev, spec.step_scale[p], counter);
    }
    Vector pulled = skew_apply_b(b, tbar, !transpose, counter);
    if (spec.step_scale[p] != 1.0) pulled *= spec.step_scale[p];
    tbar = spec.out_coeff[p - 1] * ybar + pulled;
  }
  return tbar;
}

// ---------------------------------------------------------------------------
// Reflection product: Q = H_1 H_2 ... H_K with H_k = I - 2 vhat_k vhat_k^T,
// v_k = column k of B. A zero column contributes the identity factor (and a
// zero gradient). Applying Q means applying H_K first.
// ---------------------------------------------------------------------------

void apply_reflection(const Matrix& b, Index col, Vector& y, OpCounter* counter) {
  const auto v = b.col(col);
  const double nsq = v.squaredNorm();
  if (nsq == 0.0) return;
  const double coef = 2.0 * v.dot(y) / nsq;
  y -= coef * v;
  count_flops(counter, 6 * static_cast<std::uint64_t>(y.size()));
}

Vector householder_apply_b(const Matrix& b, const Vector& x, bool transpose,
                           OpCounter* counter) {
  const Index k = b.cols();
  Vector y = x;
  if (!transpose) {
    for (Index col = k - 1; col >= 0; --col) apply_reflection(b, col, y, counter);
  } else {
    for (Index col = 0; col < k; ++col) apply_reflection(b, col, y, counter);
  }
  return y;
}

Vector householder_vjp(const LieParams& params, const Matrix& b, const Vector& x,
                       const Vector& ybar, bool transpose, Matrix& bbar, OpCounter* counter) {
  const Index k = b.cols();
  const Index n = b.rows();

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(k));
  if (!transpose) {
    for (Index col = k - 1; col >= 0; --col) order.push_back(col);
  } else {
    for (Index col = 0; col < k; ++col) order.push_back(col);
  }

  // Forward, keeping each gate's input.
  std::vector<Vector> states;
  states.reserve(order.size() + 1);
  states.push_back(x);
  for (Index col : order) {
    Vector y = states.back();
    apply_reflection(b, col, y, counter);
    states.push_back(std::move(y));
  }

  Vector adj = ybar;
  for (std::size_t t = order.size(); t >= 1; --t) {
    const Index col = order[t - 1];
    const auto v = b.col(col);
    const double nsq = v.squaredNorm();
    if (nsq == 0.0) continue;
    const double norm = std::sqrt(nsq);
    const Vector vhat = v / norm;
    const Vector& pre = states[t - 1];

    // y = x - 2 vhat (vhat^T x):
    //   d<adj, y>/dvhat = -2 ((vhat^T x) adj + (adj^T vhat) x),
    // then through vhat = v/|v|:  vbar = (I - vhat vhat^T) vhbar / |v|.
    const double a1 = vhat.dot(pre);
    const double a2 = vhat.dot(adj);
    Vector vhbar = -2.0 * (a1 * adj + a2 * pre);
    Vector vbar = (vhbar - vhat.dot(vhbar) * vhat) / norm;
    for (Index row = 0; row < n; ++row) {
      if (params.entry_active(row, col)) bbar(row, col) += vbar[row];
    }
    count_flops(counter, 14 * static_cast<std::uint64_t>(n));

    adj -= 2.0 * a2 * vhat;  // reflections are symmetric
  }
  return adj;
}

// ---------------------------------------------------------------------------
// Plane-rotation product: Q = prod_{k=1..K} prod_{n=k+1..N} G_{n-k}(B_{n,k})
// where G_m(theta) is the half-angle rotation ry(theta) acting on
// coordinates (m, m+1) (1-based). Rightmost factors apply first; the
// transpose reverses the order and negates every angle.
// ---------------------------------------------------------------------------

void apply_rotation(Vector& y, Index i, double theta, OpCounter* counter) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double a = y[i];
  const double t = y[i + 1];
  y[i] = c * a - s * t;
  y[i + 1] = s * a + c * t;
  count_flops(counter, 6);
}

template <typename Gate>
void for_each_rotation(Index n, Index k, bool reverse_order, Gate&& gate) {
  // Parameter (row r, col c) drives the gate on coordinates (r-c-1, r-c).
  // Forward product order is c ascending then r ascending; application order
  // is the reverse of that unless `reverse_order` flips it back.
  if (!reverse_order) {
    for (Index c = k - 1; c >= 0; --c)
      for (Index r = n - 1; r >= c + 1; --r) gate(r, c);
  } else {
    for (Index c = 0; c < k; ++c)
      for (Index r = c + 1; r <= n - 1; ++r) gate(r, c);
  }
}

Vector givens_apply_b(const Matrix& b, const Vector& x, bool transpose, OpCounter* counter) {
  const Index n = b.rows();
  const Index k = b.cols();
  Vector y = x;
  const double sign = transpose ? -1.0 : 1.0;
  for_each_rotation(n, k, /*reverse_order=*/transpose, [&](Index r, Index c) {
    apply_rotation(y, r - c - 1, sign * b(r, c), counter);
  });
  return y;
}

Vector givens_vjp(const Matrix& b, const Vector& x, const Vector& ybar, bool transpose,
                  Matrix& bbar, OpCounter* counter) {
  const Index n = b.rows();
  const Index k = b.cols();
  const double sign = transpose ? -1.0 : 1.0;

  // Walk the gate chain backwards, restoring each gate's input by applying
  // the inverse rotation (exact up to roundoff), and accumulate the angle
  // gradient from the gate input and the running output adjoint.
  Vector cur = givens_apply_b(b, x, transpose, counter);
  Vector adj = ybar;
  for_each_rotation(n, k, /*reverse_order=*/!transpose, [&](Index r, Index c) {
    const Index i = r - c - 1;
    const double theta = sign * b(r, c);
    const double cth = std::cos(0.5 * theta);
    const double sth = std::sin(0.5 * theta);

    const double a = cur[i];
    const double t = cur[i + 1];
    const double pre0 = cth * a + sth * t;  // inverse rotation
    const double pre1 = -sth * a + cth * t;
    cur[i] = pre0;
    cur[i + 1] = pre1;

    // d y / d theta = 0.5 * [[-s, -c], [c, -s]] * pre
    const double g = 0.5 * (adj[i] * (-sth * pre0 - cth * pre1) +
                            adj[i + 1] * (cth * pre0 - sth * pre1));
    bbar(r, c) += sign * g;

    const double b0 = adj[i];
    const double b1 = adj[i + 1];
    adj[i] = cth * b0 + sth * b1;  // G(theta)^T = G(-theta)
    adj[i + 1] = -sth * b0 + cth * b1;
    count_flops(counter, 24);
  });
  return adj;
}

// ---------------------------------------------------------------------------
// Dense constructions and their adjoints.
// ---------------------------------------------------------------------------

Matrix materialize_by_columns(Index n, const std::function<Vector(const Vector&)>& apply_fn) {
  Matrix q(n, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    q.col(j) = apply_fn(e);
    e[j] = 0.0;
  }
  return q;
}

/// Gradient of <ybar_eff, exp(A) x_eff> with respect to A, computed as the
/// top-right block of exp([[A^T, ybar x^T], [0, A^T]]) — the adjoint of the
/// Frechet derivative of the exponential. Dense and O((2N)^3); acceptable at
/// gradient-check and training sizes.
Matrix exp_param_grad(const Matrix& a, const Vector& x_eff, const Vector& ybar_eff) {
  const Index n = a.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a.transpose();
  block.bottomRightCorner(n, n) = a.transpose();
  block.topRightCorner(n, n) = ybar_eff * x_eff.transpose();
  const Matrix e = matrix_exp(block);
  return e.topRightCorner(n, n);
}

void skew_support_accumulate(Matrix& bbar, const Matrix& abar) {
  for (Index col = 0; col < bbar.cols(); ++col)
    for (Index row = col + 1; row < bbar.rows(); ++row)
      bbar(row, col) += abar(row, col) - abar(col, row);
}

}  // namespace

std::string map_kind_name(MapKind kind) {
  switch (kind) {
    case MapKind::kExponential: return "exp";
    case MapKind::kTaylor: return "taylor";
    case MapKind::kCayley: return "cayley";
    case MapKind::kNeumann: return "neumann";
    case MapKind::kHouseholder: return "householder";
    case MapKind::kGivens: return "givens";
  }
  throw std::invalid_argument("unknown map kind");
}

MapKind parse_map_kind(std::string_view name) {
  if (name == "exp" || name == "exponential") return MapKind::kExponential;
  if (name == "taylor") return MapKind::kTaylor;
  if (name == "cayley") return MapKind::kCayley;
  if (name == "neumann") return MapKind::kNeumann;
  if (name == "householder") return MapKind::kHouseholder;
  if (name == "givens") return MapKind::kGivens;
  throw std::invalid_argument("unknown map kind: " + std::string(name));
}

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: square input required");
  const Index n = m.rows();
  if (n == 0) return m;

  // Scale until the infinity norm is at most 1/4; at that radius a fixed
  // order-20 Horner evaluation is exact to well below double roundoff
  // (0.25^21 / 21! ~ 4e-33), then square back.
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm > 0.25 && squarings < 64) {
    norm *= 0.5;
    ++squarings;
  }
  const Matrix a = m * std::ldexp(1.0, -squarings);

  constexpr int kOrder = 20;
  const Matrix id = Matrix::Identity(n, n);
  Matrix q = id;
  for (int p = kOrder; p >= 1; --p) q = id + (a * q) * (1.0 / p);
  for (int i = 0; i < squarings; ++i) q = q * q;
  return q;
}

Matrix cayley_of_skew(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cayley_of_skew: square input required");
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  // I - A is always invertible for real skew A (eigenvalues 1 - i*lambda).
  return (id - a).partialPivLu().solve(id + a);
}

Matrix exp_map(const LieParams& params) { return matrix_exp(skew_assemble(params)); }

Matrix taylor_map(const LieParams& params, int order) {
  return materialize_map(params, {MapKind::kTaylor, order});
}

Matrix cayley_map(const LieParams& params) { return cayley_of_skew(skew_assemble(params)); }

Matrix neumann_map(const LieParams& params, int order) {
  return materialize_map(params, {MapKind::kNeumann, order});
}

Matrix householder_map(const LieParams& params) {
  return materialize_map(params, {MapKind::kHouseholder, 0});
}

Matrix givens_map(const LieParams& params) {
  return materialize_map(params, {MapKind::kGivens, 0});
}

Matrix materialize_map(const LieParams& params, const MapSpec& spec, OpCounter* counter) {
  const Index n = params.n_prime();
  switch (spec.kind) {
    case MapKind::kExponential: {
      const Matrix q = matrix_exp(skew_assemble(params));
      count_flops(counter, 42 * static_cast<std::uint64_t>(n) * n * n);  // ~21 multiplies
      return q;
    }
    case MapKind::kCayley: {
      const Matrix q = cayley_of_skew(skew_assemble(params));
      count_flops(counter, (8 * static_cast<std::uint64_t>(n) * n * n) / 3);
      return q;
    }
    case MapKind::kTaylor:
    case MapKind::kNeumann: {
      const Matrix b = params.matrix();
      const PolySpec ps = poly_spec(spec.kind, spec.order);
      return materialize_by_columns(
          n, [&](const Vector& e) { return poly_apply_b(b, ps, e, false, counter); });
    }
    case MapKind::kHouseholder: {
      const Matrix b = params.matrix();
      return materialize_by_columns(
          n, [&](const Vector& e) { return householder_apply_b(b, e, false, counter); });
    }
    case MapKind::kGivens: {
      const Matrix b = params.matrix();
      return materialize_by_columns(
          n, [&](const Vector& e) { return givens_apply_b(b, e, false, counter); });
    }
  }
  throw std::invalid_argument("materialize_map: unknown map kind");
}

Vector contracted_apply(const LieParams& params, const MapSpec& spec, const Vector& x,
                        bool transpose, OpCounter* counter) {
  if (x.size() != params.n_prime())
    throw std::invalid_argument("contracted_apply: input length mismatch");
  switch (spec.kind) {
    case MapKind::kTaylor:
    case MapKind::kNeumann:
      return poly_apply_b(params.matrix(), poly_spec(spec.kind, spec.order), x, transpose,
                          counter);
    case MapKind::kHouseholder:
      return householder_apply_b(params.matrix(), x, transpose, counter);
    case MapKind::kGivens:
      return givens_apply_b(params.matrix(), x, transpose, counter);
    case MapKind::kExponential:
    case MapKind::kCayley: {
      // No matrix-free form: fall back to the dense construction.
      const Matrix q = materialize_map(params, spec, counter);
      count_flops(counter, 2 * static_cast<std::uint64_t>(q.rows()) * q.rows());
      return transpose ? Vector(q.transpose() * x) : Vector(q * x);
    }
  }
  throw std::invalid_argument("contracted_apply: unknown map kind");
}

Matrix stiefel_truncate(const Matrix& q, Index k) {
  if (k < 1 || k > q.cols()) throw std::invalid_argument("stiefel_truncate: bad column count");
  return q.leftCols(k);
}

Matrix stiefel_truncate_rows(const Matrix& q, Index k) {
  if (k < 1 || k > q.rows()) throw std::invalid_argument("stiefel_truncate_rows: bad row count");
  return q.topRows(k).transpose();
}

std::optional<double> unitarity_tolerance(MapKind kind, Index n_prime) {
  const double eps = std::numeric_limits<double>::epsilon();
  switch (kind) {
    case MapKind::kHouseholder:
    case MapKind::kGivens:
      // Exactly orthogonal factors; error grows only with accumulated
      // roundoff, linear in the dimension.
      return 64.0 * eps * static_cast<double>(n_prime);
    case MapKind::kExponential:
    case MapKind::kCayley:
      return 1e-10;
    case MapKind::kTaylor:
      // Holds at the accuracy order with small generators (init scale
      // <= 0.01), where the truncated tail is far below roundoff.
      return 1e-10;
    case MapKind::kNeumann:
      return std::nullopt;
  }
  throw std::invalid_argument("unitarity_tolerance: unknown map kind");
}

LieMapOperator::LieMapOperator(LieParams params, MapSpec spec)
    : params_(std::move(params)), spec_(spec) {
  if ((spec.kind == MapKind::kTaylor || spec.kind == MapKind::kNeumann) && spec.order < 0)
    throw std::invalid_argument("LieMapOperator: series order must be >= 0");
}

Vector LieMapOperator::apply(const Vector& x, bool transpose, OpCounter* counter) const {
  return contracted_apply(params_, spec_, x, transpose, counter);
}

Matrix LieMapOperator::materialize(OpCounter* counter) const {
  return materialize_map(params_, spec_, counter);
}

Vector LieMapOperator::apply_vjp(const Vector& x, const Vector& ybar, bool transpose,
                                 GradMap& grads, OpCounter* counter) const {
  if (x.size() != dim() || ybar.size() != dim())
    throw std::invalid_argument("LieMapOperator::apply_vjp: length mismatch");
  const Matrix b = params_.matrix();
  Matrix bbar = Matrix::Zero(b.rows(), b.cols());
  Vector xbar;

  switch (spec_.kind) {
    case MapKind::kTaylor:
    case MapKind::kNeumann: {
      const PolySpec ps = poly_spec(spec_.kind, spec_.order);
      xbar = poly_vjp_b(b, ps, x, ybar, transpose, bbar, counter);
      break;
    }
    case MapKind::kHouseholder:
      xbar = householder_vjp(params_, b, x, ybar, transpose, bbar, counter);
      break;
    case MapKind::kGivens:
      xbar = givens_vjp(b, x, ybar, transpose, bbar, counter);
      break;
    case MapKind::kExponential: {
      const Matrix a = skew_assemble_b(b);
      const Matrix abar = transpose ? exp_param_grad(a, ybar, x) : exp_param_grad(a, x, ybar);
      skew_support_accumulate(bbar, abar);
      const Matrix q = matrix_exp(a);
      xbar = transpose ? Vector(q * ybar) : Vector(q.transpose() * ybar);
      const auto n3 = static_cast<std::uint64_t>(dim());
      count_flops(counter, 8 * 42 * n3 * n3 * n3);  // dominated by the 2N-sized exponential
      break;
    }
    case MapKind::kCayley: {
      // Q = (I+A)(I-A)^{-1}; with z = (I-A)^{-1} x the pullback is
      // Abar = (ybar + Q^T ybar) z^T. The transposed forward swaps the
      // roles of x and ybar.
      const Matrix a = skew_assemble_b(b);
      const Index n = a.rows();
      const Matrix id = Matrix::Identity(n, n);
      Eigen::PartialPivLU<Matrix> lu(id - a);
      const Matrix q = lu.solve(id + a);
      const Vector& x_eff = transpose ? ybar : x;
      const Vector& ybar_eff = transpose ? x : ybar;
      const Vector z = lu.solve(x_eff);
      const Vector w = ybar_eff + q.transpose() * ybar_eff;
      skew_support_accumulate(bbar, Matrix(w * z.transpose()));
      xbar = transpose ? Vector(q * ybar) : Vector(q.transpose() * ybar);
      const auto nd = static_cast<std::uint64_t>(n);
      count_flops(counter, (8 * nd * nd * nd) / 3 + 8 * nd * nd);
      break;
    }
  }

  accumulate_grad(grads, params_.store().get(),
                  Eigen::Map<const Vector>(bbar.data(), bbar.size()));
  return xbar;
}

void LieMapOperator::collect_stores(std::vector<ParamStorePtr>& out) const {
  out.push_back(params_.store());
}

}  // namespace uniparam
