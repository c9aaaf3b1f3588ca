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

#include "uniparam/csd.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "uniparam/lie_params.hpp"
#include "uniparam/linalg.hpp"
#include "uniparam/pauli_circuit.hpp"
#include "uniparam/rng.hpp"

namespace uniparam {

namespace {

CsdConfig child_config(const CsdConfig& config, std::uint64_t slot) {
  CsdConfig child = config;
  child.seed = Rng::stream(config.seed, {slot}).next_u64();
  return child;
}

/// Forward coupling block: input partition (a: N2, b: N2, c: N1-N2),
/// output partition (top: N2, mid: N1-N2, bottom: N2):
///   top_j = cos(t_j) a_j - sin(t_j) b_j
///   mid   = c
///   bot_j = sin(t_j) a_j + cos(t_j) b_j
Vector coupling_apply(const Vector& theta, Index n1, const Vector& x, bool transpose,
                      OpCounter* counter) {
  const Index n2 = theta.size();
  const Index n = x.size();
  Vector y(n);
  if (!transpose) {
    for (Index j = 0; j < n2; ++j) {
      const double c = std::cos(theta[j]);
      const double s = std::sin(theta[j]);
      y[j] = c * x[j] - s * x[n2 + j];
      y[n1 + j] = s * x[j] + c * x[n2 + j];
    }
    y.segment(n2, n1 - n2) = x.segment(2 * n2, n1 - n2);
  } else {
    for (Index j = 0; j < n2; ++j) {
      const double c = std::cos(theta[j]);
      const double s = std::sin(theta[j]);
      y[j] = c * x[j] + s * x[n1 + j];
      y[n2 + j] = -s * x[j] + c * x[n1 + j];
    }
    y.segment(2 * n2, n1 - n2) = x.segment(n2, n1 - n2);
  }
  count_flops(counter, 6 * static_cast<std::uint64_t>(n2));
  return y;
}

/// Angle gradient of <upstream, M(theta) input> (forward orientation).
void coupling_grad(const Vector& theta, Index n1, const Vector& input, const Vector& upstream,
                   Vector& theta_bar, OpCounter* counter) {
  const Index n2 = theta.size();
  for (Index j = 0; j < n2; ++j) {
    const double c = std::cos(theta[j]);
    const double s = std::sin(theta[j]);
    theta_bar[j] += upstream[j] * (-s * input[j] - c * input[n2 + j]) +
                    upstream[n1 + j] * (c * input[j] - s * input[n2 + j]);
  }
  count_flops(counter, 10 * static_cast<std::uint64_t>(n2));
}

std::string compact_inner(const SplitPlan& plan) {
  if (plan.leaf) return std::to_string(plan.size);
  return "(" + std::to_string(plan.major) + ", " + compact_inner(*plan.minor) + ")";
}

void tree_lines(const SplitPlan& plan, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(2 * depth), ' ');
  if (plan.leaf) {
    out += "leaf " + std::to_string(plan.size) + "\n";
    return;
  }
  out += "split " + std::to_string(plan.size) + " = " + std::to_string(plan.major) + " + " +
         std::to_string(plan.size - plan.major) + "\n";
  SplitPlan major_leaf;
  major_leaf.size = plan.major;
  tree_lines(major_leaf, depth + 1, out);
  tree_lines(*plan.minor, depth + 1, out);
}

}  // namespace

SplitPlan split_plan(Index n) {
  if (n < 1) throw std::invalid_argument("split_plan: size must be >= 1");
  SplitPlan plan;
  plan.size = n;
  if (n == 1 || is_power_of_two(n)) return plan;
  plan.leaf = false;
  plan.major = floor_pow2(n);
  plan.minor = std::make_unique<SplitPlan>(split_plan(n - plan.major));
  return plan;
}

std::string plan_compact(const SplitPlan& plan) {
  if (plan.leaf) return "leaf(" + std::to_string(plan.size) + ")";
  return compact_inner(plan);
}

std::string plan_tree(const SplitPlan& plan) {
  std::string out;
  tree_lines(plan, 0, out);
  return out;
}

CsdOperator::CsdOperator(Index n, const CsdConfig& config) : n_(n) {
  if (n < 3 || is_power_of_two(n))
    throw std::invalid_argument("CsdOperator: size must be a non-power-of-two >= 3");
  major_ = floor_pow2(n);
  const Index minor = n - major_;
  u1_ = make_unitary_node(major_, child_config(config, 1));
  u2_ = make_unitary_node(minor, child_config(config, 2));
  v1_ = make_unitary_node(minor, child_config(config, 3));
  v2_ = make_unitary_node(major_, child_config(config, 4));
  angles_ = make_param_store("cs-angles", Vector::Zero(minor));
  angles_->meta = {{"kind", "cs-angles"}, {"size", minor}};
}

Vector CsdOperator::apply(const Vector& x, bool transpose, OpCounter* counter) const {
  if (x.size() != n_) throw std::invalid_argument("CsdOperator::apply: length mismatch");
  const Index n2 = minor_size();
  const Vector theta = angles_->read();
  Vector t(n_);
  if (!transpose) {
    t.head(n2) = v1_->apply(x.head(n2), false, counter);
    t.tail(major_) = v2_->apply(x.tail(major_), false, counter);
    Vector m = coupling_apply(theta, major_, t, false, counter);
    Vector y(n_);
    y.head(major_) = u1_->apply(m.head(major_), false, counter);
    y.tail(n2) = u2_->apply(m.tail(n2), false, counter);
    return y;
  }
  t.head(major_) = u1_->apply(x.head(major_), true, counter);
  t.tail(n2) = u2_->apply(x.tail(n2), true, counter);
  Vector m = coupling_apply(theta, major_, t, true, counter);
  Vector y(n_);
  y.head(n2) = v1_->apply(m.head(n2), true, counter);
  y.tail(major_) = v2_->apply(m.tail(major_), true, counter);
  return y;
}

Vector CsdOperator::apply_vjp(const Vector& x, const Vector& ybar, bool transpose,
                              GradMap& grads, OpCounter* counter) const {
  if (x.size() != n_ || ybar.size() != n_)
    throw std::invalid_argument("CsdOperator::apply_vjp: length mismatch");
  const Index n2 = minor_size();
  const Vector theta = angles_->read();
  Vector theta_bar = Vector::Zero(n2);
  Vector xbar(n_);

  if (!transpose) {
    // Recompute the two inner states, then pull back stage by stage.
    Vector s1(n_);
    s1.head(n2) = v1_->apply(x.head(n2), false, counter);
    s1.tail(major_) = v2_->apply(x.tail(major_), false, counter);
    Vector s2 = coupling_apply(theta, major_, s1, false, counter);

    Vector adj2(n_);
    adj2.head(major_) = u1_->apply_vjp(s2.head(major_), ybar.head(major_), false, grads, counter);
    adj2.tail(n2) = u2_->apply_vjp(s2.tail(n2), ybar.tail(n2), false, grads, counter);

    coupling_grad(theta, major_, s1, adj2, theta_bar, counter);
    Vector adj1 = coupling_apply(theta, major_, adj2, true, counter);

    xbar.head(n2) = v1_->apply_vjp(x.head(n2), adj1.head(n2), false, grads, counter);
    xbar.tail(major_) = v2_->apply_vjp(x.tail(major_), adj1.tail(major_), false, grads, counter);
  } else {
    Vector s1(n_);
    s1.head(major_) = u1_->apply(x.head(major_), true, counter);
    s1.tail(n2) = u2_->apply(x.tail(n2), true, counter);
    Vector s2 = coupling_apply(theta, major_, s1, true, counter);

    Vector adj2(n_);
    adj2.head(n2) = v1_->apply_vjp(s2.head(n2), ybar.head(n2), true, grads, counter);
    adj2.tail(major_) = v2_->apply_vjp(s2.tail(major_), ybar.tail(major_), true, grads, counter);

    // <adj2, M^T s1> differentiates like the forward block with the roles
    // of input and upstream swapped.
    coupling_grad(theta, major_, adj2, s1, theta_bar, counter);
    Vector adj1 = coupling_apply(theta, major_, adj2, false, counter);

    xbar.head(major_) = u1_->apply_vjp(x.head(major_), adj1.head(major_), true, grads, counter);
    xbar.tail(n2) = u2_->apply_vjp(x.tail(n2), adj1.tail(n2), true, grads, counter);
  }

  accumulate_grad(grads, angles_.get(), theta_bar);
  return xbar;
}

void CsdOperator::collect_stores(std::vector<ParamStorePtr>& out) const {
  v1_->collect_stores(out);
  v2_->collect_stores(out);
  out.push_back(angles_);
  u1_->collect_stores(out);
  u2_->collect_stores(out);
}

std::unique_ptr<UnitaryOperator> make_unitary_node(Index n, const CsdConfig& config) {
  if (n < 1) throw std::invalid_argument("make_unitary_node: size must be >= 1");
  if (n == 1) return std::make_unique<IdentityOperator>(1);
  if (is_power_of_two(n)) {
    if (config.leaf == LeafKind::kPauli) {
      const int qubits = log2_exact(n);
      TwoDesignCircuit circuit =
          config.init_scale == 0.0
              ? TwoDesignCircuit::zeros(qubits, config.layers)
              : TwoDesignCircuit::random(qubits, config.layers, config.init_scale, config.seed);
      return std::make_unique<PauliCircuitOperator>(std::move(circuit));
    }
    const Index rank = std::min(config.rank, n - 1);
    LieParams params = config.init_scale == 0.0
                           ? LieParams::zeros(n, rank)
                           : LieParams::random(n, rank, config.init_scale, config.seed);
    return std::make_unique<LieMapOperator>(std::move(params), config.map);
  }
  return std::make_unique<CsdOperator>(n, config);
}

Matrix csd_assemble(const UnitaryOperator& op, OpCounter* counter) {
  return op.materialize(counter);
}

}  // namespace uniparam
