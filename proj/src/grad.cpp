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

#include "uniparam/grad.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace uniparam {

Tape::NodeId Tape::push(Vector value, std::function<void(Tape&, const Vector&, GradMap&)> pull) {
  nodes_.push_back(Node{std::move(value), Vector(), std::move(pull)});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

const Vector& Tape::checked(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    throw std::invalid_argument("Tape: bad node id");
  return nodes_[static_cast<std::size_t>(id)].value;
}

void Tape::bump(NodeId id, const Vector& contribution) {
  Vector& adj = nodes_[static_cast<std::size_t>(id)].adjoint;
  if (adj.size() == 0) {
    adj = contribution;
  } else {
    adj += contribution;
  }
}

const Vector& Tape::value(NodeId id) const { return checked(id); }

Tape::NodeId Tape::input(Vector x) {
  return push(std::move(x), {});
}

Tape::NodeId Tape::apply(const UnitaryOperator& op, NodeId x, bool transpose) {
  Vector y = op.apply(checked(x), transpose, counter_);
  return push(std::move(y), [&op, x, transpose](Tape& t, const Vector& adj, GradMap& grads) {
    Vector xbar = op.apply_vjp(t.checked(x), adj, transpose, grads, t.counter_);
    t.bump(x, xbar);
  });
}

Tape::NodeId Tape::diag(const RealDiag& d, NodeId x) {
  Vector y = d.apply(checked(x), counter_);
  return push(std::move(y), [&d, x](Tape& t, const Vector& adj, GradMap& grads) {
    t.bump(x, d.apply_vjp(t.checked(x), adj, grads, t.counter_));
  });
}

Tape::NodeId Tape::diag(const RademacherDiag& d, NodeId x) {
  Vector y = d.apply(checked(x), counter_);
  return push(std::move(y), [&d, x](Tape& t, const Vector& adj, GradMap& grads) {
    t.bump(x, d.apply_vjp(t.checked(x), adj, grads, t.counter_));
  });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  if (checked(a).size() != checked(b).size()) throw std::invalid_argument("Tape::add: shapes");
  Vector y = checked(a) + checked(b);
  return push(std::move(y), [a, b](Tape& t, const Vector& adj, GradMap&) {
    t.bump(a, adj);
    t.bump(b, adj);
  });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  if (checked(a).size() != checked(b).size()) throw std::invalid_argument("Tape::sub: shapes");
  Vector y = checked(a) - checked(b);
  return push(std::move(y), [a, b](Tape& t, const Vector& adj, GradMap&) {
    t.bump(a, adj);
    t.bump(b, Vector(-adj));
  });
}

Tape::NodeId Tape::scale(NodeId a, double factor) {
  Vector y = factor * checked(a);
  return push(std::move(y), [a, factor](Tape& t, const Vector& adj, GradMap&) {
    t.bump(a, Vector(factor * adj));
  });
}

Tape::NodeId Tape::add_const(NodeId a, const Vector& c) {
  if (checked(a).size() != c.size()) throw std::invalid_argument("Tape::add_const: shapes");
  Vector y = checked(a) + c;
  return push(std::move(y), [a](Tape& t, const Vector& adj, GradMap&) { t.bump(a, adj); });
}

Tape::NodeId Tape::head(NodeId a, Index k) {
  if (k < 1 || k > checked(a).size()) throw std::invalid_argument("Tape::head: bad length");
  Vector y = checked(a).head(k);
  const Index full = checked(a).size();
  return push(std::move(y), [a, k, full](Tape& t, const Vector& adj, GradMap&) {
    Vector padded = Vector::Zero(full);
    padded.head(k) = adj;
    t.bump(a, padded);
  });
}

Tape::NodeId Tape::pad(NodeId a, Index n) {
  if (n < checked(a).size()) throw std::invalid_argument("Tape::pad: target too small");
  const Index k = checked(a).size();
  Vector y = Vector::Zero(n);
  y.head(k) = checked(a);
  return push(std::move(y), [a, k](Tape& t, const Vector& adj, GradMap&) {
    t.bump(a, Vector(adj.head(k)));
  });
}

Tape::NodeId Tape::squared_norm(NodeId a) {
  Vector y(1);
  y[0] = checked(a).squaredNorm();
  count_flops(counter_, 2 * static_cast<std::uint64_t>(checked(a).size()));
  return push(std::move(y), [a](Tape& t, const Vector& adj, GradMap&) {
    t.bump(a, Vector(2.0 * adj[0] * t.checked(a)));
  });
}

Tape::NodeId Tape::dot(NodeId a, NodeId b) {
  if (checked(a).size() != checked(b).size()) throw std::invalid_argument("Tape::dot: shapes");
  Vector y(1);
  y[0] = checked(a).dot(checked(b));
  count_flops(counter_, 2 * static_cast<std::uint64_t>(checked(a).size()));
  return push(std::move(y), [a, b](Tape& t, const Vector& adj, GradMap&) {
    t.bump(a, Vector(adj[0] * t.checked(b)));
    t.bump(b, Vector(adj[0] * t.checked(a)));
  });
}

GradMap Tape::backward(NodeId output, const Vector& upstream) {
  if (consumed_) throw std::logic_error("Tape::backward: tape already consumed");
  if (upstream.size() != checked(output).size())
    throw std::invalid_argument("Tape::backward: upstream shape mismatch");
  consumed_ = true;

  GradMap grads;
  bump(output, upstream);
  for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.adjoint.size() == 0 || !node.pull) continue;
    node.pull(*this, node.adjoint, grads);
  }
  return grads;
}

double gradcheck(const std::function<Tape::NodeId(Tape&)>& build,
                 const std::vector<ParamStorePtr>& stores, double step) {
  SurrogateForwardGuard guard;

  const auto eval = [&]() {
    Tape tape;
    const Tape::NodeId out = build(tape);
    if (tape.value(out).size() != 1)
      throw std::invalid_argument("gradcheck: build must return a scalar node");
    return tape.value(out)[0];
  };

  Tape tape;
  const Tape::NodeId out = build(tape);
  if (tape.value(out).size() != 1)
    throw std::invalid_argument("gradcheck: build must return a scalar node");
  GradMap grads = tape.backward(out, Vector::Ones(1));

  double worst = 0.0;
  for (const auto& store : stores) {
    const Vector* analytic = nullptr;
    if (auto it = grads.find(store.get()); it != grads.end()) analytic = &it->second;
    for (Index i = 0; i < store->size(); ++i) {
      if (!store->is_trainable(i)) continue;
      const double saved = store->raw()[i];
      store->raw()[i] = saved + step;
      const double f_plus = eval();
      store->raw()[i] = saved - step;
      const double f_minus = eval();
      store->raw()[i] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double a = analytic != nullptr ? (*analytic)[i] : 0.0;
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

void sgd_step(const std::vector<ParamStorePtr>& stores, const GradMap& grads, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be > 0");
  for (const auto& store : stores) {
    const auto it = grads.find(store.get());
    if (it == grads.end()) continue;
    const Vector& g = it->second;
    if (g.size() != store->size()) throw std::invalid_argument("sgd_step: gradient shape");
    Vector& raw = store->raw();
    for (Index i = 0; i < raw.size(); ++i) {
      if (store->is_trainable(i)) raw[i] -= lr * g[i];
    }
  }
}

}  // namespace uniparam
