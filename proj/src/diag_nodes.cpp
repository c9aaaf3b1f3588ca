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

#include "uniparam/diag_nodes.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace uniparam {

namespace {

void check_length(Index expected, Index got, const char* what) {
  if (expected != got) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

ParamStorePtr make_diag_store(std::string name, Index k, const char* kind) {
  if (k < 1) throw std::invalid_argument("diagonal length must be >= 1");
  auto store = make_param_store(std::move(name), Vector::Zero(k));
  store->meta = {{"kind", kind}, {"size", k}};
  return store;
}

void fill_uniform(ParamStore& store, double scale, std::uint64_t seed) {
  Rng rng(seed);
  Vector& raw = store.raw();
  for (Index i = 0; i < raw.size(); ++i) raw[i] = rng.uniform(-scale, scale);
  store.seed = seed;
}

}  // namespace

RealDiag RealDiag::zeros(Index k, std::string name) {
  return RealDiag(make_diag_store(std::move(name), k, "real-diag"));
}

RealDiag RealDiag::random(Index k, double scale, std::uint64_t seed, std::string name) {
  RealDiag d(make_diag_store(std::move(name), k, "real-diag"));
  fill_uniform(*d.store_, scale, seed);
  return d;
}

RealDiag::RealDiag(ParamStorePtr store) : store_(std::move(store)) {
  if (!store_ || store_->size() < 1) throw std::invalid_argument("RealDiag: empty store");
}

Vector RealDiag::apply(const Vector& x, OpCounter* counter) const {
  check_length(dim(), x.size(), "RealDiag::apply");
  count_flops(counter, static_cast<std::uint64_t>(x.size()));
  return store_->read().cwiseProduct(x);
}

Vector RealDiag::apply_vjp(const Vector& x, const Vector& ybar, GradMap& grads,
                           OpCounter* counter) const {
  check_length(dim(), x.size(), "RealDiag::apply_vjp");
  check_length(dim(), ybar.size(), "RealDiag::apply_vjp");
  const Vector values = store_->read();
  accumulate_grad(grads, store_.get(), ybar.cwiseProduct(x));
  count_flops(counter, 2 * static_cast<std::uint64_t>(x.size()));
  return values.cwiseProduct(ybar);
}

RademacherDiag RademacherDiag::zeros(Index k, double tau, std::string name) {
  return RademacherDiag(make_diag_store(std::move(name), k, "rademacher"), tau);
}

RademacherDiag RademacherDiag::random(Index k, double scale, std::uint64_t seed, double tau,
                                      std::string name) {
  RademacherDiag d(make_diag_store(std::move(name), k, "rademacher"), tau);
  fill_uniform(*d.store_, scale, seed);
  return d;
}

RademacherDiag::RademacherDiag(ParamStorePtr store, double tau)
    : store_(std::move(store)), tau_(tau) {
  if (!store_ || store_->size() < 1) throw std::invalid_argument("RademacherDiag: empty store");
  if (!(tau_ > 0.0)) throw std::invalid_argument("RademacherDiag: temperature must be > 0");
}

Vector RademacherDiag::hard_signs() const {
  const Vector logits = store_->read();
  Vector signs(logits.size());
  for (Index i = 0; i < logits.size(); ++i) signs[i] = logits[i] >= 0.0 ? 1.0 : -1.0;
  return signs;
}

Vector RademacherDiag::sampled_signs(Rng& rng) const {
  const Vector logits = store_->read();
  Vector signs(logits.size());
  for (Index i = 0; i < logits.size(); ++i) {
    // Two-class softmax over (logit, -logit)/tau: P(+1) = sigmoid(2 logit / tau).
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * logits[i] / tau_));
    signs[i] = rng.unit() < p_plus ? 1.0 : -1.0;
  }
  return signs;
}

Vector RademacherDiag::surrogate() const {
  const Vector logits = store_->read();
  Vector soft(logits.size());
  for (Index i = 0; i < logits.size(); ++i) soft[i] = std::tanh(logits[i] / tau_);
  return soft;
}

Vector RademacherDiag::forward() const {
  return SurrogateForwardGuard::active() ? surrogate() : hard_signs();
}

Vector RademacherDiag::logit_vjp(const Vector& upstream) const {
  check_length(dim(), upstream.size(), "RademacherDiag::logit_vjp");
  const Vector logits = store_->read();
  const double slope_scale = reinmax_ ? 0.5 / tau_ : 1.0 / tau_;
  Vector grad(logits.size());
  for (Index i = 0; i < logits.size(); ++i) {
    const double t = std::tanh(logits[i] / tau_);
    grad[i] = upstream[i] * (1.0 - t * t) * slope_scale;
  }
  return grad;
}

Vector RademacherDiag::apply(const Vector& x, OpCounter* counter) const {
  check_length(dim(), x.size(), "RademacherDiag::apply");
  count_flops(counter, static_cast<std::uint64_t>(x.size()));
  return forward().cwiseProduct(x);
}

Vector RademacherDiag::apply_vjp(const Vector& x, const Vector& ybar, GradMap& grads,
                                 OpCounter* counter) const {
  check_length(dim(), x.size(), "RademacherDiag::apply_vjp");
  check_length(dim(), ybar.size(), "RademacherDiag::apply_vjp");
  accumulate_grad(grads, store_.get(), logit_vjp(ybar.cwiseProduct(x)));
  count_flops(counter, 4 * static_cast<std::uint64_t>(x.size()));
  return forward().cwiseProduct(ybar);
}

}  // namespace uniparam
