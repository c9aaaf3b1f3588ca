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

#include "uniparam/adapter.hpp"

#include <cstdio>
#include <stdexcept>
#include <utility>

#include "uniparam/rng.hpp"

namespace uniparam {

namespace {

std::string trim_zeros_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

ModelGeometry ModelGeometry::custom(std::string name, Index hidden, int layer_count,
                                    std::vector<std::string> projections) {
  if (hidden < 1 || layer_count < 1 || projections.empty())
    throw std::invalid_argument("ModelGeometry: hidden, layers, and projections must be set");
  ModelGeometry g;
  g.name = std::move(name);
  g.hidden = hidden;
  g.layer_count = layer_count;
  g.projections = std::move(projections);
  for (int layer = 0; layer < layer_count; ++layer) {
    for (const auto& proj : g.projections) {
      g.matrices.push_back(
          {g.name + ".layer" + std::to_string(layer) + "." + proj, hidden, hidden});
    }
  }
  return g;
}

ModelGeometry ModelGeometry::preset(std::string_view name) {
  if (name == "deberta-base") return custom("deberta-base", 768, 12, {"query", "value"});
  if (name == "llama31-405b") return custom("llama31-405b", 16384, 126, {"query", "value"});
  throw std::invalid_argument("unknown geometry preset: " + std::string(name));
}

Index lora_param_count(Index rows, Index cols, Index rank) {
  if (rank < 1) throw std::invalid_argument("lora_param_count: rank must be >= 1");
  return rank * (rows + cols);
}

Index lora_param_count(const ModelGeometry& geometry, Index rank) {
  Index total = 0;
  for (const auto& m : geometry.matrices) total += lora_param_count(m.rows, m.cols, rank);
  return total;
}

std::string format_count(std::uint64_t count, char unit) {
  if (unit == 'K') {
    return trim_zeros_fixed(static_cast<double>(count) / 1e3, 1) + "K";
  }
  if (unit == 'M') {
    const double v = static_cast<double>(count) / 1e6;
    return trim_zeros_fixed(v, v < 10.0 ? 2 : 1) + "M";
  }
  throw std::invalid_argument("format_count: unit must be 'K' or 'M'");
}

std::string human_count(std::uint64_t count) {
  if (count >= 1000000) return format_count(count, 'M');
  if (count >= 1000) return format_count(count, 'K');
  return std::to_string(count);
}

std::string format_mb(std::uint64_t bytes) {
  return trim_zeros_fixed(static_cast<double>(bytes) / (1024.0 * 1024.0), 2) + "MB";
}

Adapter::Adapter(const Config& config)
    : rows_(config.rows),
      cols_(config.cols),
      rank_(config.rank),
      alpha_(config.alpha),
      lambda_(RealDiag::zeros(std::max<Index>(config.rank, 1), "lambda")) {
  if (rows_ < 2 || cols_ < 2) throw std::invalid_argument("Adapter: rows and cols must be >= 2");
  if (rank_ < 1 || rank_ > rows_ || rank_ > cols_)
    throw std::invalid_argument("Adapter: rank must be in [1, min(rows, cols)]");
  if (!(alpha_ > 0.0)) throw std::invalid_argument("Adapter: alpha must be > 0");

  CsdConfig u_cfg = config.unitary;
  u_cfg.seed = Rng::stream(config.unitary.seed, {0x75}).next_u64();
  CsdConfig v_cfg = config.unitary;
  v_cfg.seed = Rng::stream(config.unitary.seed, {0x76}).next_u64();
  u_ = make_unitary_node(rows_, u_cfg);
  v_ = make_unitary_node(cols_, v_cfg);

  if (config.lambda == LambdaKind::kRademacher)
    lambda_ = RademacherDiag::zeros(rank_, config.tau, "lambda");
}

Vector Adapter::delta_apply(const Vector& x, OpCounter* counter) const {
  if (x.size() != cols_) throw std::invalid_argument("Adapter::delta_apply: length mismatch");
  Vector t = v_->apply(x, /*transpose=*/true, counter).head(rank_);
  t = std::holds_alternative<RealDiag>(lambda_) ? std::get<RealDiag>(lambda_).apply(t, counter)
                                                : std::get<RademacherDiag>(lambda_).apply(t, counter);
  Vector padded = Vector::Zero(rows_);
  padded.head(rank_) = t;
  Vector y = u_->apply(padded, /*transpose=*/false, counter);
  count_flops(counter, static_cast<std::uint64_t>(rows_));
  return (alpha_ / static_cast<double>(rank_)) * y;
}

Vector Adapter::forward(const Matrix& w, const Vector& x, OpCounter* counter) const {
  if (w.rows() != rows_ || w.cols() != cols_)
    throw std::invalid_argument("Adapter::forward: weight shape mismatch");
  count_flops(counter, 2 * static_cast<std::uint64_t>(rows_) * cols_);
  return w * x + delta_apply(x, counter);
}

Matrix Adapter::materialize_delta(OpCounter* counter) const {
  Matrix delta(rows_, cols_);
  Vector e = Vector::Zero(cols_);
  for (Index j = 0; j < cols_; ++j) {
    e[j] = 1.0;
    delta.col(j) = delta_apply(e, counter);
    e[j] = 0.0;
  }
  return delta;
}

Tape::NodeId Adapter::delta_node(Tape& tape, Tape::NodeId x) const {
  Tape::NodeId t = tape.apply(*v_, x, /*transpose=*/true);
  t = tape.head(t, rank_);
  t = std::holds_alternative<RealDiag>(lambda_) ? tape.diag(std::get<RealDiag>(lambda_), t)
                                                : tape.diag(std::get<RademacherDiag>(lambda_), t);
  t = tape.pad(t, rows_);
  t = tape.apply(*u_, t, /*transpose=*/false);
  return tape.scale(t, alpha_ / static_cast<double>(rank_));
}

std::vector<ParamStorePtr> Adapter::stores() const {
  std::vector<ParamStorePtr> out;
  v_->collect_stores(out);
  if (const auto* real = std::get_if<RealDiag>(&lambda_)) {
    out.push_back(real->store());
  } else {
    out.push_back(std::get<RademacherDiag>(lambda_).store());
  }
  u_->collect_stores(out);
  return out;
}

Index Adapter::trainable_param_count() const {
  Index total = 0;
  for (const auto& store : stores()) total += store->trainable_count();
  return total;
}

}  // namespace uniparam
