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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "uniparam/linalg.hpp"
#include "uniparam/quantizer.hpp"

namespace uniparam {

/// One flat buffer of trainable scalars plus its per-scalar trainable mask
/// and optional quantization-aware-training state. Every parameterized
/// object (Lie matrices, circuit angles, cosine-sine angles, diagonals) owns
/// its scalars through one of these, and the gradient engine keys gradient
/// maps by store address — so stores live behind shared_ptr and never move.
///
/// Stores are single-writer: reads from concurrent forward evaluations are
/// safe only while no optimizer step is mutating raw().
class ParamStore {
 public:
  ParamStore(std::string name, Vector values);

  const std::string& name() const { return name_; }
  Index size() const { return values_.size(); }

  /// The master (full-precision) values, mutated by optimizer steps.
  Vector& raw() { return values_; }
  const Vector& raw() const { return values_; }

  /// The values every forward evaluation consumes: raw values, passed through
  /// group-wise fake quantization when QAT is configured. Inside a
  /// SurrogateForwardGuard the quantizer is bypassed (the straight-through
  /// estimator declares identity as its surrogate, and gradient checks must
  /// differentiate the surrogate, not the staircase).
  Vector read() const;

  std::vector<std::uint8_t>& trainable() { return trainable_; }
  const std::vector<std::uint8_t>& trainable() const { return trainable_; }
  bool is_trainable(Index i) const { return trainable_[static_cast<std::size_t>(i)] != 0; }
  Index trainable_count() const;

  void set_qat(std::optional<QuantConfig> cfg) { qat_ = std::move(cfg); }
  const std::optional<QuantConfig>& qat() const { return qat_; }

  std::uint64_t seed = 0;      // RNG seed recorded at initialization
  nlohmann::json meta;         // owner-specific shape info for the sidecar

 private:
  std::string name_;
  Vector values_;
  std::vector<std::uint8_t> trainable_;
  std::optional<QuantConfig> qat_;
};

using ParamStorePtr = std::shared_ptr<ParamStore>;

ParamStorePtr make_param_store(std::string name, Vector values);

/// Gradient accumulator keyed by store address. Shared stores accumulate
/// additively.
using GradMap = std::unordered_map<const ParamStore*, Vector>;

void accumulate_grad(GradMap& grads, const ParamStore* store, const Vector& g);

/// While alive, ParamStore::read() skips quantization and discrete forwards
/// (Rademacher) produce their smooth surrogate instead of hard signs. Used by
/// gradcheck so finite differences probe the function the backward pass
/// actually differentiates. Thread-local and re-entrant.
class SurrogateForwardGuard {
 public:
  SurrogateForwardGuard();
  ~SurrogateForwardGuard();
  SurrogateForwardGuard(const SurrogateForwardGuard&) = delete;
  SurrogateForwardGuard& operator=(const SurrogateForwardGuard&) = delete;

  static bool active();
};

/// Serialization: `path` receives the raw values as little-endian IEEE
/// doubles; `path` + ".json" receives a sidecar with name, shape metadata,
/// trainable mask, seed, and QAT config. Round-trips bit-exactly.
void save_param_store(const ParamStore& store, const std::filesystem::path& path);
ParamStorePtr load_param_store(const std::filesystem::path& path);

}  // namespace uniparam
