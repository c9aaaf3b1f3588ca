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

#include <cstdint>
#include <string>
#include <vector>

#include "uniparam/linalg.hpp"
#include "uniparam/unitary_maps.hpp"

namespace uniparam {

/// One typed table cell. Doubles print as %.17g (with a forced decimal
/// marker), so CSV files round-trip bit-exactly back into the same report.
struct Cell {
  enum class Kind { kText, kReal, kInt };
  Kind kind = Kind::kText;
  std::string text;
  double real = 0.0;
  std::int64_t integer = 0;

  static Cell of(std::string v) { return {Kind::kText, std::move(v), 0.0, 0}; }
  static Cell of(double v) { return {Kind::kReal, {}, v, 0}; }
  static Cell of(std::int64_t v) { return {Kind::kInt, {}, 0.0, v}; }

  std::string to_string() const;
  bool operator==(const Cell& other) const;
};

struct Report {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  bool operator==(const Report& other) const = default;
};

std::string to_csv(const Report& report);
std::string to_json_text(const Report& report);
std::string to_markdown(const Report& report);

/// Inverse of to_csv (exact round-trip; the report name is carried in a
/// leading comment line).
Report parse_csv(const std::string& text);

/// All benchmark knobs. A fixed seed pins every value in every report
/// (timings excluded; op counts included): each sweep point derives its own
/// stream from (seed, row identifiers), independent of execution order and
/// thread count.
struct BenchConfig {
  std::vector<std::string> maps = {"taylor", "cayley", "householder",
                                   "givens", "pauli",  "csd"};
  std::vector<Index> sizes = {16, 64, 256};
  Index rank = 4;
  int layers = 1;
  int order = kAccuracyOrder;
  double init_scale = 0.01;
  int batch = 32;
  int seeds = 10;
  std::uint64_t seed = 1;
  std::string gram_mode = "auto";  // auto | full | stiefel

  std::string geometry = "deberta-base";
  std::vector<Index> ranks = {1, 16, 256};

  std::vector<int> bits = {8, 4, 3, 2, 1};
  Index group = 128;
  double kappa = 0.0;

  Index train_size = 32;
  Index train_rank = 4;
  int train_order = 6;
  int train_steps = 2000;
  double train_target = 1e-2;
  bool train_qat = false;
};

/// Orthogonality sweep. Row families by map name: the six Lie maps draw
/// B_K at the configured init scale; "pauli" rows draw circuit angles
/// uniform(-pi, pi); "csd" rows compose circuit leaves at any size. Error
/// is the max Gram deviation — over the full matrix when the row
/// materializes (n <= 1024 and the kind permits), otherwise over the first
/// `rank` columns (a Stiefel point) — plus a batch isometry probe
/// max_b |  ||Qx_b|| / ||x_b|| - 1 |.
Report bench_unitarity(const BenchConfig& cfg);

/// Timing and instruction-count sweep: forward and reverse applications per
/// kind and size. Median wall time of 7 runs after 3 warmups; op counts from
/// the instrumented kernels are the machine-independent primary signal.
/// "dense" rows time a materialized-circuit matvec where it fits in memory
/// and fall back to the 2N^2 counting model (mode "model") above it.
Report bench_speed(const BenchConfig& cfg);

/// Parameter/memory accounting per geometry and rank: the 2NK low-rank
/// baseline against this library's exact trainable-scalar enumeration.
Report params_table(const BenchConfig& cfg);

/// Bits-per-parameter table for group-wise quantization at the configured
/// group size, with bytes for a 1000-parameter block.
Report quant_table(const BenchConfig& cfg);

struct TrainResult {
  Report curve;          // step, loss, residual for the selected run
  double lr = 0.0;       // selected by the 3-point sweep
  double final_residual = 0.0;
  int steps_run = 0;
  bool diverged = false;
  int diverged_step = -1;
};

/// Fits a random unit-Frobenius rank-K target with a Taylor-map adapter by
/// plain gradient descent, sweeping lr over {0.3, 0.1, 0.03} and stopping
/// early once the target residual is reached. train_qat enables 8-bit
/// group-wise fake quantization on the Lie parameter stores.
TrainResult train_toy(const BenchConfig& cfg);

/// Size-split description for the given dimension (compact line + tree).
std::string csd_plan_text(Index n);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Acceptance thresholds over a bench_unitarity report produced with
/// default-grade settings (order >= 18, init scale <= 0.01 for the series
/// rows): reflections/rotations within 64*eps*N, Cayley/Taylor within 1e-10,
/// materialized circuits within 1e-12, composed sizes within 1e-10.
std::vector<CheckResult> check_unitarity(const Report& report);

/// Scaling checks over a bench_speed report: circuit apply cost fits the
/// N log N model within 20% between q=10 and q=14, and the dense row at
/// N=2^14 costs at least 50x the circuit row.
std::vector<CheckResult> check_speed(const Report& report);

/// Statement printed by the CLI and echoed in the project README: which
/// published results this harness does and does not reproduce.
extern const char* const kNonReproducibility;

}  // namespace uniparam
