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

#include "uniparam/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "uniparam/adapter.hpp"
#include "uniparam/csd.hpp"
#include "uniparam/grad.hpp"
#include "uniparam/lie_params.hpp"
#include "uniparam/pauli_circuit.hpp"
#include "uniparam/quantizer.hpp"
#include "uniparam/rng.hpp"

namespace uniparam {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

int bench_threads() {
  if (const char* env = std::getenv("BENCH_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc != 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(0..count-1) on up to BENCH_THREADS workers. Determinism comes
/// from each index deriving its own RNG stream, not from execution order.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const int threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(bench_threads()), std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string csv_field(const Cell& cell) {
  std::string raw = cell.to_string();
  const bool must_quote =
      cell.kind == Cell::Kind::kText &&
      (raw.empty() || looks_numeric(raw) || raw.find_first_of(",\"\n") != std::string::npos);
  if (!must_quote) return raw;
  std::string quoted = "\"";
  for (const char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> split_csv_line(const std::string& line, std::vector<bool>* quoted_out) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      if (quoted_out != nullptr) quoted_out->push_back(was_quoted);
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  if (quoted_out != nullptr) quoted_out->push_back(was_quoted);
  return fields;
}

bool parse_int_cell(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] < '0' || s[j] > '9') return false;
  }
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

double median_ms(const std::function<void()>& fn, int warmups = 3, int reps = 7) {
  for (int i = 0; i < warmups; ++i) fn();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

Vector normal_vector(Rng& rng, Index n) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

// ---------------------------------------------------------------------------
// Unitarity sweep
// ---------------------------------------------------------------------------

struct RowPoint {
  std::string kind;
  Index n = 0;
};

bool is_lie_kind(const std::string& kind) { return kind != "pauli" && kind != "csd"; }

/// Circuit rows need power-of-two sizes and composed rows need everything
/// else; mixed sweeps keep each kind on the sizes it is defined for.
bool kind_accepts_size(const std::string& kind, Index n) {
  if (kind == "pauli" || kind == "dense") return n >= 2 && is_power_of_two(n);
  if (kind == "csd") return n >= 3 && !is_power_of_two(n);
  return n >= 2;
}

std::vector<Cell> unitarity_row(const BenchConfig& cfg, const RowPoint& point) {
  const Index n = point.n;
  if (n < 2) throw std::invalid_argument("bench unitarity: sizes must be >= 2");
  const bool pauli = point.kind == "pauli";
  const bool csd = point.kind == "csd";
  const double used_scale = (pauli || csd) ? kPi : cfg.init_scale;
  const Index krank = std::min<Index>(cfg.rank, n - 1);

  std::string mode = cfg.gram_mode;
  if (mode != "full" && mode != "stiefel") mode = n <= 1024 ? "full" : "stiefel";
  if (pauli && n > 4096) mode = "stiefel";  // dense circuit guard

  MapKind kind = MapKind::kTaylor;
  if (is_lie_kind(point.kind)) {
    kind = parse_map_kind(point.kind);
    if ((kind == MapKind::kExponential || kind == MapKind::kCayley) && n > 2048)
      throw std::invalid_argument("bench unitarity: exp/cayley rows need sizes <= 2048");
  }

  double err_sum = 0.0;
  double err_max = 0.0;
  double batch_max = 0.0;
  for (int s = 0; s < cfg.seeds; ++s) {
    Rng stream = Rng::stream(cfg.seed, {fnv1a("unitarity"), fnv1a(point.kind),
                                        static_cast<std::uint64_t>(n),
                                        static_cast<std::uint64_t>(s)});
    const std::uint64_t pseed = stream.next_u64();

    std::function<Vector(const Vector&)> apply_fn;
    std::function<Matrix()> full_fn;
    std::unique_ptr<UnitaryOperator> op;        // keeps csd/pauli objects alive
    std::unique_ptr<LieParams> params;
    Matrix dense;                               // exp/cayley path

    if (pauli) {
      const int q = log2_exact(n);
      op = std::make_unique<PauliCircuitOperator>(
          TwoDesignCircuit::random(q, cfg.layers, kPi, pseed));
    } else if (csd) {
      CsdConfig node_cfg;
      node_cfg.leaf = LeafKind::kPauli;
      node_cfg.layers = cfg.layers;
      node_cfg.rank = cfg.rank;
      node_cfg.map = {MapKind::kTaylor, cfg.order};
      node_cfg.init_scale = kPi;
      node_cfg.seed = pseed;
      op = make_unitary_node(n, node_cfg);
    } else {
      params = std::make_unique<LieParams>(
          LieParams::random(n, krank, cfg.init_scale, pseed));
      const MapSpec spec{kind, cfg.order};
      if (kind == MapKind::kExponential || kind == MapKind::kCayley) {
        dense = materialize_map(*params, spec);
        apply_fn = [&dense](const Vector& x) { return Vector(dense * x); };
        full_fn = [&dense]() { return dense; };
      } else {
        apply_fn = [&params, spec](const Vector& x) {
          return contracted_apply(*params, spec, x);
        };
        full_fn = [&params, spec]() { return materialize_map(*params, spec); };
      }
    }
    if (op != nullptr) {
      apply_fn = [&op](const Vector& x) { return op->apply(x); };
      full_fn = [&op]() { return op->materialize(); };
    }

    double err = 0.0;
    if (mode == "full") {
      err = unitarity_error(full_fn());
    } else {
      Matrix u(n, krank);
      Vector e = Vector::Zero(n);
      for (Index j = 0; j < krank; ++j) {
        e[j] = 1.0;
        u.col(j) = apply_fn(e);
        e[j] = 0.0;
      }
      err = unitarity_error(u);
    }
    err_sum += err;
    err_max = std::max(err_max, err);

    for (int b = 0; b < cfg.batch; ++b) {
      const Vector x = normal_vector(stream, n);
      const Vector y = apply_fn(x);
      batch_max = std::max(batch_max, std::abs(y.norm() / x.norm() - 1.0));
    }
  }

  return {Cell::of(point.kind),
          Cell::of(static_cast<std::int64_t>(n)),
          Cell::of(static_cast<std::int64_t>(mode == "full" ? n : krank)),
          Cell::of(std::string(mode)),
          Cell::of(static_cast<std::int64_t>(cfg.order)),
          Cell::of(static_cast<std::int64_t>(cfg.layers)),
          Cell::of(used_scale),
          Cell::of(static_cast<std::int64_t>(cfg.seeds)),
          Cell::of(static_cast<std::int64_t>(cfg.batch)),
          Cell::of(err_sum / cfg.seeds),
          Cell::of(err_max),
          Cell::of(batch_max)};
}

// ---------------------------------------------------------------------------
// Speed sweep
// ---------------------------------------------------------------------------

std::vector<Cell> speed_row(const BenchConfig& cfg, const RowPoint& point) {
  const Index n = point.n;
  Rng stream = Rng::stream(cfg.seed, {fnv1a("speed"), fnv1a(point.kind),
                                      static_cast<std::uint64_t>(n)});
  const std::uint64_t pseed = stream.next_u64();
  const Vector x = normal_vector(stream, n);
  const Vector ybar = normal_vector(stream, n);

  std::string mode = "timed";
  double fwd_ms = 0.0;
  double bwd_ms = 0.0;
  std::uint64_t fwd_flops = 0;
  std::uint64_t bwd_flops = 0;

  if (point.kind == "dense") {
    const int q = log2_exact(n);
    if (q <= 12) {
      const Matrix w =
          materialize_circuit(TwoDesignCircuit::random(q, cfg.layers, kPi, pseed));
      Vector sink = Vector::Zero(n);
      fwd_ms = median_ms([&]() { sink.noalias() = w * x; });
      bwd_ms = median_ms([&]() { sink.noalias() = w.transpose() * ybar; });
    } else {
      mode = "model";
    }
    fwd_flops = 2 * static_cast<std::uint64_t>(n) * n;  // dense matvec model
    bwd_flops = fwd_flops;
  } else {
    std::unique_ptr<UnitaryOperator> op;
    if (point.kind == "pauli") {
      op = std::make_unique<PauliCircuitOperator>(
          TwoDesignCircuit::random(log2_exact(n), cfg.layers, kPi, pseed));
    } else if (point.kind == "csd") {
      CsdConfig node_cfg;
      node_cfg.leaf = LeafKind::kPauli;
      node_cfg.layers = cfg.layers;
      node_cfg.rank = cfg.rank;
      node_cfg.map = {MapKind::kTaylor, cfg.order};
      node_cfg.init_scale = kPi;
      node_cfg.seed = pseed;
      op = make_unitary_node(n, node_cfg);
    } else {
      const MapKind kind = parse_map_kind(point.kind);
      if ((kind == MapKind::kExponential || kind == MapKind::kCayley) && n > 2048)
        throw std::invalid_argument("bench speed: exp/cayley rows need sizes <= 2048");
      const Index krank = std::min<Index>(cfg.rank, n - 1);
      op = std::make_unique<LieMapOperator>(
          LieParams::random(n, krank, cfg.init_scale, pseed), MapSpec{kind, cfg.order});
    }

    Vector sink;
    fwd_ms = median_ms([&]() { sink = op->apply(x); });
    bwd_ms = median_ms([&]() {
      GradMap grads;
      sink = op->apply_vjp(x, ybar, false, grads);
    });
    OpCounter counter;
    (void)op->apply(x, false, &counter);
    fwd_flops = counter.flops;
    counter.reset();
    GradMap grads;
    (void)op->apply_vjp(x, ybar, false, grads, &counter);
    bwd_flops = counter.flops;
  }

  return {Cell::of(point.kind),
          Cell::of(static_cast<std::int64_t>(n)),
          Cell::of(std::move(mode)),
          Cell::of(fwd_ms),
          Cell::of(bwd_ms),
          Cell::of(static_cast<std::int64_t>(fwd_flops)),
          Cell::of(static_cast<std::int64_t>(bwd_flops))};
}

const Cell& row_cell(const Report& report, const std::vector<Cell>& row, const std::string& col) {
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (report.columns[i] == col) return row[i];
  }
  throw std::invalid_argument("report column not found: " + col);
}

const std::vector<Cell>* find_row(const Report& report, const std::string& kind, Index n) {
  for (const auto& row : report.rows) {
    if (row_cell(report, row, "kind").text == kind &&
        row_cell(report, row, "n").integer == static_cast<std::int64_t>(n))
      return &row;
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

std::string Cell::to_string() const {
  switch (kind) {
    case Kind::kText:
      return text;
    case Kind::kInt: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(integer));
      return buf;
    }
    case Kind::kReal: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", real);
      std::string s = buf;
      // Force a marker so integers-valued doubles parse back as doubles.
      if (s.find_first_of(".eE") == std::string::npos &&
          s.find_first_of("nif") == std::string::npos)
        s += ".0";
      return s;
    }
  }
  return {};
}

bool Cell::operator==(const Cell& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::kText: return text == other.text;
    case Kind::kInt: return integer == other.integer;
    case Kind::kReal: {
      if (std::isnan(real) && std::isnan(other.real)) return true;
      return real == other.real;
    }
  }
  return false;
}

void Report::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("Report::add_row: wrong cell count");
  rows.push_back(std::move(row));
}

std::string to_csv(const Report& report) {
  std::string out = "# " + report.name + "\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i != 0) out += ',';
    out += report.columns[i];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i != 0) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json_text(const Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      switch (row[i].kind) {
        case Cell::Kind::kText: r[report.columns[i]] = row[i].text; break;
        case Cell::Kind::kReal: r[report.columns[i]] = row[i].real; break;
        case Cell::Kind::kInt: r[report.columns[i]] = row[i].integer; break;
      }
    }
    rows.push_back(std::move(r));
  }
  const nlohmann::json doc = {{"name", report.name}, {"rows", std::move(rows)}};
  return doc.dump(2) + "\n";
}

std::string to_markdown(const Report& report) {
  std::string out;
  out += "| ";
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i != 0) out += " | ";
    out += report.columns[i];
  }
  out += " |\n|";
  for (std::size_t i = 0; i < report.columns.size(); ++i) out += " --- |";
  out += '\n';
  for (const auto& row : report.rows) {
    out += "| ";
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i != 0) out += " | ";
      out += row[i].to_string();
    }
    out += " |\n";
  }
  return out;
}

Report parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Report report;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::invalid_argument("parse_csv: missing name line");
  report.name = line.substr(2);
  if (!std::getline(in, line)) throw std::invalid_argument("parse_csv: missing header");
  report.columns = split_csv_line(line, nullptr);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<bool> quoted;
    const std::vector<std::string> fields = split_csv_line(line, &quoted);
    if (fields.size() != report.columns.size())
      throw std::invalid_argument("parse_csv: row width mismatch");
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (quoted[i]) {
        row.push_back(Cell::of(fields[i]));
        continue;
      }
      std::int64_t as_int = 0;
      if (parse_int_cell(fields[i], as_int)) {
        row.push_back(Cell::of(as_int));
        continue;
      }
      if (looks_numeric(fields[i])) {
        row.push_back(Cell::of(std::strtod(fields[i].c_str(), nullptr)));
        continue;
      }
      row.push_back(Cell::of(fields[i]));
    }
    report.add_row(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Subcommand engines
// ---------------------------------------------------------------------------

Report bench_unitarity(const BenchConfig& cfg) {
  if (cfg.maps.empty() || cfg.sizes.empty())
    throw std::invalid_argument("bench unitarity: empty sweep");
  if (cfg.seeds < 1 || cfg.batch < 1)
    throw std::invalid_argument("bench unitarity: seeds and batch must be >= 1");

  std::vector<RowPoint> points;
  for (const auto& kind : cfg.maps) {
    if (is_lie_kind(kind)) (void)parse_map_kind(kind);  // validate early
    for (const Index n : cfg.sizes) {
      if (kind_accepts_size(kind, n)) points.push_back({kind, n});
    }
  }

  Report report;
  report.name = "unitarity";
  report.columns = {"kind",  "n",     "k",     "mode",     "order",   "layers",
                    "init",  "seeds", "batch", "mean_err", "max_err", "batch_err"};
  report.rows.resize(points.size());
  parallel_for(points.size(),
               [&](std::size_t i) { report.rows[i] = unitarity_row(cfg, points[i]); });
  return report;
}

Report bench_speed(const BenchConfig& cfg) {
  if (cfg.maps.empty() || cfg.sizes.empty())
    throw std::invalid_argument("bench speed: empty sweep");
  std::vector<RowPoint> points;
  for (const auto& kind : cfg.maps) {
    if (is_lie_kind(kind) && kind != "dense") (void)parse_map_kind(kind);
    for (const Index n : cfg.sizes) {
      if (kind_accepts_size(kind, n)) points.push_back({kind, n});
    }
  }

  Report report;
  report.name = "speed";
  report.columns = {"kind", "n", "mode", "fwd_ms", "bwd_ms", "fwd_flops", "bwd_flops"};
  report.rows.resize(points.size());
  // Timing rows run serially regardless of BENCH_THREADS so measurements do
  // not contend; op counts would be identical either way.
  for (std::size_t i = 0; i < points.size(); ++i) report.rows[i] = speed_row(cfg, points[i]);
  return report;
}

Report params_table(const BenchConfig& cfg) {
  const ModelGeometry geometry = ModelGeometry::preset(cfg.geometry);
  if (cfg.ranks.empty()) throw std::invalid_argument("params table: empty rank sweep");

  const char unit =
      lora_param_count(geometry, 1) < 1000000 ? 'K' : 'M';  // per-geometry column unit

  Report report;
  report.name = "params";
  report.columns = {"geometry", "method", "rank", "params", "label", "bytes", "mb"};
  const Rational fp32{32, 1};
  for (const Index rank : cfg.ranks) {
    const Index lora = lora_param_count(geometry, rank);
    const std::uint64_t lora_bytes = memory_bytes(lora, fp32);
    report.add_row({Cell::of(geometry.name), Cell::of(std::string("lora")),
                    Cell::of(static_cast<std::int64_t>(rank)),
                    Cell::of(static_cast<std::int64_t>(lora)),
                    Cell::of(format_count(static_cast<std::uint64_t>(lora), unit)),
                    Cell::of(static_cast<std::int64_t>(lora_bytes)),
                    Cell::of(format_mb(lora_bytes))});

    Adapter::Config acfg;
    acfg.rows = geometry.hidden;
    acfg.cols = geometry.hidden;
    acfg.rank = rank;
    acfg.unitary.leaf = LeafKind::kPauli;
    acfg.unitary.layers = cfg.layers;
    acfg.unitary.rank = cfg.rank;
    acfg.unitary.map = {MapKind::kTaylor, cfg.order};
    acfg.unitary.seed = cfg.seed;
    const Adapter adapter(acfg);
    const Index per_matrix = adapter.trainable_param_count();
    const Index ours = per_matrix * static_cast<Index>(geometry.matrices.size());
    const std::uint64_t ours_bytes = memory_bytes(ours, fp32);
    report.add_row({Cell::of(geometry.name), Cell::of(std::string("uniparam")),
                    Cell::of(static_cast<std::int64_t>(rank)),
                    Cell::of(static_cast<std::int64_t>(ours)),
                    Cell::of(format_count(static_cast<std::uint64_t>(ours), unit)),
                    Cell::of(static_cast<std::int64_t>(ours_bytes)),
                    Cell::of(format_mb(ours_bytes))});
  }
  return report;
}

Report quant_table(const BenchConfig& cfg) {
  if (cfg.bits.empty()) throw std::invalid_argument("quant table: empty bits sweep");
  Report report;
  report.name = "quant";
  report.columns = {"bits", "group", "bits_per_param", "rational", "bytes_per_1000"};
  for (const int bits : cfg.bits) {
    const Rational r = bits_per_param(bits, cfg.group);
    report.add_row(
        {Cell::of(static_cast<std::int64_t>(bits)), Cell::of(static_cast<std::int64_t>(cfg.group)),
         Cell::of(static_cast<double>(r.num) / static_cast<double>(r.den)),
         Cell::of(std::to_string(r.num) + "/" + std::to_string(r.den)),
         Cell::of(static_cast<std::int64_t>(memory_bytes(1000, r)))});
  }
  return report;
}

TrainResult train_toy(const BenchConfig& cfg) {
  const Index n = cfg.train_size;
  const Index rank = cfg.train_rank;
  if (n < 2 || rank < 1 || rank > n)
    throw std::invalid_argument("train toy: need size >= 2 and 1 <= rank <= size");

  // Random unit-Frobenius rank-K target.
  Rng target_rng = Rng::stream(cfg.seed, {fnv1a("train-target")});
  Matrix g(n, rank);
  Matrix h(rank, n);
  for (Index j = 0; j < rank; ++j) g.col(j) = normal_vector(target_rng, n);
  for (Index i = 0; i < rank; ++i) h.row(i) = normal_vector(target_rng, n).transpose();
  Matrix target = g * h;
  target /= target.norm();

  Adapter::Config acfg;
  acfg.rows = n;
  acfg.cols = n;
  acfg.rank = rank;
  // Unit residual coupling: alpha/K = 1 keeps the lambda sub-problem's
  // curvature at 2, so the fixed learning-rate sweep sits inside the GD
  // stability bound regardless of the rank.
  acfg.alpha = static_cast<double>(rank);
  acfg.unitary.leaf = LeafKind::kLieMap;
  acfg.unitary.rank = rank;
  acfg.unitary.map = {MapKind::kTaylor, cfg.train_order};
  acfg.unitary.init_scale = 0.1;
  acfg.unitary.seed = Rng::stream(cfg.seed, {fnv1a("train-init")}).next_u64();

  struct Run {
    double lr = 0.0;
    Report curve;
    double final_residual = std::numeric_limits<double>::infinity();
    int steps = 0;
    bool converged = false;
    bool diverged = false;
    int diverged_step = -1;
  };

  const double lrs[] = {0.3, 0.1, 0.03};
  std::vector<Run> runs;
  for (const double lr : lrs) {
    Run run;
    run.lr = lr;
    run.curve.name = "train-toy";
    run.curve.columns = {"step", "loss", "residual"};

    Adapter adapter(acfg);
    const std::vector<ParamStorePtr> stores = adapter.stores();
    if (cfg.train_qat) {
      for (const auto& store : stores) {
        if (store->meta.value("kind", "") == "lie") store->set_qat(QuantConfig{});
      }
    }

    for (int step = 0; step < cfg.train_steps; ++step) {
      Tape tape;
      Tape::NodeId loss_node = -1;
      for (Index j = 0; j < n; ++j) {
        Vector e = Vector::Zero(n);
        e[j] = 1.0;
        const Tape::NodeId delta = adapter.delta_node(tape, tape.input(std::move(e)));
        const Tape::NodeId diff = tape.sub(delta, tape.input(target.col(j)));
        const Tape::NodeId sq = tape.squared_norm(diff);
        loss_node = (j == 0) ? sq : tape.add(loss_node, sq);
      }
      const double loss = tape.value(loss_node)[0];
      const double residual = std::sqrt(std::max(loss, 0.0));  // ||target||_F = 1
      run.curve.add_row({Cell::of(static_cast<std::int64_t>(step)), Cell::of(loss),
                         Cell::of(residual)});
      run.final_residual = residual;
      run.steps = step + 1;
      if (!std::isfinite(loss)) {
        run.diverged = true;
        run.diverged_step = step;
        break;
      }
      if (residual <= cfg.train_target) {
        run.converged = true;
        break;
      }
      const GradMap grads = tape.backward(loss_node, Vector::Ones(1));
      sgd_step(stores, grads, lr);
    }
    runs.push_back(std::move(run));
  }

  const auto better = [](const Run& a, const Run& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    if (a.converged != b.converged) return a.converged;
    if (a.converged) return a.steps < b.steps;
    return a.final_residual < b.final_residual;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (better(runs[i], runs[best])) best = i;
  }

  TrainResult result;
  result.curve = std::move(runs[best].curve);
  result.lr = runs[best].lr;
  result.final_residual = runs[best].final_residual;
  result.steps_run = runs[best].steps;
  result.diverged = runs[best].diverged;
  result.diverged_step = runs[best].diverged_step;
  return result;
}

std::string csd_plan_text(Index n) {
  const SplitPlan plan = split_plan(n);
  return plan_compact(plan) + "\n" + plan_tree(plan);
}

std::vector<CheckResult> check_unitarity(const Report& report) {
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<CheckResult> results;
  for (const auto& row : report.rows) {
    const std::string& kind = row_cell(report, row, "kind").text;
    const Index n = row_cell(report, row, "n").integer;
    const std::string& mode = row_cell(report, row, "mode").text;
    const double err = row_cell(report, row, "max_err").real;
    const std::int64_t order = row_cell(report, row, "order").integer;
    const double init = row_cell(report, row, "init").real;

    double tol = 0.0;
    if (kind == "householder" || kind == "givens") {
      tol = 64.0 * eps * static_cast<double>(n);
    } else if (kind == "cayley" || kind == "exp") {
      tol = 1e-10;
    } else if (kind == "taylor") {
      if (order < kAccuracyOrder || init > 0.01) continue;  // outside the stated regime
      tol = 1e-10;
    } else if (kind == "pauli") {
      tol = 1e-12;
    } else if (kind == "csd") {
      tol = 1e-10;
    } else {
      continue;  // neumann: degrades by design, no unconditional bound
    }

    char detail[160];
    std::snprintf(detail, sizeof(detail), "max_err %.3e vs tol %.3e (%s)", err, tol,
                  mode.c_str());
    results.push_back({"unitarity/" + kind + "/n=" + std::to_string(n), err <= tol, detail});
  }
  return results;
}

std::vector<CheckResult> check_speed(const Report& report) {
  std::vector<CheckResult> results;
  const auto* pauli_small = find_row(report, "pauli", 1024);
  const auto* pauli_large = find_row(report, "pauli", 16384);
  const auto* dense_large = find_row(report, "dense", 16384);

  if (pauli_small == nullptr || pauli_large == nullptr) {
    results.push_back({"speed/circuit-scaling", false, "need pauli rows at n=1024 and n=16384"});
  } else {
    const double small_flops =
        static_cast<double>(row_cell(report, *pauli_small, "fwd_flops").integer);
    const double large_flops =
        static_cast<double>(row_cell(report, *pauli_large, "fwd_flops").integer);
    const double ratio = large_flops / small_flops;
    const double model = (16384.0 * 14.0) / (1024.0 * 10.0);  // N log N between the two sizes
    const bool ok = std::abs(ratio / model - 1.0) <= 0.2;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "op ratio %.3f vs N log N model %.3f", ratio, model);
    results.push_back({"speed/circuit-scaling", ok, detail});
  }

  if (pauli_large == nullptr || dense_large == nullptr) {
    results.push_back({"speed/circuit-vs-dense", false, "need pauli and dense rows at n=16384"});
  } else {
    const double pauli_flops =
        static_cast<double>(row_cell(report, *pauli_large, "fwd_flops").integer);
    const double dense_flops =
        static_cast<double>(row_cell(report, *dense_large, "fwd_flops").integer);
    const double ratio = dense_flops / pauli_flops;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "dense/circuit op ratio %.1f (need >= 50)", ratio);
    results.push_back({"speed/circuit-vs-dense", ratio >= 50.0, detail});
  }
  return results;
}

const char* const kNonReproducibility =
    "Scope note: this harness does not fine-tune real language or vision models. "
    "Published adapter-tuning accuracy tables (GLUE-style NLP suites, E2E generation, "
    "ViT image classification, Mistral-scale instruction models) require multi-GPU "
    "training of large pretrained checkpoints and are NOT reproducible at desk scale "
    "by this repository. The benchmark and test suites substitute machine-checkable "
    "properties: exact parameter/memory accounting, orthogonality error sweeps, "
    "oracle-equivalence checks, finite-difference gradient validation, op-count "
    "scaling laws, and a toy low-rank recovery task.";

}  // namespace uniparam
