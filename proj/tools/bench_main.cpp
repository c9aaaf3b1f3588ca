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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "uniparam/bench.hpp"

namespace {

using uniparam::BenchConfig;
using uniparam::CheckResult;
using uniparam::Report;

std::string render(const Report& report, const std::string& format) {
  if (format == "csv") return uniparam::to_csv(report);
  if (format == "json") return uniparam::to_json_text(report);
  if (format == "md") return uniparam::to_markdown(report);
  throw std::invalid_argument("unknown --format (expected csv|json|md): " + format);
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + out_path);
}

/// Prints one line per check; returns false if any failed.
bool report_checks(const std::vector<CheckResult>& checks) {
  bool all_pass = true;
  for (const auto& check : checks) {
    std::cout << (check.pass ? "PASS" : "FAIL") << "  " << check.name << "  ("
              << check.detail << ")\n";
    all_pass &= check.pass;
  }
  return all_pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uniparam benchmark harness: orthogonality sweeps, op-count and "
               "timing benches, parameter/memory and quantization tables, size-split "
               "plans, and a toy training task."};
  app.footer(std::string("Note: ") + uniparam::kNonReproducibility);
  app.require_subcommand(1);

  BenchConfig cfg;
  std::string format = "csv";
  std::string out_path;
  bool check = false;
  bool train_qat = false;
  long long plan_n = 0;

  const auto add_output_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "root RNG seed (pins every reported value)");
    sub->add_option("--format", format, "output format: csv|json|md")
        ->check(CLI::IsMember({"csv", "json", "md"}));
    sub->add_option("--out", out_path, "write the report to this file instead of stdout");
  };
  const auto add_sweep_flags = [&](CLI::App* sub) {
    sub->add_option("--maps", cfg.maps,
                    "row kinds: exp|taylor|cayley|neumann|householder|givens|pauli|csd")
        ->delimiter(',');
    sub->add_option("--sizes", cfg.sizes, "operator sizes N")->delimiter(',');
    sub->add_option("--rank", cfg.rank, "Lie column count K (and Stiefel column count)");
    sub->add_option("--layers", cfg.layers, "entangling layers L for circuit rows");
    sub->add_option("--order", cfg.order, "series truncation order P");
    sub->add_option("--init", cfg.init_scale, "init scale for Lie parameter rows");
  };

  CLI::App* unitarity = app.add_subcommand(
      "unitarity", "orthogonality error sweep over map kinds and sizes");
  add_sweep_flags(unitarity);
  add_output_flags(unitarity);
  unitarity->add_option("--batch", cfg.batch, "vectors per isometry probe");
  unitarity->add_option("--seeds", cfg.seeds, "random restarts per row");
  unitarity->add_option("--gram", cfg.gram_mode, "gram matrix mode: auto|full|stiefel")
      ->check(CLI::IsMember({"auto", "full", "stiefel"}));
  unitarity->add_flag("--check", check, "apply acceptance thresholds; exit 1 on failure");

  CLI::App* speed = app.add_subcommand(
      "speed", "forward/backward timing and instrumented op counts");
  add_sweep_flags(speed);
  add_output_flags(speed);
  speed->add_flag("--check", check, "apply scaling checks; exit 1 on failure");

  CLI::App* params = app.add_subcommand(
      "params-table", "trainable-parameter and memory accounting per geometry");
  params->add_option("--geometry", cfg.geometry, "geometry preset name");
  params->add_option("--ranks", cfg.ranks, "adapter ranks to tabulate")->delimiter(',');
  params->add_option("--layers", cfg.layers, "entangling layers for circuit factors");
  add_output_flags(params);

  CLI::App* quant = app.add_subcommand(
      "quant-table", "bits-per-parameter accounting for group-wise quantization");
  quant->add_option("--bits", cfg.bits, "payload bit widths")->delimiter(',');
  quant->add_option("--group", cfg.group, "quantization group size g");
  quant->add_option("--kappa", cfg.kappa, "adaptive bit-loading exponent (informational)");
  add_output_flags(quant);

  CLI::App* train = app.add_subcommand(
      "train-toy", "fit a random low-rank target with an orthogonal adapter");
  train->add_option("--size", cfg.train_size, "square target size N");
  train->add_option("--rank", cfg.train_rank, "adapter and target rank K");
  train->add_option("--order", cfg.train_order, "series order for the adapter factors");
  train->add_option("--steps", cfg.train_steps, "max gradient steps per learning rate");
  train->add_option("--target", cfg.train_target, "residual early-stop threshold");
  train->add_flag("--qat", train_qat, "8-bit fake quantization on Lie parameter stores");
  add_output_flags(train);

  CLI::App* plan = app.add_subcommand("csd-plan", "print the size split for a dimension");
  plan->add_option("n", plan_n, "operator size N")->required();
  plan->add_option("--out", out_path, "write the plan to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (unitarity->parsed()) {
      const Report report = uniparam::bench_unitarity(cfg);
      write_output(render(report, format), out_path);
      if (check && !report_checks(uniparam::check_unitarity(report))) return 1;
    } else if (speed->parsed()) {
      const Report report = uniparam::bench_speed(cfg);
      write_output(render(report, format), out_path);
      if (check && !report_checks(uniparam::check_speed(report))) return 1;
    } else if (params->parsed()) {
      write_output(render(uniparam::params_table(cfg), format), out_path);
    } else if (quant->parsed()) {
      write_output(render(uniparam::quant_table(cfg), format), out_path);
    } else if (train->parsed()) {
      cfg.train_qat = train_qat;
      const uniparam::TrainResult result = uniparam::train_toy(cfg);
      write_output(render(result.curve, format), out_path);
      std::fprintf(stderr, "lr %.3g  residual %.6g  steps %d%s\n", result.lr,
                   result.final_residual, result.steps_run,
                   result.diverged ? "  DIVERGED" : "");
      if (result.diverged) {
        std::fprintf(stderr, "loss became non-finite at step %d\n", result.diverged_step);
        return 1;
      }
    } else if (plan->parsed()) {
      write_output(uniparam::csd_plan_text(static_cast<uniparam::Index>(plan_n)) + "\n",
                   out_path);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
