// Copyright 2026 The nptray Authors
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

// trayctl: batch runs, the Table 1 sweep and trajectory certification.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "nptray/error.hpp"
#include "nptray/harness.hpp"

namespace {

using nlohmann::json;
using namespace nptray;

void print_objects(const StabilityReport& report) {
  std::printf("%-6s %10s %10s %8s\n", "id", "S_max", "B_max", "contact");
  for (const ObjectTrace& o : report.objects) {
    std::printf("%-6s %10.4f %10.4f %8s\n", o.id.c_str(), o.s_max, o.b_max,
                o.first_loss < 0 ? "held" : "lost");
  }
}

int cmd_run(const std::string& config_path, std::optional<std::string> mode,
            std::optional<std::uint64_t> seed, std::optional<double> duration,
            std::optional<std::string> out) {
  ExperimentConfig c = load_config(config_path);
  if (mode) c.mode = parse_mode(*mode);
  if (seed) c.seed = *seed;
  if (duration) c.duration = *duration;
  if (out) c.output_dir = *out;
  const RunResult r = run_experiment(c);
  print_objects(r.report);
  std::printf("offset object  S_max %.4f  B_max %.4f\n", r.offset_s_max, r.offset_b_max);
  std::printf("E_bar %.4f m  aligned %.4f m at %.2f s\n", r.report.e_bar, r.report.e_bar_aligned,
              r.report.aligned_lag * c.dt);
  std::printf("solve ms  mean %.3f  p99 %.3f  max %.3f\n", r.timing.mean_ms, r.timing.p99_ms,
              r.timing.max_ms);
  std::printf("audit %s  degraded %ld  nonconverged %ld  max slack %.3g\n",
              r.audit.passed() ? "pass" : "FAIL", r.audit.degraded, r.audit.nonconverged,
              r.audit.max_slack);
  if (!c.output_dir.empty()) {
    write_outputs(r, c.output_dir);
    std::printf("wrote %s\n", c.output_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& preset, int azimuths, std::optional<double> duration,
              std::optional<std::string> out) {
  if (preset != "table1") throw ConfigError("preset", "only \"table1\" is built in");
  ExperimentConfig c;
  if (duration) c.duration = *duration;
  const SweepResult s = sweep_table1(c, azimuths);
  std::printf("%-6s %7s %5s %7s %10s %10s\n", "cell", "offset", "mu", "height", "S_max", "B_max");
  for (const SweepCell& cell : s.cells) {
    std::printf("%-6s %7.2f %5.2f %7.2f %10.4f %10.4f\n", cell.id.c_str(), cell.offset, cell.mu,
                cell.height, cell.s_max, cell.b_max);
  }
  for (const std::string& v : s.violations) std::printf("violation: %s\n", v.c_str());
  std::printf("%zu cells, %zu violations\n", s.cells.size(), s.violations.size());
  if (out) {
    json cells = json::array();
    for (const SweepCell& cell : s.cells) {
      cells.push_back({{"id", cell.id},
                       {"offset", cell.offset},
                       {"mu", cell.mu},
                       {"height", cell.height},
                       {"S_max", cell.s_max},
                       {"B_max", cell.b_max}});
    }
    std::ofstream os(*out);
    if (!os) throw std::runtime_error("cannot write " + *out);
    os << json{{"azimuths", azimuths}, {"cells", cells}, {"violations", s.violations}}.dump(2)
       << '\n';
  }
  return s.violations.empty() ? 0 : 1;
}

// A manifest file holds "table1", a list of objects, or a full config.
int cmd_certify(const std::string& trajectory, const std::string& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw ConfigError("manifest", "cannot open " + manifest_path);
  const json j = json::parse(is);
  ExperimentConfig c;
  if (j.is_object()) {
    c = config_from_json(j, c);
  } else {
    c.manifest = manifest_from_json(j);
  }
  OracleOptions opt;
  opt.reference_height = c.rotation_centre_height();
  const StabilityReport r = certify(trajectory, c.manifest, opt);
  print_objects(r);
  const bool ok = std::all_of(r.objects.begin(), r.objects.end(), [](const ObjectTrace& o) {
    return o.first_loss < 0 && o.s_max <= 1.0 && o.b_max <= 1.0;
  });
  std::printf("%s\n", ok ? "certified: every object S_max <= 1 and B_max <= 1" : "NOT certified");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonprehensile tray transport: batch runs, sweep and certification"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> mode, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "F or FSC")->check(CLI::IsMember({"F", "FSC"}));
  run->add_option("--seed", seed, "Noise seed");
  run->add_option("--duration", duration, "Seconds")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory");

  std::string preset;
  int azimuths = 12;
  std::optional<double> sweep_duration;
  std::optional<std::string> sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "Monotonicity sweep over the Table 1 grid");
  sweep->add_option("--preset", preset, "Grid preset")->required();
  sweep->add_option("--azimuths", azimuths, "Placements per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--duration", sweep_duration, "Seconds")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "Write the grid as JSON");

  std::string trajectory, manifest;
  CLI::App* cert = app.add_subcommand("certify", "Oracle over a recorded trajectory.csv");
  cert->add_option("--trajectory", trajectory, "trajectory.csv")->required()->check(
      CLI::ExistingFile);
  cert->add_option("--manifest", manifest, "Manifest or config JSON")->required()->check(
      CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, mode, seed, duration, out);
    if (*sweep) return cmd_sweep(preset, azimuths, sweep_duration, sweep_out);
    if (*cert) return cmd_certify(trajectory, manifest);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trayctl: %s\n", e.what());
    return 2;
  }
  return 0;
}
