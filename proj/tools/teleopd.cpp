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

// teleopd: the WebSocket teleoperation service.

#include <cstdio>
#include <optional>

#include "CLI11.hpp"
#include "nptray/teleopd_server.hpp"

int main(int argc, char** argv) {
  using namespace nptray;
  CLI::App app{"Teleoperation service: targets in, 50 Hz state frames out"};
  std::string config_path, bind = "127.0.0.1:8765";
  std::optional<std::string> record;
  teleop::TeleopOptions opt;
  app.add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--bind", bind, "addr:port")->capture_default_str();
  app.add_option("--record", record, "Write a replayable trace to this directory on exit");
  app.add_option("--scale", opt.scale, "Target displacement gain")->capture_default_str();
  app.add_flag("--lockstep", opt.lockstep, "Advance one cycle per target message");
  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = load_config(config_path);
    teleop::ServerOptions so = teleop::parse_bind(bind);
    if (record) so.record_dir = *record;
    teleop::Server server(config, opt, so);
    std::printf("teleopd listening on %s:%u (%s, %s)\n", so.address.c_str(), server.port(),
                std::string(to_string(config.mode)).c_str(),
                opt.lockstep ? "lockstep" : "real time");
    std::fflush(stdout);
    server.run_until_signal();
    const teleop::ServerStats s = server.stats();
    std::printf("%ld frames, %ld overruns, solve ms mean %.3f p99 %.3f\n", s.frames, s.overruns,
                s.mean_solve_ms, s.p99_solve_ms);
    if (record) std::printf("recorded %s\n", record->c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "teleopd: %s\n", e.what());
    return 2;
  }
  return 0;
}
