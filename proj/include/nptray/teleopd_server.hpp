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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "nptray/teleopd.hpp"

namespace nptray::teleop {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  ///< 0 picks a free port
  std::filesystem::path record_dir;  ///< written on stop when set
};

struct ServerStats {
  long frames = 0;
  long overruns = 0;  ///< periods whose deadline had already passed
  double mean_solve_ms = 0.0;
  double p99_solve_ms = 0.0;
};

/// WebSocket front end. One network thread handles ingestion and
/// broadcast; one control thread owns the Session. The first client to
/// send a command steers; later clients observe.
class Server {
 public:
  /// Binds immediately; throws std::runtime_error when the address is busy.
  Server(const ExperimentConfig& config, const TeleopOptions& opt, const ServerOptions& server);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;

  /// Starts both threads and returns.
  void start();

  /// Stops both threads, then writes the record if requested. Idempotent.
  void stop();

  /// Blocks until stop() or SIGINT/SIGTERM.
  void run_until_signal();

  ServerStats stats() const;

 private:
  friend class Connection;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses "host:port".
ServerOptions parse_bind(const std::string& bind);

}  // namespace nptray::teleop
