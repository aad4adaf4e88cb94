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

#include <cstddef>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nptray/control_loop.hpp"
#include "nptray/harness.hpp"
#include "nptray/oracle.hpp"

namespace nptray::teleop {

/// A client message that cannot be applied. The session is left unchanged.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetCmd {
  Vec3 p = Vec3::Zero();  ///< operator displacement [m], before scaling
  std::optional<double> client_ms;
};
struct ModeCmd {
  Mode mode = Mode::kFSC;
};
struct ResetCmd {};
struct ScaleCmd {
  double scale = 2.0;
};

using Command = std::variant<TargetCmd, ModeCmd, ResetCmd, ScaleCmd>;

/// Parses one client text frame. Unknown fields are ignored.
Command parse_message(std::string_view text);

std::string error_reply(std::string_view message);

struct TeleopOptions {
  double scale = 2.0;          ///< target displacement gain
  double stale_after = 0.5;    ///< [s] target age before the reference decays
  double decay_time = 0.25;    ///< [s] time constant of the decay
  std::size_t queue_capacity = 64;  ///< outbound frames per client
  bool lockstep = false;       ///< one cycle per received target
  bool record = false;         ///< keep the replayable input trace

  void validate() const;
};

/// Reference gain for a target of the given age.
double staleness_gain(double age, const TeleopOptions& opt);

/// Ingestion-side mailbox. In real time the target slot holds only the
/// latest target; other commands queue in arrival order. In lockstep every
/// target is kept and marks one cycle.
class Inbox {
 public:
  explicit Inbox(bool lockstep) : lockstep_(lockstep) {}

  void push(Command c);

  /// Commands for the next cycle, controls first and the target last.
  /// Lockstep returns nothing until a target is queued.
  std::optional<std::vector<Command>> take();

  bool lockstep() const { return lockstep_; }

 private:
  bool lockstep_;
  std::mutex mu_;
  std::deque<Command> queue_;
  std::optional<TargetCmd> latest_;
};

/// Bounded frame queue. A full queue drops its oldest entry, so a push
/// never blocks.
class FrameQueue {
 public:
  explicit FrameQueue(std::size_t capacity);

  void push(std::string frame);
  std::optional<std::string> pop();
  std::size_t dropped() const;
  std::size_t size() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<std::string> q_;
  std::size_t dropped_ = 0;
};

struct Frame {
  long seq = 0;
  double t = 0.0;        ///< session time [s]
  double ref_gain = 1.0;
  Cycle cycle;
  std::vector<ObjectMetrics> objects;  ///< manifest order
};

/// Session state. Owned by exactly one control loop; not thread safe.
class Session {
 public:
  Session(const ExperimentConfig& config, const TeleopOptions& opt);

  /// Takes effect at the next step.
  void apply(const Command& c);

  /// One control period.
  Frame step();

  std::string frame_json(const Frame& f) const;

  Mode mode() const { return mode_; }
  double scale() const { return opt_.scale; }
  long seq() const { return seq_; }
  const ExperimentConfig& config() const { return config_; }
  const TeleopOptions& options() const { return opt_; }
  const std::vector<double>& solve_ms() const { return solve_ms_; }

  /// Per-cycle x_m, ref_gain, mode and reset; empty unless recording.
  const InputTrace& recorded() const { return record_; }

  /// Writes input.csv and config.json; `trayctl run --config` replays it.
  void write_record(const std::filesystem::path& dir) const;

 private:
  ExperimentConfig config_;
  TeleopOptions opt_;
  ControlLoop loop_;
  double ref_height_;
  Mode mode_;
  Vec3 target_;
  double target_time_ = 0.0;
  bool reset_pending_ = false;
  long seq_ = 0;
  std::vector<double> solve_ms_;
  InputTrace record_;
};

}  // namespace nptray::teleop
