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

#include <optional>
#include <string_view>

#include "nptray/orientation.hpp"
#include "nptray/sigproc.hpp"
#include "nptray/smoother.hpp"
#include "nptray/vobject.hpp"

namespace nptray {

enum class Mode { kF, kFSC };

/// "F" or "FSC"; throws ConfigError otherwise.
Mode parse_mode(std::string_view s);
std::string_view to_string(Mode m);

struct LoopConfig {
  Mode mode = Mode::kFSC;
  BiquadCoeffs filter = BiquadCoeffs::sim();
  SmootherConfig smoother;
  OffsetObject offset = OffsetObject::explicit_values(0.05, 0.25, 0.15, 0.325);
  bool ideal_tracking = false;  ///< x_s = x_d instead of the tracking plant
  Vec3 home = Vec3::Zero();
};

/// Everything one control period produces.
struct Cycle {
  long index = 0;
  double t = 0.0;
  Mode mode = Mode::kFSC;
  Vec3 x_m = Vec3::Zero();
  Vec3 x_r = Vec3::Zero();
  TrayState desired;
  Vec3 x_s = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  double omega_dot_max = 0.0;
  double snap_bound = 0.0;
  QpStatus status = QpStatus::kConverged;
  int iterations = 0;
  double kkt_residual = 0.0;
  double max_slack = 0.0;
  double solve_ms = 0.0;
  bool degraded = false;
};

/// The per-period pipeline shared by the batch harness and the service:
/// filter, differentiate, then either take the differentiated chain as the
/// desired motion (F) or smooth it under the stability constraints (FSC).
/// The plant is the smoother's first-order tracking model in both modes.
class ControlLoop {
 public:
  explicit ControlLoop(const LoopConfig& config);

  /// Advances one period. `ref_gain` in [0, 1] scales the reference
  /// velocity and acceleration handed to the smoother.
  Cycle step(const Vec3& x_m, double ref_gain = 1.0);

  /// Takes effect at the next step. The smoother is re-seeded from the
  /// plant so the desired chain continues without a jump.
  void set_mode(Mode m);

  /// Back to rest at `home`.
  void reset();

  Mode mode() const { return mode_; }
  long cycles() const { return index_; }
  const LoopConfig& config() const { return cfg_; }
  const StateVec& state() const { return x_; }

 private:
  void start(const Vec3& x_r);
  Cycle step_f(const std::array<Vec3, BackwardDifferentiator::kOrders>& d);
  Cycle step_fsc(const std::array<Vec3, BackwardDifferentiator::kOrders>& d, double ref_gain);

  LoopConfig cfg_;
  Mode mode_;
  Smoother smoother_;
  FilterState filter_;
  BackwardDifferentiator diff_;
  Eigen::MatrixXd plant_a_, plant_b_;  // plant step with the desired chain held
  StateVec x_ = StateVec::Zero();
  AxisAngle last_phi_;
  long index_ = 0;
  bool started_ = false;
  bool reseed_ = false;
};

}  // namespace nptray
