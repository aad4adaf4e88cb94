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


#include "nptray/control_loop.hpp"

#include <chrono>
#include <string>

#include "nptray/error.hpp"

namespace nptray {

Mode parse_mode(std::string_view s) {
  if (s == "F") return Mode::kF;
  if (s == "FSC") return Mode::kFSC;
  throw ConfigError("mode", "expected \"F\" or \"FSC\", got \"" + std::string(s) + "\"");
}

std::string_view to_string(Mode m) { return m == Mode::kF ? "F" : "FSC"; }

ControlLoop::ControlLoop(const LoopConfig& config)
    : cfg_(config),
      mode_(config.mode),
      smoother_(config.smoother, config.offset),
      diff_(config.smoother.dt) {
  if (!cfg_.filter.is_stable()) throw ValidationError("filter: poles must lie inside the unit circle");
  const SmootherModel& m = smoother_.model();
  std::tie(plant_a_, plant_b_) = discretize_zoh(m.a_ss, m.a_sd, m.dt);
  reset();
}

void ControlLoop::reset() {
  filter_ = FilterState{};
  diff_.reset();
  x_.setZero();
  last_phi_ = AxisAngle::identity();
  index_ = 0;
  started_ = false;
  reseed_ = false;
}

void ControlLoop::set_mode(Mode m) {
  if (m == mode_) return;
  mode_ = m;
  reseed_ = true;
}

void ControlLoop::start(const Vec3& x_r) {
  x_.setZero();
  x_.segment<3>(0) = x_r;
  x_.segment<3>(15) = x_r;
  smoother_.set_state(x_);
  started_ = true;
}

Cycle ControlLoop::step(const Vec3& x_m, double ref_gain) {
  const Vec3 x_r = filter_step(filter_, cfg_.filter, x_m);
  const auto d = diff_.push(x_r);
  if (!started_) start(x_r);
  if (reseed_) {
    // Desired chain continues from the plant; snap is carried over.
    StateVec x = x_;
    x.segment<9>(0) = x_.segment<9>(15);
    x.segment<3>(9) = plant_jerk(x_, cfg_.smoother.k_ex);
    smoother_.set_state(x);
    x_ = x;
    reseed_ = false;
  }
  Cycle c = mode_ == Mode::kF ? step_f(d) : step_fsc(d, ref_gain);
  c.index = index_;
  c.t = static_cast<double>(index_) * cfg_.smoother.dt;
  c.mode = mode_;
  c.x_m = x_m;
  c.x_r = x_r;
  ++index_;
  return c;
}

Cycle ControlLoop::step_f(const std::array<Vec3, BackwardDifferentiator::kOrders>& d) {
  Cycle c;
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::Matrix<double, kDesiredDim, 1> chain;
  chain << d[0], d[1], d[2], d[3], d[4];
  TrayState& t = c.desired;
  t.x = d[0];
  t.v = d[1];
  t.a = d[2];
  t.j = d[3];
  t.s = d[4];
  try {
    const RotationVectorChain r = rotation_vector_chain(t.a, t.j, t.s);
    t.phi = AxisAngle::from_vector(r.phi);
    t.omega = r.phi_dot;
    t.omega_dot = r.phi_ddot;
    last_phi_ = t.phi;
  } catch (const NumericGuardError&) {
    t.phi = last_phi_;
    c.degraded = true;
  }
  try {
    c.omega_dot_max = angular_accel_bound(cfg_.offset, t.a);
    c.snap_bound = snap_bound(t.a, c.omega_dot_max);
  } catch (const NumericGuardError&) {
    c.degraded = true;
  }

  // Plant driven by the differentiated chain, held over the period.
  x_.head<kDesiredDim>() = chain;
  Eigen::Matrix<double, kPlantDim, 1> plant = x_.tail<kPlantDim>();
  plant = plant_a_ * plant + plant_b_ * chain;
  x_.tail<kPlantDim>() = cfg_.ideal_tracking ? chain.head<kPlantDim>() : plant;
  smoother_.set_state(x_);
  c.x_s = x_.segment<3>(15);
  c.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

Cycle ControlLoop::step_fsc(const std::array<Vec3, BackwardDifferentiator::kOrders>& d,
                            double ref_gain) {
  Cycle c;
  ReferenceState ref;
  ref.x = d[0];
  ref.v = ref_gain * d[1];
  ref.a = ref_gain * d[2];
  const Smoother::Step s = smoother_.step(ref);
  if (cfg_.ideal_tracking) {
    StateVec x = smoother_.state();
    x.tail<kPlantDim>() = x.head<kPlantDim>();
    smoother_.set_state(x);
  }
  x_ = smoother_.state();
  c.desired = s.desired;
  last_phi_ = s.desired.phi;
  c.x_s = x_.segment<3>(15);
  c.u = s.u;
  c.omega_dot_max = s.omega_dot_max;
  c.snap_bound = s.snap_bound;
  c.status = s.status;
  c.iterations = s.iterations;
  c.kkt_residual = s.kkt_residual;
  c.max_slack = s.max_slack;
  c.solve_ms = s.solve_ms;
  c.degraded = s.degraded;
  return c;
}

}  // namespace nptray
