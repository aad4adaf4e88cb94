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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nptray/geom.hpp"
#include "nptray/orientation.hpp"
#include "nptray/vobject.hpp"

namespace nptray {

// Rigid-attachment ground truth. Every object rides on the tray without
// slipping; the tray pose is the commanded one. Nothing here is truncated.

/// World-frame tray motion at one sample, about the rotation centre.
struct TrayKinematics {
  Vec3 accel = Vec3::Zero();  ///< rotation-centre acceleration
  Rotation rotation = Rotation::Identity();
  Vec3 omega = Vec3::Zero();      ///< true angular velocity, world
  Vec3 omega_dot = Vec3::Zero();  ///< true angular acceleration, world
};

/// Converts a desired TrayState (rotation-vector derivatives) to rigid-body
/// angular rates through the SO(3) left Jacobian.
TrayKinematics tray_kinematics(const TrayState& tray);

/// Tray-frame offset from the rotation centre to an object's CoM. The
/// centre is the CoM of a reference object of height `reference_height`
/// standing at the tray centre.
Vec3 com_offset(const ObjectSpec& obj, double reference_height);

/// World CoM acceleration a + w' x P + w x (w x P) with P = R p_body.
Vec3 object_kinematics(const TrayKinematics& tray, const Vec3& p_body);

struct ContactWrench {
  Vec3 force = Vec3::Zero();   ///< on the object, tray frame
  Vec3 torque = Vec3::Zero();  ///< about the CoM, body frame
};

/// F = R' M (a - g);  T = I w'_b + w_b x I w_b with body-frame rates.
ContactWrench contact_wrench(const Vec3& accel, const TrayKinematics& tray,
                             const Vec3& inertia_diag, double mass,
                             const Vec3& g = kGravity);

/// Zero-moment point on the contact plane z = -h/2 below the CoM. Empty
/// when the normal force is not positive.
std::optional<Vec3> zmp(const ContactWrench& w, double height);

/// S and B are evaluated even without contact, as a rigidly attached
/// object would see them; `contact` records whether F_z > 0.
struct ObjectMetrics {
  double s = 0.0;   ///< contact-force angle over friction angle
  double b = 0.0;   ///< ZMP distance over half base side
  bool contact = true;
};

ObjectMetrics object_metrics(const ObjectSpec& obj, const TrayKinematics& tray,
                             double reference_height, const Vec3& g = kGravity);

/// As object_metrics, with an explicit tray-frame CoM offset.
ObjectMetrics object_metrics_at(const ObjectSpec& obj, const Vec3& p_body,
                                const TrayKinematics& tray, const Vec3& g = kGravity);

/// Per-object traces. `s_max`/`b_max` stop at the first contact loss; the
/// rigid maxima cover every sample.
struct ObjectTrace {
  std::string id;
  std::vector<double> s, b;
  std::vector<std::uint8_t> contact;
  double s_max = 0.0;
  double b_max = 0.0;
  double s_max_rigid = 0.0;
  double b_max_rigid = 0.0;
  long first_loss = -1;  ///< sample index, -1 if contact held throughout
};

struct StabilityReport {
  double dt = 0.0;
  std::vector<ObjectTrace> objects;
  std::vector<double> e;   ///< |x_s - clean input| per sample
  double e_bar = 0.0;      ///< trapezoidal time average of e
  double e_bar_aligned = 0.0;
  int aligned_lag = 0;     ///< samples
};

struct RunTrace {
  double dt = 0.0;
  std::vector<TrayState> tray;  ///< desired tray pose chain
  std::vector<Vec3> plant;      ///< x_s
  std::vector<Vec3> clean;      ///< noise-free operator input
};

struct OracleOptions {
  double reference_height = 0.25;
  Vec3 g = kGravity;
  double max_lag_seconds = 1.0;
};

/// Worst S and B of the offset object itself over a run. Its CoM sits at
/// |P_A| from the rotation centre, h/2 above or below the centre plane, on
/// `azimuths` evenly spaced directions. Contact loss is ignored.
struct OffsetMaxima {
  double s_max = 0.0;
  double b_max = 0.0;
};

OffsetMaxima offset_object_maxima(const RunTrace& run, const OffsetObject& offset,
                                  int azimuths = 12, const Vec3& g = kGravity);

/// Parallel over objects and samples.
StabilityReport evaluate_run(const RunTrace& run, std::span<const ObjectSpec> manifest,
                             const OracleOptions& opt = {});

/// Single-threaded reference; bitwise identical to evaluate_run.
StabilityReport evaluate_run_serial(const RunTrace& run, std::span<const ObjectSpec> manifest,
                                    const OracleOptions& opt = {});

/// Trapezoidal time average of a uniformly sampled signal.
double trapezoid_mean(std::span<const double> y, double dt);

/// Tracking error with the plant shifted back by `lag` samples.
double lagged_error_mean(std::span<const Vec3> plant, std::span<const Vec3> clean, int lag,
                         double dt);

/// Sizes of the terms the offset-object bound drops, at one sample. The
/// literal ratios follow the neglected-over-total form; the budget ratios
/// divide the neglected term by the margin it would eat.
struct EnvelopeSample {
  double centripetal_literal = 0.0;   ///< |w x (w x P)| / |w' x P + w x (w x P)|
  double centripetal_budget = 0.0;    ///< |w|^2 |P_A| / (|a-g| sin atan mu)
  double gyroscopic_literal = 0.0;    ///< |w x I w| / |T|
  double gyroscopic_budget = 0.0;     ///< |w x I w| / (J_max w'_max)
  double omega_dot_literal = 0.0;     ///< |phi'' - approx| / |phi''|
  double omega_dot_budget = 0.0;      ///< |phi'' - approx| / w'_max
};

EnvelopeSample approximation_envelope(const TrayState& tray, const OffsetObject& offset,
                                      const Vec3& g = kGravity);

}  // namespace nptray
