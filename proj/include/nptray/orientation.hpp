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

#include "nptray/geom.hpp"
#include "nptray/vobject.hpp"

namespace nptray {

/// Tilt below which the tray counts as level and the axis is undefined.
inline constexpr double kAlphaEpsilon = 1e-6;

/// Desired tray pose chain. `omega` and `omega_dot` are the first and second
/// time derivatives of the rotation vector phi.
struct TrayState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 j = Vec3::Zero();
  Vec3 s = Vec3::Zero();
  AxisAngle phi;
  Vec3 omega = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
};

/// Tilt that aligns the tray normal with a - g, so the support force has no
/// tangential part. Axis (a x g)/|a x g|; canonical zero rotation when the
/// tilt is below kAlphaEpsilon. Throws NumericGuardError near free fall.
AxisAngle friction_free_orientation(const Vec3& accel, const Vec3& g = kGravity);

/// Tilt angle alone, in [0, pi/2) for any non-inverted support.
double tilt_angle(const Vec3& accel, const Vec3& g = kGravity);

/// Rotation vector of friction_free_orientation and its first two time
/// derivatives along a C4 position chain. Smooth through the level pose.
struct RotationVectorChain {
  Vec3 phi = Vec3::Zero();
  Vec3 phi_dot = Vec3::Zero();
  Vec3 phi_ddot = Vec3::Zero();
  double alpha = 0.0;
};

RotationVectorChain rotation_vector_chain(const Vec3& accel, const Vec3& jerk,
                                          const Vec3& snap,
                                          const Vec3& g = kGravity);

/// (d phi/dt, d^2 phi/dt^2), the tray's angular velocity and acceleration
/// in the rotation-vector sense, with every axis-change term kept.
AngularRates exact_orientation_derivatives(const Vec3& accel, const Vec3& jerk,
                                           const Vec3& snap,
                                           const Vec3& g = kGravity);

/// Angular acceleration with the axis-change terms dropped:
/// (snap x g) alpha / |a x g|, or (snap x g) / (|g| |a - g|) when level.
Vec3 approx_omega_dot(const Vec3& accel, const Vec3& snap,
                      const Vec3& g = kGravity);

/// Largest |snap| whose approximate angular acceleration stays within
/// omega_dot_max: omega_dot_max a_h / alpha, or omega_dot_max |g3 - a3| when
/// level. a_h is the horizontal acceleration magnitude.
double snap_bound(const Vec3& accel, double omega_dot_max,
                  const Vec3& g = kGravity);

}  // namespace nptray
