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

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nptray {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Orthonormal 3x3 matrix mapping body-frame vectors to the world frame.
using Rotation = Eigen::Matrix3d;

/// Rotation of `angle` radians about the unit vector `axis`.
///
/// The zero rotation is always stored as angle 0 about the canonical
/// axis (0, 0, 1); `angle` stays in [0, pi].
struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;

  static AxisAngle identity() { return {}; }

  /// Rotation vector angle * axis.
  Vec3 vector() const { return angle * axis; }

  /// Builds an AxisAngle from a rotation vector; vectors shorter than
  /// `zero_threshold` collapse to the canonical zero rotation.
  static AxisAngle from_vector(const Vec3& phi, double zero_threshold = 0.0);
};

inline Vec3 cross(const Vec3& a, const Vec3& b) { return a.cross(b); }

/// Skew-symmetric matrix with skew(a) * b == a x b.
Mat3 skew(const Vec3& a);

/// Rodrigues map.
Rotation axis_angle_to_rotation(const AxisAngle& phi);

/// Inverse of axis_angle_to_rotation; returns angle in [0, pi].
AxisAngle rotation_to_axis_angle(const Rotation& r);

/// exp of a rotation vector.
Rotation exp_so3(const Vec3& phi);

/// log of a rotation matrix as a rotation vector.
Vec3 log_so3(const Rotation& r);

// R(t) = exp(phi(t)) has world-frame angular velocity
//   omega = J_l(phi) * phi_dot
// and angular acceleration
//   omega_dot = J_l(phi) * phi_ddot + dJ_l/dt * phi_dot.

/// Left Jacobian of SO(3).
Mat3 so3_left_jacobian(const Vec3& phi);

/// Time derivative of so3_left_jacobian(phi(t)) given phi_dot.
Mat3 so3_left_jacobian_dot(const Vec3& phi, const Vec3& phi_dot);

/// World-frame angular velocity and acceleration of exp(phi(t)).
struct AngularRates {
  Vec3 omega = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
};

AngularRates rotation_vector_rates(const Vec3& phi, const Vec3& phi_dot,
                                   const Vec3& phi_ddot);

}  // namespace nptray
