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

#include <span>
#include <string>
#include <vector>

#include "nptray/geom.hpp"

namespace nptray {

/// Standard gravity, world frame, z up.
inline const Vec3 kGravity{0.0, 0.0, -9.81};

/// One transported object, approximated by a square-based cuboid with its
/// mass lumped at the eight vertices.
struct ObjectSpec {
  std::string id;
  double base_side = 0.0;  ///< d_i [m], largest inscribed square of footprint
  double height = 0.0;     ///< h_i [m], may be inflated by the caller
  double mu = 0.0;         ///< friction coefficient
  Vec3 placement = Vec3::Zero();  ///< contact-centre offset on the tray [m]
  double mass = 1.0;              ///< [kg]; only the oracle uses it
};

struct TrayGeometry {
  double radius = 0.0;  ///< [m]
};

/// Worst-case virtual object whose constraints dominate every manifest
/// object: smallest footprint, tallest, lowest friction, farthest away.
struct OffsetObject {
  double d = 0.0;
  double h = 0.0;
  double mu = 0.0;
  double p_a_norm = 0.0;          ///< |P_A| [m]
  Vec3 inertia_max = Vec3::Zero();  ///< diagonal of I_max [kg m^2]
  double j_max = 0.0;             ///< largest principal inertia [kg m^2]
  double mass = 1.0;

  /// Builds the object directly from (d, h, mu, |P_A|), bypassing the
  /// manifest reduction. Inertia follows the vertex-mass cuboid.
  static OffsetObject explicit_values(double d, double h, double mu,
                                      double p_a_norm);
};

/// Vertex-mass cuboid inertia diag(M(d^2+h^2)/4, M(d^2+h^2)/4, M d^2/2).
Vec3 vertex_cuboid_inertia(double d, double h, double mass = 1.0);

/// Reduces a manifest to its offset object. Throws ConfigError for an empty
/// manifest and ValidationError naming the first invalid object.
OffsetObject build_offset_object(std::span<const ObjectSpec> manifest,
                                 const TrayGeometry& tray);

void validate_object(const ObjectSpec& obj);

/// Angular-acceleration magnitude that keeps the offset object inside both
/// its friction cone and its ZMP support [rad/s^2]:
///
///   min( |a-g| sin(atan mu) / |P_A| ,
///        |a-g| d / (2 J_max / M + |P_A| sqrt(d^2 + h^2)) )
///
/// Throws NumericGuardError when |a-g| < 1e-6 (free fall).
double angular_accel_bound(const OffsetObject& obj, const Vec3& accel_desired,
                           const Vec3& g = kGravity);

/// The two branches of angular_accel_bound, exposed for diagnostics.
struct AngularAccelBranches {
  double friction_cone = 0.0;
  double zmp = 0.0;
};

AngularAccelBranches angular_accel_branches(const OffsetObject& obj,
                                            const Vec3& accel_desired,
                                            const Vec3& g = kGravity);

}  // namespace nptray
