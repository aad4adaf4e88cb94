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

#include "nptray/vobject.hpp"

#include <algorithm>
#include <cmath>

#include "nptray/error.hpp"

namespace nptray {
namespace {

constexpr double kFreeFallFloor = 1e-6;

}  // namespace

Vec3 vertex_cuboid_inertia(double d, double h, double mass) {
  const double lateral = 0.25 * mass * (d * d + h * h);
  return {lateral, lateral, 0.5 * mass * d * d};
}

OffsetObject OffsetObject::explicit_values(double d, double h, double mu,
                                           double p_a_norm) {
  if (!(d > 0) || !(h > 0) || !(mu > 0) || !(p_a_norm > 0)) {
    throw ValidationError("offset object: d, h, mu and |P_A| must be positive");
  }
  OffsetObject o;
  o.d = d;
  o.h = h;
  o.mu = mu;
  o.p_a_norm = p_a_norm;
  o.mass = 1.0;
  o.inertia_max = vertex_cuboid_inertia(d, h, o.mass);
  o.j_max = o.inertia_max.maxCoeff();
  return o;
}

void validate_object(const ObjectSpec& obj) {
  const auto fail = [&](const char* what) {
    throw ValidationError("object '" + obj.id + "': " + what);
  };
  if (!(obj.base_side > 0)) fail("base side must be positive");
  if (!(obj.height > 0)) fail("height must be positive");
  if (!(obj.mu > 0)) fail("friction coefficient must be positive");
  if (!(obj.mass > 0)) fail("mass must be positive");
  if (!obj.placement.allFinite()) fail("placement must be finite");
}

OffsetObject build_offset_object(std::span<const ObjectSpec> manifest,
                                 const TrayGeometry& tray) {
  if (manifest.empty()) throw ConfigError("manifest", "manifest is empty");
  if (!(tray.radius > 0)) throw ValidationError("tray radius must be positive");

  double d = manifest.front().base_side;
  double h = manifest.front().height;
  double mu = manifest.front().mu;
  for (const ObjectSpec& obj : manifest) {
    validate_object(obj);
    if (obj.placement.head<2>().norm() > tray.radius + 1e-12) {
      throw ValidationError("object '" + obj.id + "': placement outside tray");
    }
    d = std::min(d, obj.base_side);
    h = std::max(h, obj.height);
    mu = std::min(mu, obj.mu);
  }
  const double p_a = std::hypot(tray.radius, 0.5 * h);
  return OffsetObject::explicit_values(d, h, mu, p_a);
}

AngularAccelBranches angular_accel_branches(const OffsetObject& obj,
                                            const Vec3& accel_desired,
                                            const Vec3& g) {
  const double support = (accel_desired - g).norm();
  if (!(support >= kFreeFallFloor)) {
    throw NumericGuardError("|a - g| below free-fall floor");
  }
  AngularAccelBranches b;
  b.friction_cone = support * std::sin(std::atan(obj.mu)) / obj.p_a_norm;
  b.zmp = support * obj.d /
          (2.0 * obj.j_max / obj.mass +
           obj.p_a_norm * std::hypot(obj.d, obj.h));
  return b;
}

double angular_accel_bound(const OffsetObject& obj, const Vec3& accel_desired,
                           const Vec3& g) {
  const AngularAccelBranches b = angular_accel_branches(obj, accel_desired, g);
  return std::min(b.friction_cone, b.zmp);
}

}  // namespace nptray
