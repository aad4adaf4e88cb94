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

#include "nptray/geom.hpp"

#include <cmath>

namespace nptray {
namespace {

// Below this angle the SO(3) coefficient functions switch to Taylor series.
constexpr double kSeriesAngle = 0.05;

// a(u) = (1 - cos t) / t^2 and b(u) = (t - sin t) / t^3 with u = t^2,
// together with their derivatives in u.
struct JacobianCoeffs {
  double a, b, da, db;
};

JacobianCoeffs jacobian_coeffs(double u) {
  JacobianCoeffs c{};
  if (u < kSeriesAngle * kSeriesAngle) {
    c.a = 1.0 / 2 - u / 24 + u * u / 720 - u * u * u / 40320;
    c.b = 1.0 / 6 - u / 120 + u * u / 5040 - u * u * u / 362880;
    c.da = -1.0 / 24 + 2 * u / 720 - 3 * u * u / 40320 + 4 * u * u * u / 3628800;
    c.db = -1.0 / 120 + 2 * u / 5040 - 3 * u * u / 362880 +
           4 * u * u * u / 39916800;
    return c;
  }
  const double t = std::sqrt(u);
  const double s = std::sin(t);
  const double co = std::cos(t);
  c.a = (1 - co) / u;
  c.b = (t - s) / (u * t);
  c.da = (t * s - 2 + 2 * co) / (2 * u * u);
  c.db = ((1 - co) * t - 3 * t + 3 * s) / (2 * u * u * t);
  return c;
}

}  // namespace

AxisAngle AxisAngle::from_vector(const Vec3& phi, double zero_threshold) {
  const double n = phi.norm();
  if (n <= zero_threshold || n == 0.0) return AxisAngle::identity();
  return AxisAngle{phi / n, n};
}

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0, -a.z(), a.y(),
       a.z(), 0, -a.x(),
       -a.y(), a.x(), 0;
  return s;
}

Rotation axis_angle_to_rotation(const AxisAngle& phi) {
  if (phi.angle == 0.0) return Rotation::Identity();
  return Eigen::AngleAxisd(phi.angle, phi.axis).toRotationMatrix();
}

AxisAngle rotation_to_axis_angle(const Rotation& r) {
  const Eigen::AngleAxisd aa(r);
  if (aa.angle() == 0.0) return AxisAngle::identity();
  return AxisAngle{aa.axis(), aa.angle()};
}

Rotation exp_so3(const Vec3& phi) {
  const double t = phi.norm();
  if (t < 1e-12) return Rotation::Identity() + skew(phi);
  return Eigen::AngleAxisd(t, phi / t).toRotationMatrix();
}

Vec3 log_so3(const Rotation& r) { return rotation_to_axis_angle(r).vector(); }

Mat3 so3_left_jacobian(const Vec3& phi) {
  const JacobianCoeffs c = jacobian_coeffs(phi.squaredNorm());
  const Mat3 s = skew(phi);
  return Mat3::Identity() + c.a * s + c.b * s * s;
}

Mat3 so3_left_jacobian_dot(const Vec3& phi, const Vec3& phi_dot) {
  const JacobianCoeffs c = jacobian_coeffs(phi.squaredNorm());
  const double u_dot = 2.0 * phi.dot(phi_dot);
  const Mat3 s = skew(phi);
  const Mat3 s_dot = skew(phi_dot);
  return c.da * u_dot * s + c.a * s_dot + c.db * u_dot * s * s +
         c.b * (s_dot * s + s * s_dot);
}

AngularRates rotation_vector_rates(const Vec3& phi, const Vec3& phi_dot,
                                   const Vec3& phi_ddot) {
  const Mat3 jl = so3_left_jacobian(phi);
  AngularRates r;
  r.omega = jl * phi_dot;
  r.omega_dot = jl * phi_ddot + so3_left_jacobian_dot(phi, phi_dot) * phi_dot;
  return r;
}

}  // namespace nptray
