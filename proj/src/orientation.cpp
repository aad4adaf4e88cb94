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

#include "nptray/orientation.hpp"

#include <cmath>

#include "nptray/error.hpp"

namespace nptray {
namespace {

constexpr double kFreeFallFloor = 1e-6;

// Closed forms of the scale derivatives cancel badly for small u = w/q^2.
constexpr double kSeriesRatio = 0.05;
constexpr int kSeriesTerms = 24;

void guard_free_fall(const Vec3& accel, const Vec3& g) {
  if (!((g - accel).norm() >= kFreeFallFloor)) {
    throw NumericGuardError("|a - g| below free-fall floor");
  }
}

// phi = kappa(w, q) c with c = a x g, w = |c|^2, q = g.(g - a) and
// kappa = atan(sqrt(w)/q)/sqrt(w). Partial derivatives of kappa.
struct Scale {
  double k, kw, kq, kww, kwq, kqq;
};

Scale scale(double w, double q) {
  Scale s{};
  const double r = q * q + w;
  s.kq = -1.0 / r;
  s.kqq = 2.0 * q / (r * r);
  s.kwq = 1.0 / (r * r);
  const double u = w / (q * q);
  if (u < kSeriesRatio) {
    // atan(x)/x = sum (-1)^n u^n / (2n+1), u = x^2.
    double f = 0, f1 = 0, f2 = 0;
    double un = 1.0;
    for (int n = 0; n < kSeriesTerms; ++n) {
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      const double c = sign / (2.0 * n + 1.0);
      f += c * un;
      if (n + 1 < kSeriesTerms) {
        const double c1 = -sign / (2.0 * n + 3.0) * (n + 1);
        f1 += c1 * un;
      }
      if (n + 2 < kSeriesTerms) {
        const double c2 = sign / (2.0 * n + 5.0) * (n + 2) * (n + 1);
        f2 += c2 * un;
      }
      un *= u;
    }
    const double q2 = q * q;
    s.k = f / q;
    s.kw = f1 / (q2 * q);
    s.kww = f2 / (q2 * q2 * q);
    return s;
  }
  const double sw = std::sqrt(w);
  const double at = std::atan2(sw, q);
  s.k = at / sw;
  s.kw = (q * sw / r - at) / (2.0 * w * sw);
  s.kww = -q / (2.0 * w * r * r) - 1.5 * s.kw / w;
  return s;
}

}  // namespace

double tilt_angle(const Vec3& accel, const Vec3& g) {
  guard_free_fall(accel, g);
  return std::atan2(accel.cross(g).norm(), g.dot(g - accel));
}

AxisAngle friction_free_orientation(const Vec3& accel, const Vec3& g) {
  const double alpha = tilt_angle(accel, g);
  if (alpha < kAlphaEpsilon) return AxisAngle::identity();
  const Vec3 c = accel.cross(g);
  return AxisAngle{c / c.norm(), alpha};
}

RotationVectorChain rotation_vector_chain(const Vec3& accel, const Vec3& jerk,
                                          const Vec3& snap, const Vec3& g) {
  guard_free_fall(accel, g);
  const Vec3 c = accel.cross(g);
  const Vec3 c1 = jerk.cross(g);
  const Vec3 c2 = snap.cross(g);
  const double w = c.squaredNorm();
  const double q = g.dot(g - accel);
  if (!(q > 0)) throw NumericGuardError("support force inverted");

  const double w1 = 2.0 * c.dot(c1);
  const double w2 = 2.0 * (c1.squaredNorm() + c.dot(c2));
  const double q1 = -g.dot(jerk);
  const double q2 = -g.dot(snap);

  const Scale s = scale(w, q);
  const double k1 = s.kw * w1 + s.kq * q1;
  const double k2 = s.kww * w1 * w1 + 2.0 * s.kwq * w1 * q1 +
                    s.kqq * q1 * q1 + s.kw * w2 + s.kq * q2;

  RotationVectorChain r;
  r.phi = s.k * c;
  r.phi_dot = k1 * c + s.k * c1;
  r.phi_ddot = k2 * c + 2.0 * k1 * c1 + s.k * c2;
  r.alpha = s.k * std::sqrt(w);
  return r;
}

AngularRates exact_orientation_derivatives(const Vec3& accel, const Vec3& jerk,
                                           const Vec3& snap, const Vec3& g) {
  const RotationVectorChain r = rotation_vector_chain(accel, jerk, snap, g);
  return AngularRates{r.phi_dot, r.phi_ddot};
}

Vec3 approx_omega_dot(const Vec3& accel, const Vec3& snap, const Vec3& g) {
  const double alpha = tilt_angle(accel, g);
  const Vec3 c2 = snap.cross(g);
  if (alpha >= kAlphaEpsilon) {
    return c2 * (alpha / accel.cross(g).norm());
  }
  return c2 / (g.norm() * (accel - g).norm());
}

double snap_bound(const Vec3& accel, double omega_dot_max, const Vec3& g) {
  if (!(omega_dot_max > 0)) {
    throw ValidationError("snap_bound: omega_dot_max must be positive");
  }
  const double alpha = tilt_angle(accel, g);
  const double gn = g.norm();
  if (alpha >= kAlphaEpsilon) {
    const double a_h = accel.cross(g).norm() / gn;
    return omega_dot_max * a_h / alpha;
  }
  return omega_dot_max * std::abs(g.dot(g - accel)) / gn;
}

}  // namespace nptray
