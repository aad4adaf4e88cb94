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


#include "nptray/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nptray {
namespace {

// Shared by the parallel and serial paths so both evaluate identical
// arithmetic per element.
std::vector<TrayKinematics> all_kinematics(const RunTrace& run, bool parallel) {
  const long n = static_cast<long>(run.tray.size());
  std::vector<TrayKinematics> out(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (long k = 0; k < n; ++k) out[k] = tray_kinematics(run.tray[k]);
  return out;
}

void finish_trace(ObjectTrace& t) {
  t.s_max = t.b_max = t.s_max_rigid = t.b_max_rigid = 0.0;
  t.first_loss = -1;
  for (size_t k = 0; k < t.s.size(); ++k) {
    if (!t.contact[k] && t.first_loss < 0) t.first_loss = static_cast<long>(k);
    if (t.first_loss < 0) {
      t.s_max = std::max(t.s_max, t.s[k]);
      t.b_max = std::max(t.b_max, t.b[k]);
    }
    t.s_max_rigid = std::max(t.s_max_rigid, t.s[k]);
    t.b_max_rigid = std::max(t.b_max_rigid, t.b[k]);
  }
}

void tracking_error(const RunTrace& run, const OracleOptions& opt, StabilityReport& r) {
  const size_t n = std::min(run.plant.size(), run.clean.size());
  r.e.resize(n);
  for (size_t k = 0; k < n; ++k) r.e[k] = (run.plant[k] - run.clean[k]).norm();
  r.e_bar = trapezoid_mean(r.e, run.dt);
  const int max_lag =
      std::min<int>(static_cast<int>(std::lround(opt.max_lag_seconds / run.dt)),
                    static_cast<int>(n) / 2);
  r.aligned_lag = 0;
  r.e_bar_aligned = r.e_bar;
  for (int lag = 1; lag <= max_lag; ++lag) {
    const double e = lagged_error_mean(run.plant, run.clean, lag, run.dt);
    if (e < r.e_bar_aligned) {
      r.e_bar_aligned = e;
      r.aligned_lag = lag;
    }
  }
}

StabilityReport evaluate(const RunTrace& run, std::span<const ObjectSpec> manifest,
                         const OracleOptions& opt, bool parallel) {
  StabilityReport r;
  r.dt = run.dt;
  const long n = static_cast<long>(run.tray.size());
  const long m = static_cast<long>(manifest.size());
  const std::vector<TrayKinematics> kin = all_kinematics(run, parallel);

  r.objects.resize(m);
  for (long i = 0; i < m; ++i) {
    r.objects[i].id = manifest[i].id;
    r.objects[i].s.resize(n);
    r.objects[i].b.resize(n);
    r.objects[i].contact.resize(n);
  }
#pragma omp parallel for collapse(2) schedule(static) if (parallel)
  for (long i = 0; i < m; ++i) {
    for (long k = 0; k < n; ++k) {
      const ObjectMetrics om = object_metrics(manifest[i], kin[k], opt.reference_height, opt.g);
      r.objects[i].s[k] = om.s;
      r.objects[i].b[k] = om.b;
      r.objects[i].contact[k] = om.contact ? 1 : 0;
    }
  }
  for (auto& t : r.objects) finish_trace(t);
  tracking_error(run, opt, r);
  return r;
}

}  // namespace

TrayKinematics tray_kinematics(const TrayState& tray) {
  TrayKinematics k;
  const Vec3 phi = tray.phi.vector();
  k.accel = tray.a;
  k.rotation = exp_so3(phi);
  const AngularRates w = rotation_vector_rates(phi, tray.omega, tray.omega_dot);
  k.omega = w.omega;
  k.omega_dot = w.omega_dot;
  return k;
}

Vec3 com_offset(const ObjectSpec& obj, double reference_height) {
  return {obj.placement.x(), obj.placement.y(), 0.5 * (obj.height - reference_height)};
}

Vec3 object_kinematics(const TrayKinematics& tray, const Vec3& p_body) {
  const Vec3 p = tray.rotation * p_body;
  return tray.accel + tray.omega_dot.cross(p) + tray.omega.cross(tray.omega.cross(p));
}

ContactWrench contact_wrench(const Vec3& accel, const TrayKinematics& tray,
                             const Vec3& inertia_diag, double mass, const Vec3& g) {
  ContactWrench w;
  const Mat3 rt = tray.rotation.transpose();
  w.force = rt * (mass * (accel - g));
  const Vec3 wb = rt * tray.omega;
  const Vec3 wdb = rt * tray.omega_dot;
  const Vec3 iw = inertia_diag.cwiseProduct(wb);
  w.torque = inertia_diag.cwiseProduct(wdb) + wb.cross(iw);
  return w;
}

std::optional<Vec3> zmp(const ContactWrench& w, double height) {
  const Vec3& f = w.force;
  const Vec3& t = w.torque;
  if (!(f.z() > 0)) return std::nullopt;
  const double hz = 0.5 * height;
  return Vec3((-hz * f.x() - t.y()) / f.z(), (t.x() - hz * f.y()) / f.z(), -hz);
}

ObjectMetrics object_metrics(const ObjectSpec& obj, const TrayKinematics& tray,
                             double reference_height, const Vec3& g) {
  return object_metrics_at(obj, com_offset(obj, reference_height), tray, g);
}

OffsetMaxima offset_object_maxima(const RunTrace& run, const OffsetObject& offset, int azimuths,
                                  const Vec3& g) {
  const double hz = 0.5 * offset.h;
  const double radial = offset.p_a_norm > hz ? std::sqrt(offset.p_a_norm * offset.p_a_norm - hz * hz)
                                             : offset.p_a_norm;
  const ObjectSpec probe{"A", offset.d, offset.h, offset.mu, Vec3::Zero(), offset.mass};
  std::vector<Vec3> points;
  for (int a = 0; a < azimuths; ++a) {
    const double ang = 2.0 * M_PI * a / azimuths;
    for (double z : {-hz, hz}) points.emplace_back(radial * std::cos(ang), radial * std::sin(ang), z);
  }
  OffsetMaxima out;
  for (const TrayState& t : run.tray) {
    const TrayKinematics k = tray_kinematics(t);
    for (const Vec3& p : points) {
      const ObjectMetrics m = object_metrics_at(probe, p, k, g);
      out.s_max = std::max(out.s_max, m.s);
      out.b_max = std::max(out.b_max, m.b);
    }
  }
  return out;
}

ObjectMetrics object_metrics_at(const ObjectSpec& obj, const Vec3& p_body,
                                const TrayKinematics& tray, const Vec3& g) {
  ObjectMetrics m;
  const Vec3 accel = object_kinematics(tray, p_body);
  const Vec3 inertia = vertex_cuboid_inertia(obj.base_side, obj.height, obj.mass);
  const ContactWrench w = contact_wrench(accel, tray, inertia, obj.mass, g);
  const Vec3& f = w.force;
  m.contact = f.z() > 0;
  const double fn = f.norm();
  const double cos_angle = fn > 0 ? std::min(1.0, std::abs(f.z()) / fn) : 1.0;
  m.s = std::acos(cos_angle) / std::atan(obj.mu);
  if (f.z() == 0.0) {
    m.b = std::numeric_limits<double>::infinity();
  } else {
    // Same moment balance as zmp(), without the sign requirement.
    const double hz = 0.5 * obj.height;
    const double px = (-hz * f.x() - w.torque.y()) / f.z();
    const double py = (w.torque.x() - hz * f.y()) / f.z();
    m.b = (2.0 / obj.base_side) * std::hypot(px, py);
  }
  return m;
}

StabilityReport evaluate_run(const RunTrace& run, std::span<const ObjectSpec> manifest,
                             const OracleOptions& opt) {
  return evaluate(run, manifest, opt, true);
}

StabilityReport evaluate_run_serial(const RunTrace& run, std::span<const ObjectSpec> manifest,
                                    const OracleOptions& opt) {
  return evaluate(run, manifest, opt, false);
}

double trapezoid_mean(std::span<const double> y, double dt) {
  if (y.size() < 2) return y.empty() ? 0.0 : y.front();
  double acc = 0.0;
  for (size_t k = 1; k < y.size(); ++k) acc += 0.5 * (y[k] + y[k - 1]) * dt;
  return acc / (dt * static_cast<double>(y.size() - 1));
}

double lagged_error_mean(std::span<const Vec3> plant, std::span<const Vec3> clean, int lag,
                         double dt) {
  const size_t n = std::min(plant.size(), clean.size());
  if (lag < 0 || static_cast<size_t>(lag) >= n) return std::numeric_limits<double>::infinity();
  std::vector<double> e(n - lag);
  for (size_t k = lag; k < n; ++k) e[k - lag] = (plant[k] - clean[k - lag]).norm();
  return trapezoid_mean(e, dt);
}

EnvelopeSample approximation_envelope(const TrayState& tray, const OffsetObject& offset,
                                      const Vec3& g) {
  EnvelopeSample e;
  const TrayKinematics k = tray_kinematics(tray);
  const double support = (tray.a - g).norm();
  const double w_max = angular_accel_bound(offset, tray.a, g);

  // Offset object at the far rim, on the side that maximizes w' x P.
  Vec3 dir = k.omega_dot.norm() > 0 ? k.omega_dot.unitOrthogonal() : Vec3::UnitX();
  const Vec3 p = offset.p_a_norm * dir;
  const Vec3 tang = k.omega_dot.cross(p);
  const Vec3 cent = k.omega.cross(k.omega.cross(p));
  const double total = (tang + cent).norm();
  e.centripetal_literal = total > 0 ? cent.norm() / total : 0.0;
  e.centripetal_budget =
      k.omega.squaredNorm() * offset.p_a_norm / (support * std::sin(std::atan(offset.mu)));

  const Mat3 rt = k.rotation.transpose();
  const Vec3 wb = rt * k.omega;
  const Vec3 wdb = rt * k.omega_dot;
  const Vec3 gyro = wb.cross(offset.inertia_max.cwiseProduct(wb));
  const double torque = (offset.inertia_max.cwiseProduct(wdb) + gyro).norm();
  e.gyroscopic_literal = torque > 0 ? gyro.norm() / torque : 0.0;
  e.gyroscopic_budget = gyro.norm() / (offset.j_max * w_max);

  const Vec3 approx = approx_omega_dot(tray.a, tray.s, g);
  const double diff = (tray.omega_dot - approx).norm();
  const double exact = tray.omega_dot.norm();
  e.omega_dot_literal = exact > 0 ? diff / exact : 0.0;
  e.omega_dot_budget = diff / w_max;
  return e;
}

}  // namespace nptray
