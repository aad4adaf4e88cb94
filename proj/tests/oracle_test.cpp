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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace nptray {
namespace {

const Vec3 g = kGravity;

// Smooth analytic trajectory: position, rotation vector and both of their
// derivatives in closed form.
struct Analytic {
  static Vec3 x(double t) { return {std::sin(t), 0.3 * t * t, std::cos(2 * t)}; }
  static Vec3 a(double t) { return {-std::sin(t), 0.6, -4 * std::cos(2 * t)}; }
  static Vec3 phi(double t) { return {0.3 * std::sin(t), 0.2 * std::cos(2 * t), 0.1 * t}; }
  static Vec3 phi_dot(double t) { return {0.3 * std::cos(t), -0.4 * std::sin(2 * t), 0.1}; }
  static Vec3 phi_ddot(double t) { return {-0.3 * std::sin(t), -0.8 * std::cos(2 * t), 0.0}; }

  static TrayState state(double t) {
    TrayState s;
    s.x = x(t);
    s.a = a(t);
    s.phi = AxisAngle::from_vector(phi(t));
    s.omega = phi_dot(t);
    s.omega_dot = phi_ddot(t);
    return s;
  }
};

TEST(OracleKinematics, MatchesSecondDifferenceOfWorldPosition) {
  const Vec3 p(0.2, -0.1, 0.05);
  const double h = 1e-4;
  for (double t : {0.3, 1.1, 2.7}) {
    const auto pos = [&](double s) { return Vec3(Analytic::x(s) + exp_so3(Analytic::phi(s)) * p); };
    const Vec3 fd = (pos(t + h) - 2 * pos(t) + pos(t - h)) / (h * h);
    const Vec3 got = object_kinematics(tray_kinematics(Analytic::state(t)), p);
    EXPECT_LT((got - fd).norm(), 1e-5) << "t=" << t;
  }
}

TEST(OracleKinematics, AngularRatesMatchRotationDifferences) {
  const double h = 1e-5;
  const double t = 0.9;
  const auto r = [](double s) { return exp_so3(Analytic::phi(s)); };
  // [w]x = R' R^T in the world frame.
  const Mat3 rdot = (r(t + h) - r(t - h)) / (2 * h);
  const Mat3 w = rdot * r(t).transpose();
  const TrayKinematics k = tray_kinematics(Analytic::state(t));
  EXPECT_LT((k.omega - Vec3(w(2, 1), w(0, 2), w(1, 0))).norm(), 1e-8);

  const auto omega = [](double s) { return tray_kinematics(Analytic::state(s)).omega; };
  EXPECT_LT((k.omega_dot - (omega(t + h) - omega(t - h)) / (2 * h)).norm(), 1e-8);
}

TEST(OracleWrench, TorqueIsRateOfAngularMomentum) {
  const Vec3 inertia = vertex_cuboid_inertia(0.05, 0.15, 0.7);
  const double t = 1.7;
  const double h = 1e-5;
  const auto momentum = [&](double s) {
    const TrayKinematics k = tray_kinematics(Analytic::state(s));
    return Vec3(k.rotation * inertia.asDiagonal() * k.rotation.transpose() * k.omega);
  };
  const Vec3 dl = (momentum(t + h) - momentum(t - h)) / (2 * h);
  const TrayKinematics k = tray_kinematics(Analytic::state(t));
  const ContactWrench w = contact_wrench(Vec3::Zero(), k, inertia, 0.7);
  EXPECT_LT((w.torque - k.rotation.transpose() * dl).norm(), 1e-8);
}

TEST(OracleWrench, StaticObjectCarriesItsWeight) {
  const TrayKinematics k;
  const ContactWrench w = contact_wrench(Vec3::Zero(), k, Vec3::Ones(), 2.0);
  EXPECT_NEAR(w.force.z(), 2.0 * 9.81, 1e-12);
  EXPECT_EQ(w.force.head<2>().norm(), 0.0);
  EXPECT_EQ(w.torque.norm(), 0.0);
  const auto p = zmp(w, 0.1);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->head<2>().norm(), 0.0);
  EXPECT_DOUBLE_EQ(p->z(), -0.05);
}

TEST(OracleZmp, ContactForceAtZmpReproducesTiltingMoment) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ContactWrench w;
    w.force = Vec3(u(rng), u(rng), 5.0 + u(rng));
    w.torque = Vec3(u(rng), u(rng), u(rng)) * 0.1;
    const double h = 0.2;
    const Vec3 p = *zmp(w, h);
    EXPECT_DOUBLE_EQ(p.z(), -0.1);
    const Vec3 m = p.cross(w.force);
    EXPECT_NEAR(m.x(), w.torque.x(), 1e-12);
    EXPECT_NEAR(m.y(), w.torque.y(), 1e-12);
  }
}

TEST(OracleZmp, NoZmpWithoutPositiveNormalForce) {
  ContactWrench w;
  w.force = Vec3(1, 0, 0);
  EXPECT_FALSE(zmp(w, 0.1).has_value());
  w.force.z() = -1;
  EXPECT_FALSE(zmp(w, 0.1).has_value());
}

ObjectSpec make_object(const Vec3& placement, double h, double mass = 1.0) {
  return {"o", 0.05, h, 0.3, placement, mass};
}

TEST(OracleMetrics, FrictionFreeSteadyAccelerationIsStable) {
  const Vec3 a(2.0, -1.0, 0.5);
  TrayState s;
  s.a = a;
  s.phi = friction_free_orientation(a);
  const TrayKinematics k = tray_kinematics(s);
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(0.3, 0, 0), Vec3(-0.1, 0.2, 0)}) {
    const ObjectMetrics m = object_metrics(make_object(p, 0.05), k, 0.25);
    EXPECT_TRUE(m.contact);
    EXPECT_NEAR(m.s, 0.0, 1e-7);
    EXPECT_NEAR(m.b, 0.0, 1e-12);
  }
}

TEST(OracleMetrics, LevelTrayUnderLateralAccelerationTilts) {
  // Level tray, lateral acceleration a: tan of force angle a/g, ZMP a h/(2g).
  TrayState s;
  s.a = Vec3(1.5, 0, 0);
  const ObjectSpec o = make_object(Vec3::Zero(), 0.1);
  const ObjectMetrics m = object_metrics(o, tray_kinematics(s), 0.1);
  EXPECT_NEAR(m.s, std::atan(1.5 / 9.81) / std::atan(0.3), 1e-12);
  EXPECT_NEAR(m.b, (2.0 / 0.05) * 1.5 * 0.05 / 9.81, 1e-12);
}

TEST(OracleMetrics, InvariantToMass) {
  const TrayKinematics k = tray_kinematics(Analytic::state(0.4));
  const ObjectMetrics m1 = object_metrics(make_object(Vec3(0.1, 0.2, 0), 0.15, 1.0), k, 0.25);
  const ObjectMetrics m2 = object_metrics(make_object(Vec3(0.1, 0.2, 0), 0.15, 3.7), k, 0.25);
  EXPECT_NEAR(m1.s, m2.s, 1e-12);
  EXPECT_NEAR(m1.b, m2.b, 1e-12);
}

TEST(OracleMetrics, DownwardAccelerationBeyondGravityLosesContact) {
  TrayState s;
  s.a = Vec3(0, 0, -10.5);
  const ObjectMetrics m = object_metrics(make_object(Vec3::Zero(), 0.1), tray_kinematics(s), 0.1);
  EXPECT_FALSE(m.contact);
  EXPECT_EQ(m.s, 0.0);  // pulled straight down: still inside the cone
}

TEST(OracleMetrics, OffsetBoundDominatesManifestWithoutRotationRate) {
  // With zero angular rate and the friction-free tilt, every object stays
  // inside its cone and support when |w'| sits exactly at the bound.
  std::vector<ObjectSpec> manifest;
  const double heights[] = {0.05, 0.15, 0.25};
  const double radii[] = {0.1, 0.2, 0.3};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double ang = j * M_PI / 3;
      manifest.push_back({"m", 0.05, heights[i], j % 2 ? 0.3 : 0.15,
                          Vec3(radii[i] * std::cos(ang), radii[i] * std::sin(ang), 0)});
    }
  }
  const OffsetObject off = build_offset_object(manifest, {0.3});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    TrayState s;
    s.a = Vec3(2.4 * u(rng), 2.4 * u(rng), 2.4 * u(rng));
    s.phi = friction_free_orientation(s.a);
    const Vec3 dir = Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec3 wdot = angular_accel_bound(off, s.a) * dir;
    s.omega_dot = so3_left_jacobian(s.phi.vector()).inverse() * wdot;
    const TrayKinematics k = tray_kinematics(s);
    ASSERT_LT((k.omega_dot - wdot).norm(), 1e-12);
    for (const ObjectSpec& o : manifest) {
      const ObjectMetrics m = object_metrics(o, k, off.h);
      ASSERT_TRUE(m.contact);
      EXPECT_LE(m.s, 1.0 + 1e-9) << "trial " << trial;
      EXPECT_LE(m.b, 1.0 + 1e-9) << "trial " << trial;
    }
  }
}

RunTrace sample_run(int n, double dt) {
  RunTrace r;
  r.dt = dt;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    TrayState s = Analytic::state(t);
    s.a *= 0.2;
    r.tray.push_back(s);
    r.clean.push_back(Analytic::x(t));
    r.plant.push_back(Analytic::x(t - 0.1));
  }
  return r;
}

std::vector<ObjectSpec> small_manifest() {
  return {{"a1", 0.05, 0.05, 0.15, Vec3(0.1, 0, 0)},
          {"B2", 0.05, 0.15, 0.3, Vec3(-0.2, 0, 0)},
          {"c3", 0.05, 0.25, 0.15, Vec3(0, 0.3, 0)}};
}

TEST(OracleRun, ParallelMatchesSerialBitwise) {
  const RunTrace run = sample_run(500, 0.02);
  const auto manifest = small_manifest();
  const StabilityReport a = evaluate_run(run, manifest);
  const StabilityReport b = evaluate_run_serial(run, manifest);
  ASSERT_EQ(a.objects.size(), b.objects.size());
  for (size_t i = 0; i < a.objects.size(); ++i) {
    EXPECT_EQ(a.objects[i].s, b.objects[i].s);
    EXPECT_EQ(a.objects[i].b, b.objects[i].b);
    EXPECT_EQ(a.objects[i].s_max, b.objects[i].s_max);
  }
  EXPECT_EQ(a.e, b.e);
  EXPECT_EQ(a.e_bar, b.e_bar);
}

TEST(OracleRun, DelayAlignmentRecoversPureLag) {
  const RunTrace run = sample_run(400, 0.02);
  const StabilityReport r = evaluate_run_serial(run, small_manifest());
  EXPECT_EQ(r.aligned_lag, 5);
  EXPECT_NEAR(r.e_bar_aligned, 0.0, 1e-12);
  EXPECT_GT(r.e_bar, 0.01);
}

TEST(OracleRun, MaximaStopAtFirstContactLoss) {
  RunTrace run = sample_run(20, 0.02);
  run.tray[10].a = Vec3(0, 0, -20);
  run.tray[15].a = Vec3(5, 0, 0);  // after loss, must not count
  const StabilityReport r = evaluate_run_serial(run, small_manifest());
  for (const ObjectTrace& t : r.objects) {
    EXPECT_EQ(t.first_loss, 10);
    double s = 0, s_all = 0;
    for (int k = 0; k < 10; ++k) s = std::max(s, t.s[k]);
    for (double v : t.s) s_all = std::max(s_all, v);
    EXPECT_EQ(t.s_max, s);
    EXPECT_EQ(t.s_max_rigid, s_all);
    EXPECT_GT(t.s_max_rigid, t.s_max);
  }
}

TEST(OracleRun, TrapezoidMeanIsExactForRamps) {
  const std::vector<double> y = {0, 1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(trapezoid_mean(y, 0.5), 2.0);
  const std::vector<double> c = {3, 3, 3};
  EXPECT_DOUBLE_EQ(trapezoid_mean(c, 0.1), 3.0);
}

TEST(OracleEnvelope, VanishesAtRest) {
  TrayState s;
  s.a = Vec3(1, 0, 0);
  s.phi = friction_free_orientation(s.a);
  const EnvelopeSample e = approximation_envelope(s, OffsetObject::explicit_values(0.05, 0.25, 0.15, 0.325));
  EXPECT_EQ(e.centripetal_budget, 0.0);
  EXPECT_EQ(e.gyroscopic_budget, 0.0);
  EXPECT_EQ(e.omega_dot_budget, 0.0);
}

}  // namespace
}  // namespace nptray
