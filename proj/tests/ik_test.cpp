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


#include "nptray/ik.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nptray/error.hpp"

namespace nptray {
namespace {

Joint prismatic(const Vec3& axis) {
  Joint j;
  j.type = JointType::kPrismatic;
  j.axis = axis;
  j.lower = -1.0;
  j.upper = 1.0;
  return j;
}

KinematicChain planar(double l1, double l2) {
  KinematicChain c;
  Joint j1;
  Joint j2;
  j2.origin.translate(Vec3(l1, 0, 0));
  c.joints = {j1, j2};
  c.tool.translate(Vec3(l2, 0, 0));
  return c;
}

TEST(IkFk, PrismaticAlongX) {
  KinematicChain c;
  c.joints = {prismatic(Vec3::UnitX())};
  Eigen::VectorXd q(1);
  q << 0.3;
  EXPECT_LT((fk(c, q).position - Vec3(0.3, 0, 0)).norm(), 1e-15);
  Vec6 col;
  col << 1, 0, 0, 0, 0, 0;
  EXPECT_LT((jacobian(c, q).col(0) - col).norm(), 1e-15);
}

TEST(IkFk, PlanarTwoLinkStraight) {
  const KinematicChain c = planar(0.4, 0.3);
  EXPECT_LT((fk(c, Eigen::VectorXd::Zero(2)).position - Vec3(0.7, 0, 0)).norm(), 1e-15);
  Eigen::VectorXd q(2);
  q << M_PI_2, -M_PI_2;
  EXPECT_LT((fk(c, q).position - Vec3(0.3, 0.4, 0)).norm(), 1e-12);
}

Vec3 rotation_difference(const Rotation& a, const Rotation& b) { return log_so3(a * b.transpose()); }

TEST(IkJacobian, MatchesFiniteDifferencesOnPanda) {
  const KinematicChain c = KinematicChain::panda_like();
  std::mt19937_64 rng(3);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(7);
    for (int i = 0; i < 7; ++i) {
      std::uniform_real_distribution<double> u(c.joints[i].lower + 0.1, c.joints[i].upper - 0.1);
      q[i] = u(rng);
    }
    const Jacobian j = jacobian(c, q);
    for (int i = 0; i < 7; ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose p = fk(c, qp), m = fk(c, qm);
      Vec6 fd;
      fd << (p.position - m.position) / (2 * h), rotation_difference(p.rotation, m.rotation) / (2 * h);
      EXPECT_LT((j.col(i) - fd).norm(), 1e-6) << "joint " << i;
    }
  }
}

TEST(IkJacobian, MixedChainMatchesFiniteDifferences) {
  KinematicChain c = planar(0.2, 0.1);
  Joint p = prismatic(Vec3(0, 0.6, 0.8));
  p.origin.rotate(Eigen::AngleAxisd(0.4, Vec3::UnitY()));
  c.joints.insert(c.joints.begin() + 1, p);
  Eigen::VectorXd q(3);
  q << 0.3, 0.2, -0.5;
  const Jacobian j = jacobian(c, q);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Pose a = fk(c, qp), b = fk(c, qm);
    Vec6 fd;
    fd << (a.position - b.position) / (2 * h), rotation_difference(a.rotation, b.rotation) / (2 * h);
    EXPECT_LT((j.col(i) - fd).norm(), 1e-6);
  }
}

TEST(IkBarrier, GradientVanishesAtMidrangeAndMatchesDifferences) {
  const KinematicChain c = KinematicChain::panda_like();
  EXPECT_LT(joint_limit_gradient(c, c.midrange()).norm(), 1e-12);
  Eigen::VectorXd q = c.midrange();
  q[3] += 0.7;
  q[5] -= 1.1;
  const Eigen::VectorXd grad = joint_limit_gradient(c, q);
  for (int i = 0; i < 7; ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp[i] += 1e-6;
    qm[i] -= 1e-6;
    EXPECT_NEAR(grad[i], (joint_limit_cost(c, qp) - joint_limit_cost(c, qm)) / 2e-6, 1e-5);
  }
}

TEST(IkBarrier, AtLimitThrows) {
  const KinematicChain c = KinematicChain::panda_like();
  Eigen::VectorXd q = c.midrange();
  q[1] = c.joints[1].upper;
  EXPECT_THROW(joint_limit_cost(c, q), ValidationError);
}

TEST(IkStep, ZeroErrorAtMidrangeIsStill) {
  const KinematicChain c = KinematicChain::panda_like();
  const Eigen::VectorXd q = c.midrange();
  const IkGains g = IkGains::uniform(7, 10, 10, 0.1);
  const Eigen::VectorXd qd = ik_step(c, g, q, fk(c, q), Vec6::Zero());
  EXPECT_LT(qd.norm(), 1e-10);
}

TEST(IkStep, PrismaticFollowsTwistPlusError) {
  KinematicChain c;
  c.joints = {prismatic(Vec3::UnitX())};
  IkGains g = IkGains::uniform(1, 5.0, 1.0, 0.1);
  Eigen::VectorXd q(1);
  q << 0.0;  // midrange: no null-space push, and a 1-joint task has no null space
  Pose d;
  d.position = Vec3(0.02, 0, 0);
  Vec6 v = Vec6::Zero();
  v[0] = 0.3;
  EXPECT_NEAR(ik_step(c, g, q, d, v)[0], 0.3 + 5.0 * 0.02, 1e-8);
}

TEST(IkStep, RedundantTaskVelocityAndNullSpace) {
  const KinematicChain c = KinematicChain::panda_like();
  Eigen::VectorXd q = c.midrange();
  q[0] += 0.5;
  q[2] -= 0.8;
  IkGains g = IkGains::uniform(7, 10, 10, 0.05);
  Pose d = fk(c, q);
  d.position += Vec3(0.01, -0.02, 0.005);
  Vec6 v;
  v << 0.1, 0.0, -0.05, 0.02, 0.0, 0.1;
  const Jacobian j = jacobian(c, q);
  const Vec6 task = v + g.k_e * pose_error(d, fk(c, q));
  const Eigen::VectorXd qd = ik_step(c, g, q, d, v);
  EXPECT_LT((j * qd - task).norm(), 1e-6);

  g.damping = 0.0;
  const Eigen::MatrixXd pinv = damped_pseudo_inverse(j, 0.0);
  const Eigen::MatrixXd null = Eigen::MatrixXd::Identity(7, 7) - pinv * j;
  EXPECT_LT((null * null - null).norm(), 1e-9);
  EXPECT_LT((j * null).norm(), 1e-9);
  const Eigen::VectorXd q0 = -g.k_h.cwiseProduct(joint_limit_gradient(c, q));
  EXPECT_LT((j * null * q0).norm(), 1e-6);
  EXPECT_GT((null * q0).norm(), 1e-3);
}

TEST(IkStep, NullSpaceMotionReducesBarrier) {
  const KinematicChain c = KinematicChain::panda_like();
  Eigen::VectorXd q = c.midrange();
  q[2] = c.joints[2].upper - 0.2;
  const IkGains g = IkGains::uniform(7, 10, 10, 0.05);
  const Pose target = fk(c, q);
  const double h0 = joint_limit_cost(c, q);
  for (int k = 0; k < 200; ++k) q += 0.01 * ik_step(c, g, q, target, Vec6::Zero());
  EXPECT_LT(joint_limit_cost(c, q), h0);
  EXPECT_LT((fk(c, q).position - target.position).norm(), 1e-3);
}

TEST(IkStep, DeskScaleTrackingNeverCrossesLimits) {
  const KinematicChain c = KinematicChain::panda_like();
  Eigen::VectorXd q = KinematicChain::panda_ready();
  const IkGains g = IkGains::uniform(7, 20, 20, 0.05);
  const Pose home = fk(c, q);
  const double dt = 0.004;
  for (int k = 0; k < 2500; ++k) {
    const double t = k * dt;
    Pose d = home;
    d.position += Vec3(0.15 * std::sin(t), 0.1 * (1 - std::cos(t)), 0.05 * std::sin(2 * t));
    Vec6 v = Vec6::Zero();
    v.head<3>() = Vec3(0.15 * std::cos(t), 0.1 * std::sin(t), 0.1 * std::cos(2 * t));
    q += dt * ik_step(c, g, q, d, v);
    for (int i = 0; i < 7; ++i) {
      ASSERT_GT(q[i], c.joints[i].lower);
      ASSERT_LT(q[i], c.joints[i].upper);
    }
  }
  EXPECT_LT((fk(c, q).position - home.position - Vec3(0.15 * std::sin(10.0), 0.1 * (1 - std::cos(10.0)),
                                                     0.05 * std::sin(20.0)))
                .norm(),
            1e-3);
}

TEST(IkStep, EquivariantUnderJointReordering) {
  KinematicChain c;
  c.joints = {prismatic(Vec3::UnitX()), prismatic(Vec3::UnitY()), prismatic(Vec3::UnitZ())};
  c.joints[1].lower = -0.5;
  IkGains g = IkGains::uniform(3, 4.0, 1.0, 0.0);
  g.k_h << 0.1, 0.2, 0.3;
  Eigen::VectorXd q(3);
  q << 0.1, -0.2, 0.3;
  Pose d;
  d.position = Vec3(0.2, 0.1, -0.1);
  Vec6 v = Vec6::Zero();
  v.head<3>() = Vec3(0.05, -0.02, 0.01);
  const Eigen::VectorXd ref = ik_step(c, g, q, d, v);

  const int perm[] = {2, 0, 1};
  KinematicChain cp;
  IkGains gp = g;
  Eigen::VectorXd qp(3);
  for (int i = 0; i < 3; ++i) {
    cp.joints.push_back(c.joints[perm[i]]);
    gp.k_h[i] = g.k_h[perm[i]];
    qp[i] = q[perm[i]];
  }
  const Eigen::VectorXd got = ik_step(cp, gp, qp, d, v);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], ref[perm[i]], 1e-12);
}

TEST(IkChain, ReadyPoseIsInsideLimitsWithToolDown) {
  const KinematicChain c = KinematicChain::panda_like();
  const Eigen::VectorXd q = KinematicChain::panda_ready();
  EXPECT_NO_THROW(joint_limit_cost(c, q));
  const Pose p = fk(c, q);
  EXPECT_NEAR(p.rotation.col(2).z(), -1.0, 1e-9);
  EXPECT_GT(p.position.x(), 0.2);
}

TEST(IkChain, ValidateRejectsBadLimits) {
  KinematicChain c;
  EXPECT_THROW(c.validate(), ValidationError);
  c.joints = {prismatic(Vec3::UnitX())};
  c.joints[0].lower = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_NO_THROW(KinematicChain::panda_like().validate());
}

}  // namespace
}  // namespace nptray
