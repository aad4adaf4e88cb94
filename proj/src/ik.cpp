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

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "nptray/error.hpp"

namespace nptray {
namespace {

Transform joint_motion(const Joint& j, double q) {
  Transform t = Transform::Identity();
  if (j.type == JointType::kRevolute) {
    t.linear() = Eigen::AngleAxisd(q, j.axis).toRotationMatrix();
  } else {
    t.translation() = q * j.axis;
  }
  return t;
}

void check_size(const KinematicChain& chain, const Eigen::VectorXd& q) {
  if (q.size() != chain.size()) {
    throw ValidationError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                          std::to_string(chain.size()));
  }
}

// Modified DH: RotX(alpha) TransX(a) TransZ(d), joint about the new z.
Joint mdh(double a, double d, double alpha, double lower, double upper) {
  Joint j;
  j.origin = Transform::Identity();
  j.origin.rotate(Eigen::AngleAxisd(alpha, Vec3::UnitX()));
  j.origin.translate(Vec3(a, 0, d));
  j.lower = lower;
  j.upper = upper;
  return j;
}

}  // namespace

void KinematicChain::validate() const {
  if (joints.empty()) throw ValidationError("chain: at least one joint required");
  for (size_t i = 0; i < joints.size(); ++i) {
    const Joint& j = joints[i];
    const std::string name = "chain joint " + std::to_string(i) + ": ";
    if (!(j.lower < j.upper)) throw ValidationError(name + "lower limit must be below upper");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw ValidationError(name + "axis must be unit");
  }
}

Eigen::VectorXd KinematicChain::midrange() const {
  Eigen::VectorXd q(size());
  for (int i = 0; i < size(); ++i) q[i] = 0.5 * (joints[i].lower + joints[i].upper);
  return q;
}

KinematicChain KinematicChain::panda_like() {
  KinematicChain c;
  c.joints = {
      mdh(0, 0.333, 0, -2.8973, 2.8973),         mdh(0, 0, -M_PI_2, -1.7628, 1.7628),
      mdh(0, 0.316, M_PI_2, -2.8973, 2.8973),    mdh(0.0825, 0, M_PI_2, -3.0718, -0.0698),
      mdh(-0.0825, 0.384, -M_PI_2, -2.8973, 2.8973), mdh(0, 0, M_PI_2, -0.0175, 3.7525),
      mdh(0.088, 0, M_PI_2, -2.8973, 2.8973),
  };
  c.tool = Transform::Identity();
  c.tool.translate(Vec3(0, 0, 0.107));
  return c;
}

Eigen::VectorXd KinematicChain::panda_ready() {
  Eigen::VectorXd q(7);
  q << 0, -M_PI_4, 0, -3 * M_PI_4, 0, M_PI_2, M_PI_4;
  return q;
}

IkGains IkGains::uniform(int n, double k_x, double k_phi, double k_h) {
  IkGains g;
  g.k_e.setZero();
  g.k_e.topLeftCorner<3, 3>() = k_x * Mat3::Identity();
  g.k_e.bottomRightCorner<3, 3>() = k_phi * Mat3::Identity();
  g.k_h = Eigen::VectorXd::Constant(n, k_h);
  return g;
}

void IkGains::validate(int n) const {
  if (k_h.size() != n) throw ValidationError("ik gains: K_H size must match the chain");
  if ((k_h.array() <= 0).any()) throw ValidationError("ik gains: K_H must be positive");
  const Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (k_e + k_e.transpose()));
  if (es.eigenvalues().minCoeff() <= 0) throw ValidationError("ik gains: K_e must be positive definite");
  if (!(damping >= 0)) throw ValidationError("ik gains: damping must be non-negative");
}

Pose fk(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  Transform t = Transform::Identity();
  for (int i = 0; i < chain.size(); ++i) t = t * chain.joints[i].origin * joint_motion(chain.joints[i], q[i]);
  t = t * chain.tool;
  return {t.translation(), t.linear()};
}

Jacobian jacobian(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  const int n = chain.size();
  std::vector<Vec3> axes(n), points(n);
  Transform t = Transform::Identity();
  for (int i = 0; i < n; ++i) {
    t = t * chain.joints[i].origin;
    axes[i] = t.linear() * chain.joints[i].axis;
    points[i] = t.translation();
    t = t * joint_motion(chain.joints[i], q[i]);
  }
  const Vec3 tip = (t * chain.tool).translation();
  Jacobian j(6, n);
  for (int i = 0; i < n; ++i) {
    if (chain.joints[i].type == JointType::kRevolute) {
      j.col(i) << axes[i].cross(tip - points[i]), axes[i];
    } else {
      j.col(i) << axes[i], Vec3::Zero();
    }
  }
  return j;
}

Vec6 pose_error(const Pose& desired, const Pose& actual) {
  // Entry (i, j) and (j, i) share one summation order, so equal rotations
  // give an exactly symmetric product and a zero logarithm.
  Mat3 rel;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      rel(i, j) = desired.rotation.row(i).dot(actual.rotation.row(j));
    }
  }
  Vec6 e;
  e << desired.position - actual.position, log_so3(rel);
  return e;
}

double joint_limit_cost(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  double h = 0.0;
  for (int i = 0; i < chain.size(); ++i) {
    const double u = chain.joints[i].upper, l = chain.joints[i].lower;
    if (!(q[i] > l && q[i] < u)) {
      throw ValidationError("joint " + std::to_string(i) + " at or beyond its limit");
    }
    h += (u - l) * (u - l) / ((u - q[i]) * (q[i] - l));
  }
  return h;
}

Eigen::VectorXd joint_limit_gradient(const KinematicChain& chain, const Eigen::VectorXd& q) {
  joint_limit_cost(chain, q);
  Eigen::VectorXd grad(chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    const double u = chain.joints[i].upper, l = chain.joints[i].lower;
    const double du = u - q[i], dl = q[i] - l;
    // Offset from the same midpoint midrange() returns: exactly zero there.
    const double off = q[i] - 0.5 * (l + u);
    grad[i] = 2 * (u - l) * (u - l) * off / (du * du * dl * dl);
  }
  return grad;
}

Eigen::MatrixXd damped_pseudo_inverse(const Jacobian& j, double lambda) {
  const Eigen::MatrixXd jjt = j * j.transpose() + lambda * lambda * Eigen::MatrixXd::Identity(6, 6);
  return j.transpose() * jjt.ldlt().solve(Eigen::MatrixXd::Identity(6, 6));
}

Eigen::VectorXd ik_step(const KinematicChain& chain, const IkGains& gains,
                        const Eigen::VectorXd& q_s, const Pose& desired, const Vec6& twist) {
  const Eigen::VectorXd q0 = -gains.k_h.cwiseProduct(joint_limit_gradient(chain, q_s));
  const Jacobian j = jacobian(chain, q_s);
  const Eigen::MatrixXd pinv = damped_pseudo_inverse(j, gains.damping);
  const Vec6 e = pose_error(desired, fk(chain, q_s));
  const Eigen::MatrixXd null = Eigen::MatrixXd::Identity(chain.size(), chain.size()) - pinv * j;
  return pinv * (twist + gains.k_e * e) + null * q0;
}

}  // namespace nptray
