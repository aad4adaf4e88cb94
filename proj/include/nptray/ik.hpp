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

#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "nptray/geom.hpp"

namespace nptray {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Transform = Eigen::Isometry3d;

enum class JointType { kRevolute, kPrismatic };

/// The joint moves about (or along) `axis`, expressed in the frame reached
/// after `origin`.
struct Joint {
  JointType type = JointType::kRevolute;
  Vec3 axis = Vec3::UnitZ();
  Transform origin = Transform::Identity();
  double lower = -M_PI;
  double upper = M_PI;
};

struct KinematicChain {
  std::vector<Joint> joints;
  Transform tool = Transform::Identity();

  int size() const { return static_cast<int>(joints.size()); }

  /// Throws ValidationError unless n >= 1, lower < upper and axes are unit.
  void validate() const;

  Eigen::VectorXd midrange() const;

  /// Seven revolute joints with Panda-like modified DH parameters and limits.
  static KinematicChain panda_like();

  /// Panda-like ready configuration: tool pointing down in front of the base.
  static Eigen::VectorXd panda_ready();
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
};

struct IkGains {
  Mat6 k_e = Mat6::Identity();  ///< blkdiag(K_ex, K_ephi) [1/s]
  Eigen::VectorXd k_h;          ///< diagonal of K_H
  double damping = 1e-4;        ///< lambda of the damped pseudo-inverse

  static IkGains uniform(int n, double k_x, double k_phi, double k_h);
  void validate(int n) const;
};

Pose fk(const KinematicChain& chain, const Eigen::VectorXd& q);

/// Geometric Jacobian, rows (linear; angular) in the base frame.
Jacobian jacobian(const KinematicChain& chain, const Eigen::VectorXd& q);

/// (p_d - p; log(R_d R^T)).
Vec6 pose_error(const Pose& desired, const Pose& actual);

/// Joint-limit barrier sum (u-l)^2 / ((u-q)(q-l)); minimal at midrange.
/// Throws ValidationError when any q is at or beyond a limit.
double joint_limit_cost(const KinematicChain& chain, const Eigen::VectorXd& q);
Eigen::VectorXd joint_limit_gradient(const KinematicChain& chain, const Eigen::VectorXd& q);

/// J^T (J J^T + lambda^2 I)^-1.
Eigen::MatrixXd damped_pseudo_inverse(const Jacobian& j, double lambda);

/// q'_d = J+ (V_d + K_e e) + (I - J+ J) q'_0 with q'_0 = -K_H grad H.
Eigen::VectorXd ik_step(const KinematicChain& chain, const IkGains& gains,
                        const Eigen::VectorXd& q_s, const Pose& desired, const Vec6& twist);

}  // namespace nptray
