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

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nptray/orientation.hpp"
#include "nptray/qp.hpp"
#include "nptray/sigproc.hpp"
#include "nptray/vobject.hpp"

namespace nptray {

inline constexpr int kDesiredDim = 15;  // x, v, a, j, s
inline constexpr int kPlantDim = 9;     // x, v, a
inline constexpr int kStateDim = kDesiredDim + kPlantDim;
inline constexpr int kInputDim = 3;

using Mat9 = Eigen::Matrix<double, 9, 9>;
using StateVec = Eigen::Matrix<double, kStateDim, 1>;

/// Symmetric boxes. `snap` is refilled every cycle.
struct StateBounds {
  double v_max = 1.5;
  double a_max = 2.4;
  double j_max = 50.0;
  double u_max = 5e4;
  double snap = 0.0;
};

/// Quadratic plus linear penalty on each nonnegative slack.
struct SlackPenalty {
  double quadratic = 1e6;
  double linear = 1e6;
};

struct SmootherConfig {
  double dt = 0.02;
  int horizon = 10;
  Vec3 k_ex = Vec3::Constant(20.0);
  Mat9 w_x = default_w_x();
  Mat3 w_u = 1e-6 * Mat3::Identity();
  StateBounds bounds;
  SlackPenalty slack;
  QpOptions qp;

  static Mat9 default_w_x();
  void validate() const;
};

/// Five-integrator desired chain driving a first-order tracking plant.
/// State order: [x_d, v_d, a_d, j_d, s_d, x_s, v_s, a_s], 3 axes each.
struct SmootherModel {
  Eigen::MatrixXd a_c, b_c;     // continuous 24x24, 24x3
  Eigen::MatrixXd a_dd, b_dd;   // desired chain 15x15, 15x3
  Eigen::MatrixXd a_sd, a_ss;   // plant coupling 9x15, 9x9
  Eigen::MatrixXd a, b;         // discrete 24x24, 24x3
  double dt = 0.0;
  int horizon = 0;
  Vec3 k_ex = Vec3::Zero();
  Mat9 w_x = Mat9::Zero();
  Mat3 w_u = Mat3::Zero();
};

/// Exact zero-order-hold discretization from the exponential of
/// [[A, B], [0, 0]] dt.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize_zoh(const Eigen::MatrixXd& a,
                                                           const Eigen::MatrixXd& b,
                                                           double dt);

SmootherModel build_model(const Vec3& k_ex, double dt, int horizon, const Mat9& w_x,
                          const Mat3& w_u);

/// Condensed QP over z = [u_0 .. u_{N-1}, s_v, s_a, s_j, s_s] in scaled
/// variables. Rows per step k = 1..N: +/- v, a, j of both chains, +/- snap,
/// +/- u_{k-1}; then four slack sign rows.
struct CondensedQp {
  QpProblem qp;
  Eigen::VectorXd var_scale;  ///< z = var_scale .* z_scaled
  int horizon = 0;

  static constexpr int kSlacks = 4;
  static constexpr int kRowsPerStep = 48;

  int num_inputs() const { return kInputDim * horizon; }
  Eigen::VectorXd unscale(const Eigen::VectorXd& z_scaled) const {
    return var_scale.cwiseProduct(z_scaled);
  }
};

/// Cycle-invariant part of the condensed problem: prediction maps, Hessian,
/// constraint matrix and scalings. Only the gradient and the right-hand
/// side depend on the current state, reference and bounds.
class CondensedBuilder {
 public:
  CondensedBuilder(const SmootherModel& model, const SlackPenalty& slack);

  /// The reference is held over the horizon; the snap box is
  /// snap_bound / sqrt(3) per axis.
  CondensedQp build(const StateVec& x0, const ReferenceState& ref, double snap_bound,
                    const StateBounds& bounds) const;

  /// Moves an active set one step earlier in the horizon; rows of the first
  /// step are dropped, slack rows are kept.
  std::vector<int> shift_active(const std::vector<int>& active) const;

  /// Stacked predicted states X_1..X_N = phi x0 + gamma U.
  const Eigen::MatrixXd& phi() const { return phi_; }
  const Eigen::MatrixXd& gamma() const { return gamma_; }

 private:
  int horizon_;
  SlackPenalty slack_;
  Eigen::MatrixXd phi_, gamma_;
  Eigen::MatrixXd grad_map_;       // Gamma' C' Q, 3N x 9N
  Eigen::MatrixXd plant_from_x0_;  // C Phi, 9N x 24
  CondensedQp base_;             // scaled H and A
  Eigen::MatrixXd row_from_x0_;  // unscaled row values from x0
  Eigen::VectorXd row_norm_;     // norms of A D rows
};

/// One-shot convenience over CondensedBuilder.
CondensedQp assemble_qp(const SmootherModel& model, const StateVec& x0,
                        const ReferenceState& ref, double snap_bound,
                        const StateBounds& bounds, const SlackPenalty& slack = {});

/// Plant jerk, the time derivative of a_s: K (a_d - a_s) + j_d.
Vec3 plant_jerk(const StateVec& x, const Vec3& k_ex);

/// Rolling-horizon smoother. Owns the 24-state, the solver and warm start.
class Smoother {
 public:
  struct Step {
    Vec3 u = Vec3::Zero();
    TrayState desired;       ///< after applying u over one period
    double omega_dot_max = 0.0;
    double snap_bound = 0.0;
    QpStatus status = QpStatus::kConverged;
    int iterations = 0;
    double kkt_residual = 0.0;
    double max_slack = 0.0;
    bool degraded = false;
    double solve_ms = 0.0;
  };

  Smoother(const SmootherConfig& config, const OffsetObject& offset);

  /// Desired chain at rest at x0; plant at x0.
  void reset(const Vec3& x0);

  /// Replaces the state, e.g. on a mode handoff; clears the warm start.
  void set_state(const StateVec& x);

  Step step(const ReferenceState& ref);

  const StateVec& state() const { return x_; }
  const SmootherModel& model() const { return model_; }
  const SmootherConfig& config() const { return cfg_; }

 private:
  SmootherConfig cfg_;
  OffsetObject offset_;
  SmootherModel model_;
  QpSolver solver_;
  StateVec x_ = StateVec::Zero();
  Vec3 last_u_ = Vec3::Zero();
  std::vector<int> warm_;

  CondensedBuilder builder_;
};

/// Desired tray state read from the 24-state: chain plus orientation.
TrayState desired_tray_state(const StateVec& x, const Vec3& g = kGravity);

}  // namespace nptray
