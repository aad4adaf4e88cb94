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


#include "nptray/smoother.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "nptray/error.hpp"

namespace nptray {
namespace {

constexpr int kQuantities = 21;  // v_d a_d j_d v_s a_s jerk_s snap_d, 3 axes

// Slack index per constrained quantity: velocity, acceleration, jerk, snap.
constexpr int slack_of(int q) {
  const int group = q / 3;
  constexpr int map[7] = {0, 1, 2, 0, 1, 2, 3};
  return map[group];
}

void require_psd(const Eigen::MatrixXd& w, const char* name, bool strict) {
  if (!w.isApprox(w.transpose(), 1e-12)) {
    throw ValidationError(std::string(name) + " must be symmetric");
  }
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w).eigenvalues().minCoeff();
  if (strict ? !(lo > 0) : !(lo >= -1e-12)) {
    throw ValidationError(std::string(name) + (strict ? " must be positive definite"
                                                      : " must be positive semidefinite"));
  }
}

}  // namespace

Mat9 SmootherConfig::default_w_x() {
  Mat9 w = Mat9::Zero();
  w.diagonal() << 400, 400, 400, 40, 40, 40, 4, 4, 4;
  return w;
}

void SmootherConfig::validate() const {
  if (!(dt > 0)) throw ValidationError("smoother.dt must be positive");
  if (horizon < 1) throw ValidationError("smoother.horizon must be at least 1");
  if ((k_ex.array() < 0).any()) throw ValidationError("smoother.k_ex must be nonnegative");
  require_psd(w_x, "smoother.w_x", false);
  require_psd(w_u, "smoother.w_u", true);
  if (!(bounds.v_max > 0 && bounds.a_max > 0 && bounds.j_max > 0 && bounds.u_max > 0)) {
    throw ValidationError("smoother bounds must be positive");
  }
  if (!(slack.quadratic > 0) || slack.linear < 0) {
    throw ValidationError("smoother slack penalty must be positive");
  }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize_zoh(const Eigen::MatrixXd& a,
                                                           const Eigen::MatrixXd& b,
                                                           double dt) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = a * dt;
  big.topRightCorner(n, m) = b * dt;
  const Eigen::MatrixXd e = big.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

SmootherModel build_model(const Vec3& k_ex, double dt, int horizon, const Mat9& w_x,
                          const Mat3& w_u) {
  SmootherConfig check;
  check.dt = dt;
  check.horizon = horizon;
  check.k_ex = k_ex;
  check.w_x = w_x;
  check.w_u = w_u;
  check.validate();

  const Mat3 i3 = Mat3::Identity();
  const Mat3 k = k_ex.asDiagonal();
  SmootherModel m;
  m.dt = dt;
  m.horizon = horizon;
  m.k_ex = k_ex;
  m.w_x = w_x;
  m.w_u = w_u;

  m.a_dd = Eigen::MatrixXd::Zero(kDesiredDim, kDesiredDim);
  for (int i = 0; i < 4; ++i) m.a_dd.block<3, 3>(3 * i, 3 * (i + 1)) = i3;
  m.b_dd = Eigen::MatrixXd::Zero(kDesiredDim, kInputDim);
  m.b_dd.block<3, 3>(12, 0) = i3;

  // d/dt x_s^(i) = K (x_d^(i) - x_s^(i)) + x_d^(i+1), i = 0, 1, 2.
  m.a_sd = Eigen::MatrixXd::Zero(kPlantDim, kDesiredDim);
  m.a_ss = Eigen::MatrixXd::Zero(kPlantDim, kPlantDim);
  for (int i = 0; i < 3; ++i) {
    m.a_sd.block<3, 3>(3 * i, 3 * i) = k;
    m.a_sd.block<3, 3>(3 * i, 3 * (i + 1)) = i3;
    m.a_ss.block<3, 3>(3 * i, 3 * i) = -k;
  }

  m.a_c = Eigen::MatrixXd::Zero(kStateDim, kStateDim);
  m.a_c.topLeftCorner(kDesiredDim, kDesiredDim) = m.a_dd;
  m.a_c.bottomLeftCorner(kPlantDim, kDesiredDim) = m.a_sd;
  m.a_c.bottomRightCorner(kPlantDim, kPlantDim) = m.a_ss;
  m.b_c = Eigen::MatrixXd::Zero(kStateDim, kInputDim);
  m.b_c.topRows(kDesiredDim) = m.b_dd;

  std::tie(m.a, m.b) = discretize_zoh(m.a_c, m.b_c, dt);
  return m;
}

Vec3 plant_jerk(const StateVec& x, const Vec3& k_ex) {
  return k_ex.cwiseProduct(x.segment<3>(6) - x.segment<3>(21)) + x.segment<3>(9);
}

CondensedBuilder::CondensedBuilder(const SmootherModel& model, const SlackPenalty& slack)
    : horizon_(model.horizon), slack_(slack) {
  const int n = kStateDim;
  const int nn = horizon_;
  const int nu = kInputDim * nn;
  const int nz = nu + CondensedQp::kSlacks;

  phi_.resize(n * nn, n);
  gamma_ = Eigen::MatrixXd::Zero(n * nn, nu);
  Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::MatrixXd> a_pow_b;  // A^i B
  Eigen::MatrixXd ab = model.b;
  for (int k = 0; k < nn; ++k) {
    a_pow_b.push_back(ab);
    ab = model.a * ab;
  }
  for (int k = 0; k < nn; ++k) {
    ak = model.a * ak;
    phi_.middleRows(n * k, n) = ak;
    for (int i = 0; i <= k; ++i) {
      gamma_.block(n * k, kInputDim * i, n, kInputDim) = a_pow_b[k - i];
    }
  }

  // Constrained quantities.
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(kQuantities, n);
  const Mat3 i3 = Mat3::Identity();
  const Mat3 kd = model.k_ex.asDiagonal();
  sel.block<3, 3>(0, 3) = i3;    // v_d
  sel.block<3, 3>(3, 6) = i3;    // a_d
  sel.block<3, 3>(6, 9) = i3;    // j_d
  sel.block<3, 3>(9, 18) = i3;   // v_s
  sel.block<3, 3>(12, 21) = i3;  // a_s
  sel.block<3, 3>(15, 6) = kd;   // plant jerk
  sel.block<3, 3>(15, 21) = -kd;
  sel.block<3, 3>(15, 9) = i3;
  sel.block<3, 3>(18, 12) = i3;  // s_d

  // Cost over plant states only.
  Eigen::MatrixXd c_bar = Eigen::MatrixXd::Zero(kPlantDim * nn, n * nn);
  Eigen::MatrixXd q_bar = Eigen::MatrixXd::Zero(kPlantDim * nn, kPlantDim * nn);
  for (int k = 0; k < nn; ++k) {
    c_bar.block(kPlantDim * k, n * k + kDesiredDim, kPlantDim, kPlantDim) =
        Eigen::MatrixXd::Identity(kPlantDim, kPlantDim);
    q_bar.block(kPlantDim * k, kPlantDim * k, kPlantDim, kPlantDim) = model.w_x;
  }
  const Eigen::MatrixXd cg = c_bar * gamma_;
  grad_map_ = cg.transpose() * q_bar;
  plant_from_x0_ = c_bar * phi_;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nz, nz);
  h.topLeftCorner(nu, nu) = 2.0 * grad_map_ * cg;
  for (int k = 0; k < nn; ++k) {
    h.block(kInputDim * k, kInputDim * k, kInputDim, kInputDim) += 2.0 * model.w_u;
  }
  for (int s = 0; s < CondensedQp::kSlacks; ++s) h(nu + s, nu + s) = 2.0 * slack.quadratic;
  base_.horizon = nn;
  base_.qp.H = h;

  // Unscaled constraint matrix.
  const int m = CondensedQp::kRowsPerStep * nn + CondensedQp::kSlacks;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, nz);
  row_from_x0_ = Eigen::MatrixXd::Zero(m, n);
  for (int k = 0; k < nn; ++k) {
    const int r0 = CondensedQp::kRowsPerStep * k;
    const Eigen::MatrixXd sg = sel * gamma_.middleRows(n * k, n);
    const Eigen::MatrixXd sp = sel * phi_.middleRows(n * k, n);
    for (int q = 0; q < kQuantities; ++q) {
      for (int sign = 0; sign < 2; ++sign) {
        const double sgn = sign == 0 ? 1.0 : -1.0;
        const int r = r0 + 2 * q + sign;
        a.row(r).head(nu) = sgn * sg.row(q);
        a(r, nu + slack_of(q)) = -1.0;
        row_from_x0_.row(r) = sgn * sp.row(q);
      }
    }
    for (int ax = 0; ax < 3; ++ax) {
      a(r0 + 42 + ax, kInputDim * k + ax) = 1.0;
      a(r0 + 45 + ax, kInputDim * k + ax) = -1.0;
    }
  }
  for (int s = 0; s < CondensedQp::kSlacks; ++s) {
    a(m - CondensedQp::kSlacks + s, nu + s) = -1.0;
  }

  // Jacobi variable scaling, then unit-norm rows.
  base_.var_scale = h.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd d = base_.var_scale.asDiagonal();
  base_.qp.H = d * h * d;
  Eigen::MatrixXd ad = a * d;
  row_norm_ = ad.rowwise().norm();
  for (int r = 0; r < m; ++r) ad.row(r) /= row_norm_(r);
  base_.qp.A = ad;
  base_.qp.f = Eigen::VectorXd::Zero(nz);
  base_.qp.b = Eigen::VectorXd::Zero(m);
}

CondensedQp CondensedBuilder::build(const StateVec& x0, const ReferenceState& ref,
                                    double snap_bound, const StateBounds& bounds) const {
  const int nn = horizon_;
  const int nu = kInputDim * nn;
  const int m = CondensedQp::kRowsPerStep * nn + CondensedQp::kSlacks;
  CondensedQp out = base_;

  Eigen::VectorXd r_bar(kPlantDim * nn);
  for (int k = 0; k < nn; ++k) {
    r_bar.segment<3>(kPlantDim * k) = ref.x;
    r_bar.segment<3>(kPlantDim * k + 3) = ref.v;
    r_bar.segment<3>(kPlantDim * k + 6) = ref.a;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nu + CondensedQp::kSlacks);
  f.head(nu) = 2.0 * grad_map_ * (plant_from_x0_ * x0 - r_bar);
  f.tail(CondensedQp::kSlacks).setConstant(slack_.linear);
  out.qp.f = out.var_scale.cwiseProduct(f);

  const double limits[7] = {bounds.v_max, bounds.a_max, bounds.j_max, bounds.v_max,
                            bounds.a_max, bounds.j_max, snap_bound / std::sqrt(3.0)};
  Eigen::VectorXd b(m);
  for (int k = 0; k < nn; ++k) {
    const int r0 = CondensedQp::kRowsPerStep * k;
    for (int q = 0; q < kQuantities; ++q) {
      b(r0 + 2 * q) = limits[q / 3];
      b(r0 + 2 * q + 1) = limits[q / 3];
    }
    b.segment<6>(r0 + 42).setConstant(bounds.u_max);
  }
  b.tail(CondensedQp::kSlacks).setZero();
  b -= row_from_x0_ * x0;
  out.qp.b = b.cwiseQuotient(row_norm_);
  return out;
}

std::vector<int> CondensedBuilder::shift_active(const std::vector<int>& active) const {
  const int steps = CondensedQp::kRowsPerStep * horizon_;
  std::vector<int> out;
  out.reserve(active.size());
  for (int r : active) {
    if (r >= steps) {
      out.push_back(r);
    } else if (r >= CondensedQp::kRowsPerStep) {
      out.push_back(r - CondensedQp::kRowsPerStep);
    }
  }
  return out;
}

CondensedQp assemble_qp(const SmootherModel& model, const StateVec& x0,
                        const ReferenceState& ref, double snap_bound,
                        const StateBounds& bounds, const SlackPenalty& slack) {
  if (!(snap_bound > 0)) throw ValidationError("assemble_qp: snap bound must be positive");
  return CondensedBuilder(model, slack).build(x0, ref, snap_bound, bounds);
}

TrayState desired_tray_state(const StateVec& x, const Vec3& g) {
  TrayState t;
  t.x = x.segment<3>(0);
  t.v = x.segment<3>(3);
  t.a = x.segment<3>(6);
  t.j = x.segment<3>(9);
  t.s = x.segment<3>(12);
  t.phi = friction_free_orientation(t.a, g);
  const AngularRates r = exact_orientation_derivatives(t.a, t.j, t.s, g);
  t.omega = r.omega;
  t.omega_dot = r.omega_dot;
  return t;
}

Smoother::Smoother(const SmootherConfig& config, const OffsetObject& offset)
    : cfg_(config),
      offset_(offset),
      model_(build_model(config.k_ex, config.dt, config.horizon, config.w_x, config.w_u)),
      solver_(config.qp),
      builder_(model_, config.slack) {
  cfg_.validate();
}

void Smoother::reset(const Vec3& x0) {
  x_.setZero();
  x_.segment<3>(0) = x0;
  x_.segment<3>(15) = x0;
  last_u_.setZero();
  warm_.clear();
}

void Smoother::set_state(const StateVec& x) {
  x_ = x;
  warm_.clear();
}

Smoother::Step Smoother::step(const ReferenceState& ref) {
  Step out;
  const auto t0 = std::chrono::steady_clock::now();
  const Vec3 a_d = x_.segment<3>(6);
  out.omega_dot_max = angular_accel_bound(offset_, a_d);
  out.snap_bound = snap_bound(a_d, out.omega_dot_max);

  const CondensedQp qp = builder_.build(x_, ref, out.snap_bound, cfg_.bounds);
  const std::vector<int> warm = builder_.shift_active(warm_);
  const QpSolution sol = solver_.solve(qp.qp, &warm);
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.kkt_residual = sol.kkt_residual;

  if (sol.status == QpStatus::kConverged) {
    const Eigen::VectorXd z = qp.unscale(sol.z);
    out.u = z.head<3>().cwiseMax(-cfg_.bounds.u_max).cwiseMin(cfg_.bounds.u_max);
    out.max_slack = z.tail(CondensedQp::kSlacks).maxCoeff();
    warm_ = sol.active;
  } else {
    out.u = last_u_;
    out.degraded = true;
    warm_.clear();
  }
  out.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  x_ = model_.a * x_ + model_.b * out.u;
  last_u_ = out.u;
  out.desired = desired_tray_state(x_);
  return out;
}

}  // namespace nptray
