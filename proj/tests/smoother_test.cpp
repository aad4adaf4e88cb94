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

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "nptray/error.hpp"

namespace nptray {
namespace {

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

const OffsetObject kPreset = OffsetObject::explicit_values(0.05, 0.25, 0.15, 0.325);

TEST(Zoh, DoubleIntegrator) {
  Eigen::MatrixXd a(2, 2), b(2, 1);
  a << 0, 1, 0, 0;
  b << 0, 1;
  const double dt = 0.37;
  const auto [ad, bd] = discretize_zoh(a, b, dt);
  EXPECT_NEAR(ad(0, 0), 1, 1e-12);
  EXPECT_NEAR(ad(0, 1), dt, 1e-12);
  EXPECT_NEAR(ad(1, 0), 0, 1e-12);
  EXPECT_NEAR(ad(1, 1), 1, 1e-12);
  EXPECT_NEAR(bd(0), dt * dt / 2, 1e-12);
  EXPECT_NEAR(bd(1), dt, 1e-12);
}

TEST(Zoh, FiveChainClosedForm) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5), b = Eigen::MatrixXd::Zero(5, 1);
  for (int i = 0; i < 4; ++i) a(i, i + 1) = 1;
  b(4) = 1;
  const double dt = 0.02;
  const auto [ad, bd] = discretize_zoh(a, b, dt);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double expect = j >= i ? std::pow(dt, j - i) / factorial(j - i) : 0.0;
      EXPECT_NEAR(ad(i, j), expect, 1e-12);
    }
    EXPECT_NEAR(bd(i), std::pow(dt, 5 - i) / factorial(5 - i), 1e-12);
  }
}

TEST(Zoh, ScalarDecay) {
  const double lam = 3.0, dt = 0.1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, -lam);
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const auto [ad, bd] = discretize_zoh(a, b, dt);
  EXPECT_NEAR(ad(0, 0), std::exp(-lam * dt), 1e-14);
  EXPECT_NEAR(bd(0, 0), (1 - std::exp(-lam * dt)) / lam * 2.0, 1e-14);
}

TEST(Model, BlockPattern) {
  const Vec3 k(20, 15, 10);
  const SmootherModel m = build_model(k, 0.02, 10, SmootherConfig::default_w_x(), Mat3::Identity());
  // Desired chain is a pure shift.
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      EXPECT_EQ(m.a_dd(i, j), (j == i + 3) ? 1.0 : 0.0);
    }
  }
  EXPECT_EQ(m.b_dd(12, 0), 1.0);
  EXPECT_EQ(m.a_sd(0, 0), 20.0);
  EXPECT_EQ(m.a_sd(1, 4), 1.0);
  EXPECT_EQ(m.a_sd(8, 8), 10.0);
  EXPECT_EQ(m.a_sd(8, 11), 1.0);
  EXPECT_EQ(m.a_ss(4, 4), -15.0);
  // Discrete pair is the ZOH of the continuous pair.
  const auto [ad, bd] = discretize_zoh(m.a_c, m.b_c, 0.02);
  EXPECT_LT((ad - m.a).norm(), 1e-14);
  EXPECT_LT((bd - m.b).norm(), 1e-14);
}

TEST(Model, GainOffDecouples) {
  const SmootherModel m = build_model(Vec3::Zero(), 0.02, 3, SmootherConfig::default_w_x(), Mat3::Identity());
  EXPECT_EQ(m.a_ss.norm(), 0.0);
  EXPECT_EQ(m.a_sd.norm(), 3.0);  // three feed-forward identity blocks
}

TEST(Model, Spectrum) {
  const Vec3 k(20, 7, 3);
  const SmootherModel m = build_model(k, 0.02, 10, SmootherConfig::default_w_x(), Mat3::Identity());
  // Block triangular: spectrum is the union of the diagonal blocks'.
  Eigen::EigenSolver<Eigen::MatrixXd> es(m.a_ss);
  std::vector<double> ev;
  for (int i = 0; i < 9; ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.begin(), ev.end());
  const std::vector<double> expect{-20, -20, -20, -7, -7, -7, -3, -3, -3};
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(ev[i], expect[i], 1e-9);
  EXPECT_TRUE(m.a_c.topRightCorner(15, 9).isZero());
  Eigen::MatrixXd p = m.a_dd;
  for (int i = 0; i < 4; ++i) p = p * m.a_dd;
  EXPECT_TRUE(p.isZero());  // nilpotent: all eigenvalues zero
}

TEST(Model, RejectsBadWeights) {
  Mat9 w = SmootherConfig::default_w_x();
  w(0, 0) = -1;
  EXPECT_THROW(build_model(Vec3::Constant(20), 0.02, 10, w, Mat3::Identity()), ValidationError);
  EXPECT_THROW(build_model(Vec3::Constant(20), 0.02, 10, SmootherConfig::default_w_x(), Mat3::Zero()),
               ValidationError);
  EXPECT_THROW(build_model(Vec3::Constant(20), 0.0, 10, SmootherConfig::default_w_x(), Mat3::Identity()),
               ValidationError);
}

TEST(Condensed, OriginIsOptimal) {
  const SmootherModel m = build_model(Vec3::Constant(20), 0.02, 10, SmootherConfig::default_w_x(),
                                      1e-6 * Mat3::Identity());
  const CondensedQp qp = assemble_qp(m, StateVec::Zero(), ReferenceState{}, 41.7, StateBounds{});
  const QpSolution s = QpSolver().solve(qp.qp);
  ASSERT_EQ(s.status, QpStatus::kConverged);
  EXPECT_LT(qp.unscale(s.z).norm(), 1e-12);
}

TEST(Condensed, PredictionMatchesSimulation) {
  const SmootherModel m = build_model(Vec3(20, 10, 5), 0.02, 6, SmootherConfig::default_w_x(),
                                      Mat3::Identity());
  const CondensedBuilder cb(m, {});
  StateVec x = StateVec::LinSpaced(0.1, 2.4);
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(18, -3, 5);
  const Eigen::VectorXd pred = cb.phi() * x + cb.gamma() * u;
  for (int k = 0; k < 6; ++k) {
    x = m.a * x + m.b * u.segment<3>(3 * k);
    EXPECT_LT((pred.segment<24>(24 * k) - x).norm(), 1e-12 * (1 + x.norm()));
  }
}

// Dense least squares over u for N = 1 without constraints, built directly
// from one step of the discrete model.
TEST(Condensed, UnconstrainedMatchesNormalEquations) {
  const Mat3 wu = 1e-3 * Mat3::Identity();
  const SmootherModel m = build_model(Vec3::Constant(20), 0.02, 1, SmootherConfig::default_w_x(), wu);
  StateBounds huge{1e9, 1e9, 1e9, 1e12, 0};
  StateVec x0 = StateVec::Zero();
  x0.segment<3>(12) = Vec3(0.5, -0.2, 0.1);
  x0.segment<3>(6) = Vec3(0.1, 0, 0);
  ReferenceState ref{Vec3(0.2, 0.1, 0), Vec3(0.1, 0, 0), Vec3::Zero()};
  const CondensedQp qp = assemble_qp(m, x0, ref, 1e12, huge);
  const QpSolution s = QpSolver().solve(qp.qp);
  ASSERT_EQ(s.status, QpStatus::kConverged);
  const Eigen::VectorXd z = qp.unscale(s.z);

  // min (C(Ax0 + Bu) - r)' W (..) + u' Wu u
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(24, 24).bottomRows(9);
  Eigen::VectorXd r(9);
  r << ref.x, ref.v, ref.a;
  const Eigen::MatrixXd cb = c * m.b;
  const Eigen::MatrixXd lhs = cb.transpose() * m.w_x * cb + wu;
  const Eigen::VectorXd rhs = -cb.transpose() * m.w_x * (c * m.a * x0 - r);
  const Eigen::VectorXd u = lhs.ldlt().solve(rhs);
  EXPECT_LT((z.head<3>() - u).norm(), 1e-6 * (1 + u.norm()));
  EXPECT_LT(z.tail<4>().norm(), 1e-9);
}

TEST(Condensed, TightInputBoxClamps) {
  const SmootherModel m = build_model(Vec3::Constant(20), 0.02, 10, SmootherConfig::default_w_x(),
                                      1e-6 * Mat3::Identity());
  StateBounds b;
  b.u_max = 50.0;
  ReferenceState ref;
  ref.x = Vec3(0.2, 0, 0);
  const CondensedQp qp = assemble_qp(m, StateVec::Zero(), ref, 1e6, b);
  const QpSolution s = QpSolver().solve(qp.qp);
  ASSERT_EQ(s.status, QpStatus::kConverged);
  const Eigen::VectorXd z = qp.unscale(s.z);
  EXPECT_NEAR(z(0), 50.0, 1e-6);
  EXPECT_NEAR(z(1), 0.0, 1e-9);
  EXPECT_NEAR(z(2), 0.0, 1e-9);

  // One-axis grid search over the first input with the rest re-optimized
  // can only do worse than the solver.
  const double best = qp.qp.objective(s.z);
  for (double u0 : {-50.0, 0.0, 25.0, 49.0}) {
    QpProblem fixed = qp.qp;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(fixed.num_vars());
    row(0) = 1.0;
    fixed.A.conservativeResize(fixed.num_rows() + 2, Eigen::NoChange);
    fixed.b.conservativeResize(fixed.num_rows() + 2);
    fixed.A.row(fixed.A.rows() - 2) = row.transpose();
    fixed.A.row(fixed.A.rows() - 1) = -row.transpose();
    fixed.b(fixed.b.size() - 2) = u0 / qp.var_scale(0);
    fixed.b(fixed.b.size() - 1) = -u0 / qp.var_scale(0);
    const QpSolution g = QpSolver().solve(fixed);
    ASSERT_EQ(g.status, QpStatus::kConverged);
    EXPECT_GE(fixed.objective(g.z), best - 1e-9);
  }
}

TEST(Condensed, ShiftActiveMovesRowsForward) {
  const SmootherModel m = build_model(Vec3::Constant(20), 0.02, 3, SmootherConfig::default_w_x(),
                                      Mat3::Identity());
  const CondensedBuilder cb(m, {});
  const std::vector<int> in{5, 48 + 7, 96 + 1, 144, 146};
  const std::vector<int> out = cb.shift_active(in);
  EXPECT_EQ(out, (std::vector<int>{7, 48 + 1, 144, 146}));
}

SmootherConfig default_config() { return SmootherConfig{}; }

TEST(SmootherLoop, EquilibriumStaysPut) {
  Smoother sm(default_config(), kPreset);
  sm.reset(Vec3(0.1, 0.2, 0.3));
  ReferenceState ref;
  ref.x = Vec3(0.1, 0.2, 0.3);
  for (int k = 0; k < 50; ++k) {
    const Smoother::Step s = sm.step(ref);
    EXPECT_LT(s.u.norm(), 1e-9);
    EXPECT_EQ(s.desired.phi.angle, 0.0);
    EXPECT_FALSE(s.degraded);
  }
}

std::vector<Smoother::Step> run_cosine(Smoother& sm, int cycles, double period = 3.0) {
  std::vector<Smoother::Step> out;
  sm.reset(Vec3::Zero());
  for (int k = 0; k < cycles; ++k) {
    const double t = 0.02 * (k + 1);
    const double w = 2 * M_PI / period;
    ReferenceState ref;
    ref.x = Vec3(0.3 * (1 - std::cos(w * t)), 0.1 * std::sin(w * t), 0);
    ref.v = Vec3(0.3 * w * std::sin(w * t), 0.1 * w * std::cos(w * t), 0);
    ref.a = Vec3(0.3 * w * w * std::cos(w * t), -0.1 * w * w * std::sin(w * t), 0);
    out.push_back(sm.step(ref));
  }
  return out;
}

TEST(SmootherLoop, ConstraintsAndContinuity) {
  const SmootherConfig cfg = default_config();
  Smoother sm(cfg, kPreset);
  const auto steps = run_cosine(sm, 300);
  Vec3 prev_snap = Vec3::Zero();
  for (const auto& s : steps) {
    ASSERT_EQ(s.status, QpStatus::kConverged);
    EXPECT_LE(s.kkt_residual, 1e-6);
    EXPECT_LE(s.u.cwiseAbs().maxCoeff(), cfg.bounds.u_max);
    EXPECT_LE((s.desired.s - prev_snap).cwiseAbs().maxCoeff(), cfg.bounds.u_max * cfg.dt + 1e-9);
    prev_snap = s.desired.s;
    EXPECT_LE(s.desired.v.cwiseAbs().maxCoeff(), cfg.bounds.v_max + 1e-6);
    EXPECT_LE(s.desired.a.cwiseAbs().maxCoeff(), cfg.bounds.a_max + 1e-6);
    EXPECT_LE(s.desired.j.cwiseAbs().maxCoeff(), cfg.bounds.j_max + 1e-6);
  }
  // Snap box of each cycle holds at the next sample.
  for (size_t k = 1; k < steps.size(); ++k) {
    EXPECT_LE(steps[k].desired.s.cwiseAbs().maxCoeff(),
              steps[k].snap_bound / std::sqrt(3.0) + 1e-6);
  }
}

TEST(SmootherLoop, OverdemandUsesSlackNotFailure) {
  // 5.3 m/s^2 demanded against a 2.4 m/s^2 box: the slack absorbs it.
  Smoother sm(default_config(), kPreset);
  const auto steps = run_cosine(sm, 300, 1.5);
  double worst = 0;
  for (const auto& s : steps) {
    ASSERT_EQ(s.status, QpStatus::kConverged);
    EXPECT_LE(s.u.cwiseAbs().maxCoeff(), sm.config().bounds.u_max);
    worst = std::max(worst, s.max_slack);
  }
  EXPECT_GT(worst, 0.0);
}

TEST(SmootherLoop, Deterministic) {
  Smoother a(default_config(), kPreset), b(default_config(), kPreset);
  const auto sa = run_cosine(a, 100);
  const auto sb = run_cosine(b, 100);
  for (size_t k = 0; k < sa.size(); ++k) {
    EXPECT_EQ(sa[k].u, sb[k].u);
  }
}

TEST(SmootherLoop, ConstantReferenceConverges) {
  SmootherConfig cfg = default_config();
  cfg.bounds = StateBounds{1e3, 1e3, 1e4, 1e7, 0};
  cfg.k_ex = Vec3::Constant(100);
  Smoother sm(cfg, OffsetObject::explicit_values(1.0, 0.05, 1e3, 0.01));
  sm.reset(Vec3::Zero());
  ReferenceState ref;
  ref.x = Vec3(0.05, -0.03, 0.02);
  for (int k = 0; k < 4000; ++k) sm.step(ref);
  EXPECT_LT((sm.state().segment<3>(15) - ref.x).norm(), 1e-9);
}

TEST(SmootherLoop, WarmStartDoesNotChangeSolution) {
  const SmootherConfig cfg = default_config();
  Smoother sm(cfg, kPreset);
  sm.reset(Vec3::Zero());
  const SmootherModel& m = sm.model();
  const CondensedBuilder cb(m, cfg.slack);
  for (int k = 0; k < 120; ++k) {
    const double t = 0.02 * (k + 1);
    ReferenceState ref;
    ref.x = Vec3(0.3 * (1 - std::cos(2 * M_PI * t)), 0, 0);
    const StateVec before = sm.state();
    const Smoother::Step s = sm.step(ref);
    const double snap = s.snap_bound;
    StateBounds b = cfg.bounds;
    const CondensedQp qp = cb.build(before, ref, snap, b);
    const QpSolution cold = QpSolver().solve(qp.qp);
    ASSERT_EQ(cold.status, QpStatus::kConverged);
    EXPECT_LT((qp.unscale(cold.z).head<3>() - s.u).norm(), 1e-6 * (1 + s.u.norm()));
  }
}

}  // namespace
}  // namespace nptray
