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


#include "nptray/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

namespace nptray {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this the new normal is treated as dependent on the active set.
constexpr double kDependence = 1e-10;

}  // namespace

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kConverged: return "converged";
    case QpStatus::kIterationCap: return "iteration-cap";
    case QpStatus::kNumericFailure: return "numeric-failure";
    case QpStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

double kkt_residual(const QpProblem& p, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& lambda) {
  double res = (p.H * z + p.f + p.A.transpose() * lambda).lpNorm<Eigen::Infinity>();
  for (int i = 0; i < p.num_rows(); ++i) {
    const double slack = p.A.row(i).dot(z) - p.b(i);
    res = std::max(res, std::max(slack, 0.0));
    res = std::max(res, std::abs(lambda(i) * slack));
    res = std::max(res, std::max(-lambda(i), 0.0));
  }
  return res;
}

bool QpSolver::factor_active(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(L_.rows());
  const int q = static_cast<int>(active_.size());
  if (q == 0) {
    q_ = Eigen::MatrixXd::Identity(n, n);
    r_.resize(0, 0);
    return true;
  }
  Eigen::MatrixXd nt(n, q);
  for (int k = 0; k < q; ++k) nt.col(k) = A.row(active_[k]).transpose();
  L_.triangularView<Eigen::Lower>().solveInPlace(nt);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(nt);
  q_ = qr.householderQ();
  r_ = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  return r_.diagonal().cwiseAbs().minCoeff() > kDependence;
}

// Splits L^-1 a into the part orthogonal to the active normals and the
// multiplier change that keeps the active rows at equality.
void QpSolver::project(const Eigen::VectorXd& a_tilde, Eigen::VectorXd& null_part,
                       Eigen::VectorXd& dual_dir) const {
  const int q = static_cast<int>(active_.size());
  const Eigen::VectorXd c = q_.transpose() * a_tilde;
  null_part = q_.rightCols(q_.cols() - q) * c.tail(c.size() - q);
  if (q > 0) {
    dual_dir = r_.triangularView<Eigen::Upper>().solve(c.head(q));
  } else {
    dual_dir.resize(0);
  }
}

QpSolution QpSolver::solve(const QpProblem& p, const std::vector<int>* warm_active) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  QpSolution s;
  s.lambda = Eigen::VectorXd::Zero(m);

  const Eigen::MatrixXd hr = p.H + opt_.regularization * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(hr);
  if (llt.info() != Eigen::Success) {
    s.z = Eigen::VectorXd::Zero(n);
    s.status = QpStatus::kNumericFailure;
    return s;
  }
  L_ = llt.matrixL();
  const auto solve_h = [&](const Eigen::VectorXd& v) { return llt.solve(v).eval(); };

  Eigen::VectorXd z = -solve_h(p.f);
  Eigen::VectorXd lam_act;  // multipliers of active_, same order
  active_.clear();
  factor_active(p.A);

  Eigen::VectorXd row_norm(m);
  for (int i = 0; i < m; ++i) row_norm(i) = std::max(p.A.row(i).norm(), 1e-300);

  // Warm start: equality-constrained minimizer over an independent subset of
  // the guess, then drop rows whose multipliers are negative.
  if (warm_active != nullptr && !warm_active->empty()) {
    for (int idx : *warm_active) {
      if (idx < 0 || idx >= m) continue;
      if (std::find(active_.begin(), active_.end(), idx) != active_.end()) continue;
      active_.push_back(idx);
      if (!factor_active(p.A) || static_cast<int>(active_.size()) > n) {
        active_.pop_back();
        factor_active(p.A);
      }
    }
    while (!active_.empty()) {
      const int q = static_cast<int>(active_.size());
      Eigen::MatrixXd nmat(n, q);
      Eigen::VectorXd bw(q);
      for (int k = 0; k < q; ++k) {
        nmat.col(k) = p.A.row(active_[k]).transpose();
        bw(k) = p.b(active_[k]);
      }
      // lambda = (N'H^-1N)^-1 (N'H^-1(-f) - b);  z = -H^-1(f + N lambda)
      const Eigen::MatrixXd hin = llt.solve(nmat);
      const Eigen::MatrixXd schur = nmat.transpose() * hin;
      const Eigen::VectorXd z0 = -solve_h(p.f);
      lam_act = schur.ldlt().solve(nmat.transpose() * z0 - bw);
      z = z0 - hin * lam_act;
      Eigen::Index worst;
      if (lam_act.minCoeff(&worst) >= 0.0) break;
      active_.erase(active_.begin() + worst);
    }
    factor_active(p.A);
    if (active_.empty()) z = -solve_h(p.f);
  }

  if (opt_.record_objective) s.objective_trace.push_back(p.objective(z));

  Eigen::VectorXd d, r;
  bool capped = false;
  while (true) {
    // Most violated row by normalized violation.
    int pick = -1;
    double worst = opt_.feasibility_tol;
    for (int i = 0; i < m; ++i) {
      const double v = (p.A.row(i).dot(z) - p.b(i)) / row_norm(i);
      if (v > worst) {
        worst = v;
        pick = i;
      }
    }
    if (pick < 0) break;
    if (std::find(active_.begin(), active_.end(), pick) != active_.end()) break;

    double lam_new = 0.0;
    const Eigen::VectorXd a = p.A.row(pick).transpose();
    bool added = false;
    while (!added) {
      if (s.iterations >= opt_.max_iterations) {
        capped = true;
        break;
      }
      ++s.iterations;
      Eigen::VectorXd a_tilde = a;
      L_.triangularView<Eigen::Lower>().solveInPlace(a_tilde);
      project(a_tilde, d, r);
      const double curvature = d.squaredNorm();
      const bool dependent = curvature <= kDependence * kDependence * a_tilde.squaredNorm();

      double t_full = kInf;
      if (!dependent) {
        t_full = (a.dot(z) - p.b(pick)) / curvature;
      }
      double t_part = kInf;
      int drop = -1;
      for (int k = 0; k < r.size(); ++k) {
        if (r(k) > 0) {
          const double t = lam_act(k) / r(k);
          if (t < t_part) {
            t_part = t;
            drop = k;
          }
        }
      }
      if (t_full == kInf && t_part == kInf) {
        s.status = QpStatus::kInfeasible;
        s.z = z;
        return s;
      }
      const double t = std::min(t_full, t_part);
      if (!dependent) {
        Eigen::VectorXd step = d;
        L_.transpose().triangularView<Eigen::Upper>().solveInPlace(step);
        z -= t * step;
      }
      if (r.size() > 0) lam_act -= t * r;
      lam_new += t;
      if (t_full <= t_part) {
        active_.push_back(pick);
        lam_act.conservativeResize(active_.size());
        lam_act(lam_act.size() - 1) = lam_new;
        factor_active(p.A);
        added = true;
      } else {
        active_.erase(active_.begin() + drop);
        for (int k = drop; k + 1 < lam_act.size(); ++k) lam_act(k) = lam_act(k + 1);
        lam_act.conservativeResize(lam_act.size() - 1);
        factor_active(p.A);
      }
      if (opt_.record_objective) s.objective_trace.push_back(p.objective(z));
    }
    if (capped) break;
  }

  s.z = z;
  s.active = active_;
  for (size_t k = 0; k < active_.size(); ++k) s.lambda(active_[k]) = lam_act(k);
  if (!capped) polish(p, s);
  s.kkt_residual = kkt_residual(p, s.z, s.lambda);
  if (capped) {
    s.status = QpStatus::kIterationCap;
  } else {
    s.status = (s.kkt_residual <= opt_.kkt_tol && s.z.allFinite())
                   ? QpStatus::kConverged
                   : QpStatus::kNumericFailure;
  }
  return s;
}

// Re-solves the KKT system on the final active set against the
// unregularized Hessian; kept only when it does not raise the residual.
void QpSolver::polish(const QpProblem& p, QpSolution& s) const {
  const int n = p.num_vars();
  const int q = static_cast<int>(s.active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + q, n + q);
  Eigen::VectorXd rhs(n + q);
  kkt.topLeftCorner(n, n) = p.H;
  rhs.head(n) = -p.f;
  for (int k = 0; k < q; ++k) {
    kkt.block(0, n + k, n, 1) = p.A.row(s.active[k]).transpose();
    kkt.block(n + k, 0, 1, n) = p.A.row(s.active[k]);
    rhs(n + k) = p.b(s.active[k]);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::VectorXd sol = lu.solve(rhs);
  for (int pass = 0; pass < 3; ++pass) sol += lu.solve(rhs - kkt * sol);
  if (!sol.allFinite()) return;
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(p.num_rows());
  for (int k = 0; k < q; ++k) lam(s.active[k]) = sol(n + k);
  const Eigen::VectorXd z = sol.head(n);
  if (kkt_residual(p, z, lam) <= kkt_residual(p, s.z, s.lambda)) {
    s.z = z;
    s.lambda = lam;
  }
}

}  // namespace nptray
