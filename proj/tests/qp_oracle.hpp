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

#include <limits>
#include <random>

#include <Eigen/Dense>

#include "nptray/qp.hpp"

namespace nptray::testing {

/// Exhaustive active-set enumeration: every subset W of rows, solve the
/// equality-constrained KKT system, keep primal- and dual-feasible points,
/// return the one of least objective. Exponential; m <= 12 only.
inline Eigen::VectorXd brute_force_qp(const QpProblem& p) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> w;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) w.push_back(i);
    }
    const int q = static_cast<int>(w.size());
    if (q > n) continue;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + q, n + q);
    Eigen::VectorXd rhs(n + q);
    k.topLeftCorner(n, n) = p.H;
    rhs.head(n) = -p.f;
    for (int j = 0; j < q; ++j) {
      k.block(0, n + j, n, 1) = p.A.row(w[j]).transpose();
      k.block(n + j, 0, 1, n) = p.A.row(w[j]);
      rhs(n + j) = p.b(w[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    if (lu.rank() < n + q) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    if (((p.A * z - p.b).array() > 1e-9).any()) continue;
    if ((sol.tail(q).array() < -1e-9).any()) continue;
    const double obj = p.objective(z);
    if (obj < best) {
      best = obj;
      best_z = z;
    }
  }
  return best_z;
}

/// Random strictly convex problem with a feasible interior (z = z_feas).
inline QpProblem random_qp(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> nd(0.0, 1.0);
  QpProblem p;
  Eigen::MatrixXd m0(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m0(i, j) = nd(rng);
  p.H = m0 * m0.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  p.f.resize(n);
  for (int i = 0; i < n; ++i) p.f(i) = 3.0 * nd(rng);
  p.A.resize(m, n);
  Eigen::VectorXd zf(n);
  for (int i = 0; i < n; ++i) zf(i) = 0.3 * nd(rng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p.A(i, j) = nd(rng);
  p.b = p.A * zf + Eigen::VectorXd::Constant(m, 0.5);
  return p;
}

}  // namespace nptray::testing
