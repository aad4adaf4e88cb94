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

#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace nptray {

/// minimize 1/2 z'Hz + f'z  subject to  A z <= b.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  int num_vars() const { return static_cast<int>(f.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  double objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + f.dot(z); }
};

enum class QpStatus { kConverged, kIterationCap, kNumericFailure, kInfeasible };

std::string_view to_string(QpStatus s);

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd lambda;   ///< one multiplier per row, zero when inactive
  std::vector<int> active;  ///< rows held at equality
  QpStatus status = QpStatus::kNumericFailure;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  ///< filled when recording is on
};

/// Largest of stationarity, primal infeasibility, complementarity and dual
/// infeasibility, all in the infinity norm.
double kkt_residual(const QpProblem& p, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& lambda);

struct QpOptions {
  int max_iterations = 200;
  double regularization = 1e-9;
  double feasibility_tol = 1e-9;
  double kkt_tol = 1e-6;
  bool record_objective = false;
};

/// Dense dual active-set solver (Goldfarb-Idnani). Starts from the
/// unconstrained minimizer, or from a warm active set, and adds the most
/// violated row each iteration; the iterate objective never decreases.
/// Ties on violation go to the lowest row index.
class QpSolver {
 public:
  explicit QpSolver(QpOptions options = {}) : opt_(options) {}

  QpSolution solve(const QpProblem& p, const std::vector<int>* warm_active = nullptr);

  const QpOptions& options() const { return opt_; }

 private:
  bool factor_active(const Eigen::MatrixXd& A);
  void project(const Eigen::VectorXd& a_tilde, Eigen::VectorXd& null_part,
               Eigen::VectorXd& dual_dir) const;
  void polish(const QpProblem& p, QpSolution& s) const;

  QpOptions opt_;
  Eigen::MatrixXd L_;  // Cholesky factor of the regularized H
  std::vector<int> active_;
  Eigen::MatrixXd q_;   // orthonormal basis of L^-1 N, full n x n
  Eigen::MatrixXd r_;   // q x q upper triangle
};

}  // namespace nptray
