#pragma once

#include <Eigen/Dense>

namespace monocert {

/// minimize cᵀx subject to A x ≤ b, x ≥ 0. Entries of b may be negative.
struct LinearProgram {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule. Throws
/// LPNumericalFailure on malformed input or when the pivot budget runs out.
[[nodiscard]] LpResult solve_lp(const LinearProgram& lp, double tol = 1e-10);

}  // namespace monocert
