#include "monocert/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "monocert/error.hpp"

namespace monocert {

namespace {

// Tableau rows 0..m-1 are constraints, row m holds reduced costs with -z in
// the last column.
class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows) {}

  Eigen::MatrixXd& t() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
    ++pivots;
  }

  // Loads cost vector over all columns and prices out the basis.
  void set_costs(const Eigen::VectorXd& cost) {
    t_.row(rows()).setZero();
    t_.row(rows()).head(cols()) = cost.transpose();
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(rows()) -= cb * t_.row(i);
    }
  }

  // Bland's rule; columns >= allowed are never entered.
  LpStatus optimize(Eigen::Index allowed, double tol, std::size_t budget) {
    for (std::size_t it = 0; it < budget; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(rows(), j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= tol) continue;
        const double ratio = t_(i, cols()) / a;
        const auto bi = basis_[static_cast<std::size_t>(i)];
        if (leave < 0 || ratio < best - tol ||
            (std::abs(ratio - best) <= tol && bi < basis_[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::LPNumericalFailure, "simplex pivot budget exhausted");
  }

  std::size_t pivots = 0;

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const Eigen::Index m = lp.a.rows();
  const Eigen::Index n = lp.a.cols();
  if (lp.b.size() != m || lp.c.size() != n) {
    throw Error(ErrorCode::LPNumericalFailure, "inconsistent LP dimensions");
  }
  if (!lp.a.allFinite() || !lp.b.allFinite() || !lp.c.allFinite()) {
    throw Error(ErrorCode::LPNumericalFailure, "non-finite LP data");
  }

  // Columns: x (n), slack/surplus (m), artificial (one per negative row).
  std::vector<Eigen::Index> art_rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lp.b(i) < 0.0) art_rows.push_back(i);
  }
  const Eigen::Index n_art = static_cast<Eigen::Index>(art_rows.size());
  const Eigen::Index n_cols = n + m + n_art;
  Tableau tab(m, n_cols);
  auto& t = tab.t();
  Eigen::Index next_art = n + m;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = lp.b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * lp.a.row(i);
    t(i, n + i) = sign;
    t(i, n_cols) = sign * lp.b(i);
    if (sign < 0.0) {
      t(i, next_art) = 1.0;
      tab.basis()[static_cast<std::size_t>(i)] = next_art++;
    } else {
      tab.basis()[static_cast<std::size_t>(i)] = n + i;
    }
  }

  const std::size_t budget = 50 * static_cast<std::size_t>(m + n_cols + 1);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) scale = std::max(scale, std::abs(lp.b(i)));

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_cols);
    phase1.tail(n_art).setOnes();
    tab.set_costs(phase1);
    if (tab.optimize(n_cols, tol, budget) != LpStatus::Optimal) {
      throw Error(ErrorCode::LPNumericalFailure, "phase one did not terminate at an optimum");
    }
    const double infeas = -t(m, n_cols);
    if (infeas > 1e-9 * scale) {
      LpResult r;
      r.status = LpStatus::Infeasible;
      r.pivots = tab.pivots;
      return r;
    }
    // Drive remaining artificials out of the basis; rows that cannot pivot
    // are redundant.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < n + m) continue;
      for (Eigen::Index j = 0; j < n + m; ++j) {
        if (std::abs(t(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n_cols);
  phase2.head(n) = lp.c;
  tab.set_costs(phase2);
  const LpStatus st = tab.optimize(n + m, tol, budget);
  LpResult r;
  r.status = st;
  r.pivots = tab.pivots;
  if (st != LpStatus::Optimal) return r;
  r.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = tab.basis()[static_cast<std::size_t>(i)];
    if (j < n) r.x(j) = std::max(0.0, t(i, n_cols));
  }
  r.objective = lp.c.dot(r.x);
  return r;
}

}  // namespace monocert
