#include "monocert/linear.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "monocert/random.hpp"
#include "monocert/simplex.hpp"

namespace monocert {

namespace {

Point to_point(const Eigen::VectorXd& v) { return Point(v.data(), v.data() + v.size()); }

}  // namespace

bool is_metzler(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && !(a(i, j) >= -MetzlerMatrix::kTol)) return false;
    }
  }
  return true;
}

MetzlerMatrix::MetzlerMatrix(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() == 0 || !is_metzler(a_)) {
    throw Error(ErrorCode::PreconditionViolated, "matrix is not square Metzler");
  }
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigenvalue iteration did not converge");
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Eigen::MatrixXd& a) { return spectral_abscissa(a) < -1e-9; }

std::optional<Eigen::VectorXd> find_positive_w(const MetzlerMatrix& m) {
  // w = 1 + u, u ≥ 0:  A u ≤ −1 − A·1
  const Eigen::MatrixXd& a = m.matrix();
  const Eigen::Index n = a.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  LinearProgram lp{a, -ones - a * ones, ones};
  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Infeasible) return std::nullopt;
  if (res.status != LpStatus::Optimal) throw Error(ErrorCode::LPNumericalFailure, "LP reported unbounded");
  const Eigen::VectorXd w = ones + res.x;
  const Eigen::VectorXd aw = a * w;
  const double slack = 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff() * w.maxCoeff());
  if (!w.allFinite() || (aw.array() > -1.0 + slack).any()) {
    throw Error(ErrorCode::LPNumericalFailure, "LP solution fails A w <= -1");
  }
  return w;
}

MaxSepLyap linear_max_sep_lyap(const MetzlerMatrix& a, const Eigen::VectorXd& w) {
  if (w.size() != a.size()) throw Error(ErrorCode::DimensionMismatch, "w does not match A");
  std::vector<LyapComponent> comps;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0)) throw Error(ErrorCode::PreconditionViolated, "w must be positive");
    comps.push_back(LyapComponent::linear(1.0 / w(i)));
  }
  return MaxSepLyap(std::move(comps), to_point(w));
}

Report check_d_stability_linear(const MetzlerMatrix& m, std::size_t trials, std::uint64_t seed) {
  const Eigen::MatrixXd& a = m.matrix();
  Report r("d_stability_linear", Verdict::Pass);
  r.set("trials", trials).set("seed", static_cast<std::int64_t>(seed));
  if (!is_hurwitz(a)) {
    r.set_verdict(Verdict::Fail);
    r.set("error", "precondition violated: A is not Hurwitz");
    r.set("spectral_abscissa", spectral_abscissa(a));
    return r;
  }
  std::uniform_real_distribution<double> expo(-3.0, 3.0);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t failures = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    auto rng = trial_rng(seed, k);
    Eigen::VectorXd delta(a.rows());
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = std::pow(10.0, expo(rng));
    const Eigen::MatrixXd da = delta.asDiagonal() * a;
    const double abscissa = spectral_abscissa(da);
    worst = std::max(worst, abscissa / delta.maxCoeff());
    if (!(abscissa < -1e-9)) {
      if (failures++ == 0) r.set("counterexample_delta", to_point(delta));
    }
  }
  r.set("failures", failures).set("worst_scaled_abscissa", worst);
  if (failures > 0) r.set_verdict(Verdict::Fail);
  return r;
}

Report check_linear_delay_robustness(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const DelayLaw& law,
                                     const InitialHistory& phi, const IntegratorConfig& cfg) {
  Report r("linear_delay_robustness", Verdict::Pass);
  r.set("law", law.describe());
  const bool b_nonneg = b.rows() == a.rows() && b.cols() == a.cols() && (b.array() >= 0.0).all();
  if (!is_metzler(a) || !b_nonneg || !is_hurwitz(a + b)) {
    r.set_verdict(Verdict::Fail);
    r.set("error", "precondition violated: need A Metzler, B >= 0, A + B Hurwitz");
    return r;
  }
  const DelayField g = DelayField::linear(a, b, law);
  const Trajectory tr = integrate_dde(g, phi, cfg);
  const bool converged = tr.termination == Termination::ConvergedToOrigin || tr.terminal_norm() < 1e-3;
  r.set("termination", to_string(tr.termination))
      .set("t_final", tr.t_front())
      .set("terminal_norm", tr.terminal_norm())
      .set("t_converged", tr.t_converged);
  if (!converged) r.set_verdict(Verdict::Fail);
  return r;
}

}  // namespace monocert
