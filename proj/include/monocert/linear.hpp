#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "monocert/lyapunov.hpp"
#include "monocert/report.hpp"

namespace monocert {

/// Square matrix whose off-diagonal entries are >= −1e-12.
class MetzlerMatrix {
 public:
  static constexpr double kTol = 1e-12;

  /// Throws PreconditionViolated when A is not square or not Metzler.
  explicit MetzlerMatrix(Eigen::MatrixXd a);

  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return a_.rows(); }

 private:
  Eigen::MatrixXd a_;
};

[[nodiscard]] bool is_metzler(const Eigen::MatrixXd& a);
/// max Re λ < −1e-9. Throws EigenFailure.
[[nodiscard]] bool is_hurwitz(const Eigen::MatrixXd& a);
[[nodiscard]] double spectral_abscissa(const Eigen::MatrixXd& a);

/// w ≥ 1 with A w ≤ −1, or nullopt when no such w exists.
/// Throws LPNumericalFailure when the LP answer fails verification.
[[nodiscard]] std::optional<Eigen::VectorXd> find_positive_w(const MetzlerMatrix& a);

/// V(x) = max_i x_i / w_i on the box w.
[[nodiscard]] MaxSepLyap linear_max_sep_lyap(const MetzlerMatrix& a, const Eigen::VectorXd& w);

/// Random diagonal Δ, entries log-uniform in [1e-3, 1e3]; every ΔA must be
/// Hurwitz.
[[nodiscard]] Report check_d_stability_linear(const MetzlerMatrix& a, std::size_t trials, std::uint64_t seed);

/// Integrates ẋ = A x + B x(t − τ(t)) from φ and asserts convergence.
[[nodiscard]] Report check_linear_delay_robustness(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                   const DelayLaw& law, const InitialHistory& phi,
                                                   const IntegratorConfig& cfg = {});

}  // namespace monocert
