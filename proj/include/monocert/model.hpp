#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "monocert/expr.hpp"

namespace monocert {

using Point = std::vector<double>;

inline constexpr double kOriginTol = 1e-12;
inline constexpr double kFdStep = 1e-6;

/// Evaluable autonomous field f: R^n_+ -> R^n with f(0) = 0.
class VectorField {
 public:
  using ComponentFn = std::function<double(std::size_t i, std::span<const double> x)>;
  using JacobianFn = std::function<double(std::size_t i, std::size_t j, std::span<const double> x)>;

  /// Throws OriginNotEquilibrium, InvalidVariableUse.
  [[nodiscard]] static VectorField from_system(const ExprSystem& sys);
  [[nodiscard]] static VectorField linear(const Eigen::MatrixXd& a);
  /// `smooth` records whether finite-difference Jacobians are trustworthy.
  [[nodiscard]] static VectorField from_function(std::size_t n, ComponentFn f,
                                                 std::optional<JacobianFn> jacobian = std::nullopt,
                                                 bool smooth = true);

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] double component(std::size_t i, std::span<const double> x) const { return f_(i, x); }
  void eval(std::span<const double> x, std::span<double> out) const;
  [[nodiscard]] Point operator()(std::span<const double> x) const;

  /// ∂f_i/∂x_j. Falls back to central differences (forward near x_j = 0).
  [[nodiscard]] double jacobian(std::size_t i, std::size_t j, std::span<const double> x) const;
  [[nodiscard]] Eigen::MatrixXd jacobian_matrix(std::span<const double> x) const;
  [[nodiscard]] bool has_analytic_jacobian() const noexcept { return jac_.has_value(); }
  [[nodiscard]] bool is_smooth() const noexcept { return smooth_; }
  /// Expression source when built from text.
  [[nodiscard]] const std::optional<ExprSystem>& source() const noexcept { return source_; }

 private:
  VectorField(std::size_t n, ComponentFn f, std::optional<JacobianFn> jac, bool smooth,
              std::optional<ExprSystem> source);
  void check_origin() const;

  std::size_t n_;
  ComponentFn f_;
  std::optional<JacobianFn> jac_;
  bool smooth_ = true;
  std::optional<ExprSystem> source_;
};

[[nodiscard]] double finite_difference(const std::function<double(std::span<const double>)>& fn,
                                       std::span<const double> x, std::size_t j, double h = kFdStep);

// ---------------------------------------------------------------------------

enum class DelayKind { Constant, Sinusoid, Proportional, Expression };

/// Sampling horizon for the empirical t - τ(t) -> ∞ check.
struct DelayCheckOptions {
  double horizon = 1e4;
  std::size_t samples = 100000;
};

/// Time-varying delay τ(t) with t - τ(t) -> ∞, checked on construction.
class DelayLaw {
 public:
  using CheckOptions = DelayCheckOptions;

  /// Throws InvalidDelayLaw (negative parameters), Assumption1Violated.
  [[nodiscard]] static DelayLaw zero();
  [[nodiscard]] static DelayLaw constant(double c);
  [[nodiscard]] static DelayLaw sinusoid(double a, double b, double omega);
  [[nodiscard]] static DelayLaw proportional(double gamma);
  [[nodiscard]] static DelayLaw expression(const Expr& tau, CheckOptions opts = {});

  /// `zero`, `const:c`, `sin:a,b,omega`, `prop:gamma`, `expr:<expression in t>`.
  [[nodiscard]] static DelayLaw parse(std::string_view spec);

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] DelayKind kind() const noexcept { return kind_; }
  /// -inf over the check horizon of t - τ(t), clamped at 0.
  [[nodiscard]] double tau_max() const noexcept { return tau_max_; }
  [[nodiscard]] bool is_zero() const noexcept;
  [[nodiscard]] const std::vector<double>& params() const noexcept { return params_; }
  [[nodiscard]] std::string describe() const;

 private:
  DelayLaw(DelayKind kind, std::vector<double> params, std::optional<Expr> tau);
  void check_assumption1(CheckOptions opts);

  DelayKind kind_;
  std::vector<double> params_;
  std::optional<Expr> expr_;
  double tau_max_ = 0.0;
};

/// Either one law shared by every delayed argument or an n×n table where
/// entry (i, j) delays y_j inside component i.
class DelaySchedule {
 public:
  DelaySchedule(DelayLaw shared);  // NOLINT(google-explicit-constructor)
  explicit DelaySchedule(std::vector<std::vector<DelayLaw>> per_pair);

  [[nodiscard]] bool heterogeneous() const noexcept { return !table_.empty(); }
  [[nodiscard]] const DelayLaw& law(std::size_t i, std::size_t j) const;
  [[nodiscard]] const DelayLaw& shared() const { return *shared_; }
  [[nodiscard]] double tau_max() const noexcept;
  /// Largest τ over every law at time t.
  [[nodiscard]] double max_delay(double t) const;
  [[nodiscard]] std::size_t size() const noexcept { return table_.size(); }

 private:
  std::optional<DelayLaw> shared_;
  std::vector<std::vector<DelayLaw>> table_;
};

/// g(x, y) for ẋ(t) = g(x(t), x(t - τ(t))).
class DelayField {
 public:
  using ComponentFn =
      std::function<double(std::size_t i, std::span<const double> x, std::span<const double> y)>;
  using JacobianFn = std::function<double(std::size_t i, std::size_t j, std::span<const double> x,
                                          std::span<const double> y)>;

  [[nodiscard]] static DelayField from_system(const ExprSystem& sys, DelaySchedule delays);
  [[nodiscard]] static DelayField linear(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         DelaySchedule delays);
  [[nodiscard]] static DelayField from_function(std::size_t n, ComponentFn g, DelaySchedule delays,
                                                std::optional<JacobianFn> jac_x = std::nullopt,
                                                std::optional<JacobianFn> jac_y = std::nullopt);

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] double component(std::size_t i, std::span<const double> x,
                                 std::span<const double> y) const {
    return g_(i, x, y);
  }
  void eval(std::span<const double> x, std::span<const double> y, std::span<double> out) const;
  [[nodiscard]] Point operator()(std::span<const double> x, std::span<const double> y) const;

  [[nodiscard]] double jacobian_x(std::size_t i, std::size_t j, std::span<const double> x,
                                  std::span<const double> y) const;
  [[nodiscard]] double jacobian_y(std::size_t i, std::size_t j, std::span<const double> x,
                                  std::span<const double> y) const;
  [[nodiscard]] bool has_analytic_jacobian() const noexcept { return jac_x_.has_value(); }

  /// f(x) := g(x, x).
  [[nodiscard]] VectorField induced() const;
  [[nodiscard]] const DelaySchedule& delays() const noexcept { return delays_; }
  [[nodiscard]] DelayField with_delays(DelaySchedule delays) const;

 private:
  DelayField(std::size_t n, ComponentFn g, DelaySchedule delays, std::optional<JacobianFn> jac_x,
             std::optional<JacobianFn> jac_y);

  std::size_t n_;
  ComponentFn g_;
  DelaySchedule delays_;
  std::optional<JacobianFn> jac_x_;
  std::optional<JacobianFn> jac_y_;
};

// ---------------------------------------------------------------------------

/// {x : 0 <= x <= upper}.
struct BoxSet {
  Point upper;

  explicit BoxSet(Point corner);
  [[nodiscard]] std::size_t dimension() const noexcept { return upper.size(); }
  [[nodiscard]] bool contains(std::span<const double> x, double tol = 0.0) const;
  /// Throws PreconditionViolated unless every corner entry is > 0.
  void require_positive() const;
};

/// Candidate path ρ: [0, s̄] -> R^n_+ with margins α.
class PathCandidate {
 public:
  static constexpr double kDefaultEps = 1e-6;

  /// Validates ρ(0) = 0, strict increase and dρ/ds > 0 on (0, s̄]. Throws
  /// PathValidationFailure or PathDomainError.
  PathCandidate(std::vector<Expr> rho, double sbar, std::vector<Expr> alpha, std::size_t grid = 1024);

  /// Empty `alpha` selects α_i(s) = eps·s.
  [[nodiscard]] static PathCandidate parse(const std::vector<std::string>& rho, double sbar,
                                           const std::vector<std::string>& alpha = {},
                                           double eps = kDefaultEps, std::size_t grid = 1024);

  [[nodiscard]] std::size_t dimension() const noexcept { return rho_.size(); }
  [[nodiscard]] double sbar() const noexcept { return sbar_; }
  [[nodiscard]] double rho(std::size_t i, double s) const;
  [[nodiscard]] double rho_derivative(std::size_t i, double s) const;
  [[nodiscard]] double alpha(std::size_t i, double s) const;
  [[nodiscard]] Point point(double s) const;
  [[nodiscard]] Point corner() const { return point(sbar_); }
  [[nodiscard]] const std::vector<Expr>& rho_exprs() const noexcept { return rho_; }
  [[nodiscard]] const std::vector<Expr>& alpha_exprs() const noexcept { return alpha_; }

 private:
  std::vector<Expr> rho_;
  std::vector<Expr> drho_;  // empty entries when not symbolically differentiable
  std::vector<bool> has_drho_;
  std::vector<Expr> alpha_;
  double sbar_;
};

/// Componentwise scaling ψ_i(x_i, y_i) used by the D-stability transform.
class ScalingPsi {
 public:
  /// Components may reference only x_i and y_i. Throws PsiValidationFailure.
  explicit ScalingPsi(std::vector<Expr> components);
  [[nodiscard]] static ScalingPsi parse(const std::vector<std::string>& sources);

  /// Samples ψ_i(x_i, 0) = 0 and strict increase in y_i over
  /// x_i ∈ [0, x_max_i], y_i ∈ [-y_max_i, y_max_i]. Throws PsiValidationFailure.
  void validate(std::span<const double> x_max, std::span<const double> y_max,
                std::size_t grid = 1024) const;

  [[nodiscard]] std::size_t dimension() const noexcept { return psi_.size(); }
  [[nodiscard]] double apply(std::size_t i, double x_i, double y_i) const;
  [[nodiscard]] const std::vector<Expr>& components() const noexcept { return psi_; }

 private:
  std::vector<Expr> psi_;
};

/// Initial history φ on [-τ_max, 0].
class InitialHistory {
 public:
  [[nodiscard]] static InitialHistory constant(Point value);
  /// Component expressions in t. `domain` is the length of [-domain, 0].
  [[nodiscard]] static InitialHistory expression(std::vector<Expr> components, double domain);
  /// Piecewise linear through (t_k, x_k); times ascending and ending at 0.
  [[nodiscard]] static InitialHistory samples(std::vector<double> times, std::vector<Point> values);

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  /// Length of the domain; infinite for constants.
  [[nodiscard]] double domain() const noexcept { return domain_; }
  [[nodiscard]] double value(std::size_t i, double t) const;
  [[nodiscard]] Point at(double t) const;
  /// Componentwise max over the domain (sampled for expressions).
  [[nodiscard]] Point upper_bound() const;

 private:
  enum class Kind { Constant, Expression, Samples };
  InitialHistory(Kind kind, std::size_t n, double domain);
  void check_nonnegative() const;

  Kind kind_;
  std::size_t n_;
  double domain_;
  Point constant_;
  std::vector<Expr> exprs_;
  std::vector<double> times_;
  std::vector<Point> values_;
};

}  // namespace monocert
