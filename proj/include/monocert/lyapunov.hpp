#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "monocert/integrators.hpp"
#include "monocert/interpolation.hpp"
#include "monocert/model.hpp"
#include "monocert/report.hpp"

namespace monocert {

/// One scalar class-K component V_i of a max-separable function.
class LyapComponent {
 public:
  enum class Kind { Linear, Expression, PathInverse, Tabulated };

  /// V(x) = slope·x.
  [[nodiscard]] static LyapComponent linear(double slope);
  /// V(x) given as an expression in x_{index+1} only.
  [[nodiscard]] static LyapComponent expression(const Expr& v, std::size_t index);
  /// V = ρ_index⁻¹, evaluated by bisection on [0, s̄]; linear beyond s̄.
  [[nodiscard]] static LyapComponent path_inverse(std::shared_ptr<const PathCandidate> path,
                                                  std::size_t index);
  /// V = exp(-T(x)) on [cutoff, ∞), continued by the chord through the
  /// origin below the cutoff.
  [[nodiscard]] static LyapComponent tabulated(MonotoneCubic t_of_x, double cutoff);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double value(double x) const;
  /// Throws NondifferentiablePoint exactly at a tabulated cutoff whose one
  /// sided slopes differ.
  [[nodiscard]] double derivative(double x) const;
  /// x with V(x) = v, by bisection where no closed form exists.
  [[nodiscard]] double inverse(double v) const;
  /// True where a tabulated component is not backed by table data.
  [[nodiscard]] bool extrapolated(double x) const;
  [[nodiscard]] double cutoff() const noexcept { return cutoff_; }
  [[nodiscard]] std::string describe(std::size_t index) const;

 private:
  LyapComponent() = default;
  [[nodiscard]] double table_value(double x) const;
  [[nodiscard]] double table_derivative(double x) const;

  Kind kind_ = Kind::Linear;
  double slope_ = 1.0;
  Expr expr_ = Expr::number(0);
  Expr dexpr_ = Expr::number(0);
  std::size_t index_ = 0;
  std::shared_ptr<const PathCandidate> path_;
  MonotoneCubic table_;
  double cutoff_ = 0.0;
};

/// V(x) = max_i V_i(x_i) on a working box.
class MaxSepLyap {
 public:
  static constexpr double kTieTol = 1e-9;

  MaxSepLyap(std::vector<LyapComponent> components, Point box);

  [[nodiscard]] std::size_t dimension() const noexcept { return components_.size(); }
  [[nodiscard]] const LyapComponent& component(std::size_t i) const { return components_.at(i); }
  [[nodiscard]] const Point& box() const noexcept { return box_; }

  [[nodiscard]] double value(std::span<const double> x) const;
  /// J(x) = {j : V(x) − V_j(x_j) ≤ tie·(1 + V(x))}.
  [[nodiscard]] std::vector<std::size_t> active_set(std::span<const double> x, double tie = kTieTol) const;
  [[nodiscard]] bool extrapolated(std::span<const double> x) const;
  /// Class-K sandwich: ν₁(r) ≤ V_i(r) ≤ ν₂(r) for every i.
  [[nodiscard]] double envelope_lower(double r) const;
  [[nodiscard]] double envelope_upper(double r) const;
  [[nodiscard]] std::string describe() const;

  /// `i,x_i,V_i,dV_i` with `samples` evenly spaced points per component.
  void write_csv(std::ostream& os, std::size_t samples = 257) const;

 private:
  std::vector<LyapComponent> components_;
  Point box_;
};

/// D⁺V(x) = max_{j ∈ J(x)} V_j'(x_j)·f_j(x).
[[nodiscard]] double dini_derivative(const MaxSepLyap& v, const VectorField& f, std::span<const double> x,
                                     double tie = MaxSepLyap::kTieTol);

/// Forward difference (V(x + h f(x)) − V(x))/h, Richardson-extrapolated
/// over h and h/2.
[[nodiscard]] double dini_forward_estimate(const MaxSepLyap& v, const VectorField& f,
                                           std::span<const double> x, double h = 1e-6);

struct Construction {
  MaxSepLyap lyap;
  Trajectory omega;
  /// Per-component lower end of the table; below it V_i is extrapolated.
  Point cutoff;
};

/// V_i = exp(−T_i) with T_i = ω_i⁻¹ for the trajectory ω from w. Throws
/// NotInOmega, NoConvergence, NonmonotoneComponent.
[[nodiscard]] Construction construct_from_trajectory(const VectorField& f, std::span<const double> w,
                                                     const IntegratorConfig& cfg);

struct DecreaseReport {
  Verdict status = Verdict::Fail;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// Sampled point with the largest D⁺V/V.
  Point worst_point;
  double worst_ratio = 0.0;
  /// min over non-extrapolated points of −D⁺V/V.
  double min_decay_ratio = 0.0;
  std::size_t extrapolated_points = 0;
  /// μ̂ on equal-width V-level bins; NaN marks an empty bin.
  std::vector<double> level_edges;
  std::vector<double> mu_hat;

  [[nodiscard]] Report to_report() const;
};

/// Grid sweep of D⁺V(x) < −margin·V(x) over x ≠ 0 in the box.
[[nodiscard]] DecreaseReport verify_decrease(const MaxSepLyap& v, const VectorField& f, const BoxSet& box,
                                             std::size_t grid = 64, double margin = 1e-9);

/// Points of a regular grid over [0, upper]; the per-axis count shrinks so
/// the total stays within `cap`.
[[nodiscard]] std::vector<Point> box_grid(std::span<const double> upper, std::size_t per_axis,
                                          std::size_t cap = 1'000'000);

}  // namespace monocert
