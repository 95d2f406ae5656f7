#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "monocert/certificates.hpp"
#include "monocert/integrators.hpp"
#include "monocert/model.hpp"
#include "monocert/report.hpp"

namespace monocert {

/// δ_λ(x) = (λ^{r_1} x_1, ..., λ^{r_n} x_n) together with a degree p.
struct Dilation {
  Point r;
  double p = 0.0;

  /// Throws PreconditionViolated unless every r_i > 0 and p >= 0.
  Dilation(Point weights, double degree);
  [[nodiscard]] static Dilation standard(std::size_t n, double degree) { return {Point(n, 1.0), degree}; }

  [[nodiscard]] std::size_t dimension() const noexcept { return r.size(); }
  [[nodiscard]] Point apply(double lambda, std::span<const double> x) const;
  [[nodiscard]] double r_max() const;
};

struct HomogeneityOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  double rel_tol = 1e-9;
};

/// f(δ_λ x) = λ^p δ_λ f(x) for random x in the box and λ ∈ [0.1, 10].
[[nodiscard]] Report check_homogeneous(const VectorField& f, const Dilation& dil, const BoxSet& box,
                                       const HomogeneityOptions& opts = {});

struct DegreeFit {
  double p = 0.0;
  /// Worst relative residual of the identity at the fitted degree.
  double residual = 0.0;
};

/// Best degree in [p_min, p_max] for the weights r, from λ^p ratios.
[[nodiscard]] DegreeFit infer_degree(const VectorField& f, const Point& r, const BoxSet& box, double p_min,
                                     double p_max, const HomogeneityOptions& opts = {});

/// f(λx) <= λ^p f(x) with slack rel_tol·(1 + |λ^p f(x)|), λ ∈ [1, 10].
[[nodiscard]] Report check_sub_homogeneous(const VectorField& f, double p, const BoxSet& box,
                                           const HomogeneityOptions& opts = {});

/// ρ_i(s) = w_i s^{r_i/r_max}, α_i(s) = -s^{(p + r_i)/r_max} f_i(w), with α
/// shrunk by a factor 1 - 1e-9 to absorb rounding. Throws NegativityFailed.
[[nodiscard]] PathCandidate homogeneous_path(const VectorField& f, const Dilation& dil, std::span<const double> w,
                                             double sbar);

/// Values on a uniform grid over [0, upper] with multilinear interpolation.
/// Queries are clamped to the box.
class GridTable {
 public:
  GridTable(Point upper, std::size_t per_axis);

  [[nodiscard]] std::size_t dimension() const noexcept { return upper_.size(); }
  [[nodiscard]] std::size_t per_axis() const noexcept { return m_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] Point node(std::size_t flat) const;
  [[nodiscard]] double& operator[](std::size_t flat) { return values_[flat]; }
  [[nodiscard]] double operator[](std::size_t flat) const { return values_[flat]; }
  [[nodiscard]] double interpolate(std::span<const double> x) const;
  /// Partial derivative of the interpolant along `axis`, taken on the cell
  /// to the right of a node and zero outside the box.
  [[nodiscard]] double partial(std::span<const double> x, std::size_t axis) const;
  /// Running maximum along `axis`.
  void prefix_max(std::size_t axis);

 private:
  double blend(std::span<const double> x, std::optional<std::size_t> slope_axis) const;

  Point upper_;
  std::size_t m_;
  std::vector<std::size_t> stride_;
  std::vector<double> values_;
};

/// ḡ_i(x, y) = H_i(x) + D_i(y) with H_i(x) = sup{h_i(z) : 0 <= z <= x, z_i = x_i}
/// and D_i(y) = sup{d_i(z) : 0 <= z <= y}, both maximised over grid nodes.
struct ComparisonField {
  DelayField field;
  std::shared_ptr<const std::vector<GridTable>> h_sup;
  std::shared_ptr<const std::vector<GridTable>> d_sup;

  /// `i,x1..xn,H_i,D_i` for every grid node.
  void write_csv(std::ostream& os) const;
};

/// Checks items 1 and 2 of the positivity assumption on the grid (h_i >= 0
/// on the face x_i = 0, d >= 0) and tabulates ḡ. Throws Assumption3Violated.
[[nodiscard]] ComparisonField comparison_field_bound(const VectorField& h, const VectorField& d, const BoxSet& box,
                                                     std::size_t grid = 32, DelaySchedule delays = DelayLaw::zero());

struct NonMonotoneOptions {
  std::size_t grid = 32;
  SearchOptions search{};
  IntegratorConfig integrator{};
  /// Runs ending above this norm count as not converged.
  double norm_tol = 1e-3;
};

/// Validates all four items (item 4 by grid search for a strictly dominating
/// index), certifies ḡ without delay through search_w, then simulates
/// g = h + d and ḡ under every law from φ ≡ w and checks positivity,
/// domination and convergence. Throws Assumption3Violated, CertificationFailed.
[[nodiscard]] Report certify_nonmonotone_positive(const VectorField& h, const VectorField& d, double p,
                                                  const BoxSet& box, const std::vector<DelayLaw>& laws,
                                                  const NonMonotoneOptions& opts = {});

}  // namespace monocert
