#pragma once

#include <cstdint>
#include <optional>

#include "monocert/integrators.hpp"
#include "monocert/lyapunov.hpp"
#include "monocert/model.hpp"
#include "monocert/report.hpp"

namespace monocert {

struct CertificateResult {
  Verdict status = Verdict::Inconclusive;
  /// ROA estimate {0 <= x <= box}; set only when certified.
  std::optional<Point> box;
  /// V_i = ρ_i⁻¹ for path certificates.
  std::optional<MaxSepLyap> lyap;
  Report report{"certificate", Verdict::Inconclusive};
};

/// f_i(ρ(s)) <= −α_i(s) + 1e-12 on `grid` samples of [0, s̄]. Throws
/// PathDomainError when f cannot be evaluated along the path.
[[nodiscard]] CertificateResult certify_path(const VectorField& f, const PathCandidate& path,
                                             std::size_t grid = 2048);

/// f(w) < 0 plus observed convergence of x(t, w). Without convergence the
/// result is INCONCLUSIVE, never CERTIFIED.
[[nodiscard]] CertificateResult certify_by_w(const VectorField& f, std::span<const double> w,
                                             const IntegratorConfig& cfg);

struct SearchOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::size_t descent_iterations = 60;
  std::size_t bisection_steps = 40;
  IntegratorConfig integrator{};
};

struct SearchResult {
  std::optional<Point> w;
  Report report{"search_w", Verdict::Fail};
};

/// Random sampling and coordinate descent for f(w) < 0 inside the box, then
/// bisection on the scale along the best direction. The winner must pass
/// certify_by_w.
[[nodiscard]] SearchResult search_w(const VectorField& f, const BoxSet& box, const SearchOptions& opts = {});

struct PsiTransform {
  VectorField field;
  /// Kamke check of the composed field on the box.
  Report kamke;
};

/// h(x) = ψ(x, f(x)). ψ is validated on the box with y ranging over the
/// sampled magnitude of f there. Throws PsiValidationFailure.
[[nodiscard]] PsiTransform apply_psi_transform(const VectorField& f, const ScalingPsi& psi, const BoxSet& box);

/// Closed-form inverse of a path component in the variable x_{index+1},
/// for compositions of s, affine maps, powers, sqrt, exp and ln.
[[nodiscard]] std::optional<Expr> invert_path_component(const Expr& rho, std::size_t index);

}  // namespace monocert
