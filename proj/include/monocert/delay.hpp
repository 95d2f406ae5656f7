#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "monocert/integrators.hpp"
#include "monocert/lyapunov.hpp"
#include "monocert/model.hpp"
#include "monocert/report.hpp"

namespace monocert {

// Delay-robust region estimates. Each test returns the box {0 <= φ <= v}
// of admissible initial histories.

/// c = min_i V_i(v_i), corner_i = V_i⁻¹(c), where v is V's box. V must pass
/// verify_decrease for g(x, x). Throws UncertifiedLyapunov.
[[nodiscard]] BoxSet roa_under_delay_t1(const DelayField& g, const MaxSepLyap& v, std::size_t grid = 64);

/// Box ρ(s̄) of a path certified for g(x, x). Throws UncertifiedPath.
[[nodiscard]] BoxSet roa_under_delay_t2(const DelayField& g, const PathCandidate& path);

/// g(w, w) <= -1e-12 componentwise plus convergence of the delay-free run
/// from w. Throws PreconditionViolated, ConditionFailed.
[[nodiscard]] BoxSet roa_under_delay_t3(const DelayField& g, std::span<const double> w,
                                       const IntegratorConfig& cfg);

/// Excursions above the box larger than this fail the invariance check.
inline constexpr double kInvarianceTol = 1e-6;

/// Integrates the DDE from φ and records max_t max_i (x_i(t) - v_i).
/// Throws PreconditionViolated when φ leaves the box or g(v, v) is not
/// negative, plus integrator errors.
[[nodiscard]] Report verify_box_invariance(const DelayField& g, const BoxSet& box, const InitialHistory& phi,
                                           const IntegratorConfig& cfg);

/// Horizon for one law: proportional delays with γ >= 0.9 stretch t_end by
/// 1/(1 - γ).
[[nodiscard]] double delay_horizon(const DelayLaw& law, double t_end);

struct SweepRow {
  std::string law;
  bool converged = false;
  double t_converge = 0.0;  // NaN when not converged
  double max_excursion = 0.0;
  double terminal_norm = 0.0;
  std::string error;  // empty unless the run threw
};

struct SweepResult {
  std::vector<SweepRow> rows;
  Report report{"sweep_delays", Verdict::Pass};

  /// `law_id,converged,t_converge,max_excursion,terminal_norm`.
  void write_csv(std::ostream& os) const;
};

/// Runs every law from φ ≡ box corner, one thread per law. A law converges
/// when the run ends ConvergedToOrigin or with ‖x‖∞ < `norm_tol`; PASS
/// needs every law to converge without leaving the box.
[[nodiscard]] SweepResult sweep_delay_laws(const DelayField& g, const BoxSet& box, const std::vector<DelayLaw>& laws,
                                           const IntegratorConfig& cfg, double norm_tol = 1e-3);

/// Per-pair delays τ_i^j: component i reads x_j(t - τ_i^j(t)).
[[nodiscard]] Trajectory simulate_heterogeneous(const DelayField& g, std::vector<std::vector<DelayLaw>> laws,
                                                const InitialHistory& phi, const IntegratorConfig& cfg);

}  // namespace monocert
