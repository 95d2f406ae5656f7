#pragma once

#include <cstdint>

#include "monocert/integrators.hpp"
#include "monocert/model.hpp"
#include "monocert/report.hpp"

namespace monocert {

struct GridOptions {
  std::size_t per_axis = 32;
  std::size_t cap = 1'000'000;
  /// Entries must be >= −tol.
  double tol = 1e-9;
};

/// Off-diagonal Jacobian entries of f are >= −tol on a grid over the box.
/// Non-smooth fields are flagged `confidence: reduced`.
[[nodiscard]] Report check_kamke(const VectorField& f, const BoxSet& box, const GridOptions& grid = {});

/// ∂g_i/∂x_j (i ≠ j) and ∂g_i/∂y_j are >= −tol on a grid over box × box.
[[nodiscard]] Report check_assumption2(const DelayField& g, const BoxSet& box, const GridOptions& grid = {});

struct EmpiricalOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  double horizon = 10.0;
  std::size_t samples = 201;
  double tol = 1e-6;
  IntegratorConfig integrator{};
};

/// Random ordered pairs x0' ≤ x0 in the box; both trajectories are compared
/// componentwise on a shared time grid.
[[nodiscard]] Report check_monotone_empirical(const VectorField& f, const BoxSet& box,
                                              const EmpiricalOptions& opts = {});

}  // namespace monocert
