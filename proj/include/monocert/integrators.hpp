#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "monocert/model.hpp"

namespace monocert {

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double t_end = 200.0;
  /// ‖x‖∞ below eta for a whole trailing window counts as convergence.
  double eta = 1e-6;
  /// Minimum trailing window; delay runs widen it to τ(t_end).
  double window = 1.0;
  /// ‖ẋ‖∞ <= stall_rate·‖x‖∞ with ‖x‖∞ >= eta over a window counts as a stall
  /// at a nonzero equilibrium. Zero disables stall detection.
  double stall_rate = 1e-8;
  double tol_pos = 1e-9;
  bool clamp_positive = true;
  bool stop_on_convergence = true;
  std::size_t max_steps = 20'000'000;

  /// Throws InvalidConfig.
  void validate() const;
};

enum class Termination { ReachedEnd, ConvergedToOrigin, Stalled, StepLimit };

[[nodiscard]] const char* to_string(Termination t) noexcept;

/// Accepted steps with dense output: the Dormand–Prince quartic when the
/// step supplied its extra coefficient, cubic Hermite otherwise.
class Trajectory {
 public:
  explicit Trajectory(std::size_t n);

  /// `dense` is the quartic coefficient of the interval ending at t (empty
  /// falls back to Hermite).
  void push(double t, std::span<const double> x, std::span<const double> dx,
            std::span<const double> dense = {});

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] std::span<const double> state(std::size_t k) const;
  [[nodiscard]] std::span<const double> derivative(std::size_t k) const;
  [[nodiscard]] double t_front() const { return times_.back(); }
  [[nodiscard]] std::span<const double> final_state() const { return state(size() - 1); }

  /// Dense output; t is clamped to the stored range.
  [[nodiscard]] Point at(double t) const;
  [[nodiscard]] double at(std::size_t i, double t) const;

  [[nodiscard]] double max_norm(std::size_t k) const;
  [[nodiscard]] double terminal_norm() const { return max_norm(size() - 1); }
  /// Componentwise maximum over every stored node.
  [[nodiscard]] Point componentwise_max() const;
  [[nodiscard]] double min_entry() const;

  Termination termination = Termination::ReachedEnd;
  /// Start of the trailing window that satisfied the convergence test.
  double t_converged = std::numeric_limits<double>::quiet_NaN();
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;

  /// Header `t,x1,...,xn`, 17 significant digits.
  void write_csv(std::ostream& os) const;

 private:
  std::size_t locate(double t) const;

  std::size_t n_;
  std::vector<double> times_;
  std::vector<double> xs_;
  std::vector<double> dxs_;
  std::vector<double> dense_;
};

/// Dormand–Prince 5(4). Throws StepSizeUnderflow, NonFiniteState,
/// PreconditionViolated (x0 with negative entries), InvalidConfig.
[[nodiscard]] Trajectory integrate_ode(const VectorField& f, std::span<const double> x0,
                                       const IntegratorConfig& cfg);

/// Method of steps on top of the same pair. Retarded arguments come from φ
/// (t - τ <= 0) or from the dense output; each delay pair of a heterogeneous
/// schedule gets its own retarded time. Throws HistoryGap when φ's domain is
/// shorter than τ_max, plus the ODE errors.
[[nodiscard]] Trajectory integrate_dde(const DelayField& g, const InitialHistory& phi,
                                       const IntegratorConfig& cfg);

/// Trailing-window length used for a delay run: max(cfg.window, τ(t_end)).
[[nodiscard]] double delay_window(const DelaySchedule& delays, const IntegratorConfig& cfg);

}  // namespace monocert
