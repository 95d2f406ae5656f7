#include "monocert/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

namespace monocert {

void IntegratorConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(rtol > 0.0) || !(atol > 0.0)) bad("tolerances must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) bad("t_end must be finite and > 0");
  if (!(max_step > 0.0)) bad("max_step must be > 0");
  if (!(eta > 0.0)) bad("eta must be > 0");
  if (!(window >= 0.0)) bad("window must be >= 0");
  if (!(stall_rate >= 0.0)) bad("stall_rate must be >= 0");
  if (!(tol_pos >= 0.0)) bad("tol_pos must be >= 0");
  if (max_steps == 0) bad("max_steps must be > 0");
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::ReachedEnd: return "reached_end";
    case Termination::ConvergedToOrigin: return "converged";
    case Termination::Stalled: return "stalled";
    case Termination::StepLimit: return "step_limit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Trajectory

namespace {

// Dormand–Prince continuous extension in Hairer's nested form; r5 = 0 gives
// the cubic Hermite interpolant.
double quartic(double th, double h, double x0, double x1, double d0, double d1, double r5) {
  const double diff = x1 - x0;
  const double r3 = h * d0 - diff;
  const double r4 = diff - h * d1 - r3;
  return x0 + th * (diff + (1 - th) * (r3 + th * (r4 + (1 - th) * r5)));
}

}  // namespace

Trajectory::Trajectory(std::size_t n) : n_(n) {}

void Trajectory::push(double t, std::span<const double> x, std::span<const double> dx,
                      std::span<const double> dense) {
  if (!times_.empty()) {
    if (dense.size() == n_) {
      dense_.insert(dense_.end(), dense.begin(), dense.end());
    } else {
      dense_.insert(dense_.end(), n_, 0.0);
    }
  }
  times_.push_back(t);
  xs_.insert(xs_.end(), x.begin(), x.end());
  dxs_.insert(dxs_.end(), dx.begin(), dx.end());
}

std::span<const double> Trajectory::state(std::size_t k) const { return {xs_.data() + k * n_, n_}; }

std::span<const double> Trajectory::derivative(std::size_t k) const { return {dxs_.data() + k * n_, n_}; }

std::size_t Trajectory::locate(double t) const {
  // index k with times_[k] <= t < times_[k+1], clamped to a valid interval
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(k, times_.size() - 2);
}

double Trajectory::at(std::size_t i, double t) const {
  if (times_.size() == 1 || t <= times_.front()) return state(0)[i];
  if (t >= times_.back()) return state(size() - 1)[i];
  const std::size_t k = locate(t);
  const double t0 = times_[k];
  const double h = times_[k + 1] - t0;
  const double th = (t - t0) / h;
  const double x0 = xs_[k * n_ + i];
  const double x1 = xs_[(k + 1) * n_ + i];
  const double d0 = dxs_[k * n_ + i];
  const double d1 = dxs_[(k + 1) * n_ + i];
  return quartic(th, h, x0, x1, d0, d1, dense_[k * n_ + i]);
}

Point Trajectory::at(double t) const {
  Point p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = at(i, t);
  return p;
}

double Trajectory::max_norm(std::size_t k) const {
  double m = 0.0;
  for (double v : state(k)) m = std::max(m, std::abs(v));
  return m;
}

Point Trajectory::componentwise_max() const {
  Point m(n_, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < size(); ++k) {
    for (std::size_t i = 0; i < n_; ++i) m[i] = std::max(m[i], xs_[k * n_ + i]);
  }
  return m;
}

double Trajectory::min_entry() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : xs_) m = std::min(m, v);
  return m;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t i = 0; i < n_; ++i) os << ",x" << i + 1;
  os << '\n';
  std::ostringstream line;
  line.precision(17);
  for (std::size_t k = 0; k < size(); ++k) {
    line.str("");
    line << times_[k];
    for (double v : state(k)) line << ',' << v;
    os << line.str() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)

namespace {

constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kA71 = 35.0 / 384, kA73 = 500.0 / 1113, kA74 = 125.0 / 192, kA75 = -2187.0 / 6784,
                 kA76 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920, kE5 = -17253.0 / 339200,
                 kE6 = 22.0 / 525, kE7 = -1.0 / 40;
constexpr double kD1 = -12715105075.0 / 11282082432, kD3 = 87487479700.0 / 32700410799,
                 kD4 = -10690763975.0 / 1880347072, kD5 = 701980252875.0 / 199316789632,
                 kD6 = -1453857185.0 / 822651844, kD7 = 69997945.0 / 29380423;

struct Stages {
  explicit Stages(std::size_t n) {
    for (auto& k : k) k.assign(n, 0.0);
    tmp.assign(n, 0.0);
    x_new.assign(n, 0.0);
    err.assign(n, 0.0);
    dense.assign(n, 0.0);
  }
  std::array<Point, 7> k;
  Point tmp, x_new, err, dense;
};

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double d : v) m = std::max(m, std::abs(d));
  return m;
}

// One DP step from (t, x) with k[0] = f(t, x) already filled. Returns the
// scaled error norm.
template <class System>
double dp_step(System& sys, double t, double h, std::span<const double> x, Stages& s,
               const IntegratorConfig& cfg) {
  const std::size_t n = x.size();
  auto& k = s.k;
  auto& y = s.tmp;
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * kA21 * k[0][i];
  sys.deriv(t + kC2 * h, y, k[1]);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * (kA31 * k[0][i] + kA32 * k[1][i]);
  sys.deriv(t + kC3 * h, y, k[2]);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * (kA41 * k[0][i] + kA42 * k[1][i] + kA43 * k[2][i]);
  sys.deriv(t + kC4 * h, y, k[3]);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] + h * (kA51 * k[0][i] + kA52 * k[1][i] + kA53 * k[2][i] + kA54 * k[3][i]);
  }
  sys.deriv(t + kC5 * h, y, k[4]);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] + h * (kA61 * k[0][i] + kA62 * k[1][i] + kA63 * k[2][i] + kA64 * k[3][i] + kA65 * k[4][i]);
  }
  sys.deriv(t + h, y, k[5]);
  for (std::size_t i = 0; i < n; ++i) {
    s.x_new[i] =
        x[i] + h * (kA71 * k[0][i] + kA73 * k[2][i] + kA74 * k[3][i] + kA75 * k[4][i] + kA76 * k[5][i]);
  }
  sys.deriv(t + h, s.x_new, k[6]);
  for (std::size_t i = 0; i < n; ++i) {
    s.dense[i] = h * (kD1 * k[0][i] + kD3 * k[2][i] + kD4 * k[3][i] + kD5 * k[4][i] + kD6 * k[5][i] +
                      kD7 * k[6][i]);
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.err[i] = h * (kE1 * k[0][i] + kE3 * k[2][i] + kE4 * k[3][i] + kE5 * k[4][i] + kE6 * k[5][i] +
                    kE7 * k[6][i]);
    const double scale = cfg.atol + cfg.rtol * std::max(std::abs(x[i]), std::abs(s.x_new[i]));
    norm = std::max(norm, std::abs(s.err[i]) / scale);
  }
  if (!std::isfinite(norm)) norm = std::numeric_limits<double>::infinity();
  return norm;
}

template <class System>
double initial_step(System& sys, double t0, std::span<const double> x0, std::span<const double> f0,
                    const IntegratorConfig& cfg) {
  const std::size_t n = x0.size();
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = cfg.atol + cfg.rtol * std::abs(x0[i]);
    d0 = std::max(d0, std::abs(x0[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, cfg.max_step, cfg.t_end - t0});
  Point x1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) x1[i] = x0[i] + h0 * f0[i];
  sys.begin_step(t0, h0, x0, f0);
  sys.deriv(t0 + h0, x1, f1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = cfg.atol + cfg.rtol * std::abs(x0[i]);
    d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc / h0);
  }
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  if (!std::isfinite(h1)) return h0;
  return std::min({100.0 * h0, h1, cfg.max_step});
}

class WindowMonitor {
 public:
  WindowMonitor(const IntegratorConfig& cfg, double window) : cfg_(cfg), window_(window) {}

  // Returns the termination reached at this node, if any.
  std::optional<Termination> observe(double t, std::span<const double> x, std::span<const double> dx) {
    const double nx = max_abs(x);
    if (nx < cfg_.eta) {
      if (!below_) {
        below_ = true;
        below_since_ = t;
      }
      if (t - below_since_ >= window_) return Termination::ConvergedToOrigin;
    } else {
      below_ = false;
    }
    if (cfg_.stall_rate > 0.0 && nx >= cfg_.eta && max_abs(dx) <= cfg_.stall_rate * nx) {
      if (!stalled_) {
        stalled_ = true;
        stalled_since_ = t;
      }
      if (t - stalled_since_ >= window_) return Termination::Stalled;
    } else {
      stalled_ = false;
    }
    return std::nullopt;
  }

  [[nodiscard]] double converged_since() const { return below_ ? below_since_ : std::nan(""); }

 private:
  const IntegratorConfig& cfg_;
  double window_;
  bool below_ = false;
  double below_since_ = 0.0;
  bool stalled_ = false;
  double stalled_since_ = 0.0;
};

bool clamp_nonnegative(std::span<double> x, const IntegratorConfig& cfg) {
  if (!cfg.clamp_positive) return false;
  bool changed = false;
  for (double& v : x) {
    if (v < 0.0 && v >= -cfg.tol_pos) {
      v = 0.0;
      changed = true;
    }
  }
  return changed;
}

// Shared adaptive driver. System provides deriv(t, x, out), step_cap(t),
// begin_step/needs_iteration/set_provisional for the delay case and
// accept(traj, t, x, k0, fsal), where fsal is the last stage of the accepted
// step (null at t = 0 or after clamping).
template <class System>
void drive(System& sys, Trajectory& traj, std::span<const double> x0, const IntegratorConfig& cfg,
           double window) {
  cfg.validate();
  const std::size_t n = x0.size();
  for (double v : x0) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::PreconditionViolated, "initial state must be finite and >= 0");
    }
  }
  Stages s(n);
  Point x(x0.begin(), x0.end());
  double t = 0.0;
  sys.accept(traj, t, x, s.k[0], nullptr, {});
  if (!all_finite(s.k[0])) throw Error(ErrorCode::NonFiniteState, "non-finite derivative at t = 0");

  WindowMonitor monitor(cfg, window);
  if (auto term = monitor.observe(t, x, s.k[0]); term && cfg.stop_on_convergence) {
    traj.termination = *term;
    if (*term == Termination::ConvergedToOrigin) traj.t_converged = 0.0;
    return;
  }

  double h = initial_step(sys, t, x, s.k[0], cfg);
  Point prev_new(n);
  std::size_t steps = 0;
  while (t < cfg.t_end) {
    if (++steps > cfg.max_steps) {
      traj.termination = Termination::StepLimit;
      return;
    }
    h = std::min({h, cfg.max_step, sys.step_cap(t)});
    bool last = false;
    if (t + h >= cfg.t_end || cfg.t_end - (t + h) < 1e-12 * std::max(1.0, cfg.t_end)) {
      h = cfg.t_end - t;
      last = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw Error(ErrorCode::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t));
    }

    sys.begin_step(t, h, x, s.k[0]);
    double err = dp_step(sys, t, h, x, s, cfg);
    for (int it = 0; it < 4 && sys.needs_iteration(); ++it) {
      prev_new = s.x_new;
      sys.set_provisional(s.x_new, s.k[6], s.dense);
      err = dp_step(sys, t, h, x, s, cfg);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double sc = cfg.atol + cfg.rtol * std::abs(s.x_new[i]);
        change = std::max(change, std::abs(s.x_new[i] - prev_new[i]) / sc);
      }
      if (change <= 0.1) break;
    }

    if (err <= 1.0) {
      t = last ? cfg.t_end : t + h;
      x = s.x_new;
      if (!all_finite(x)) throw Error(ErrorCode::NonFiniteState, "non-finite state at t = " + std::to_string(t));
      const bool clamped = clamp_nonnegative(x, cfg);
      const Point fsal = s.k[6];
      sys.accept(traj, t, x, s.k[0], clamped ? nullptr : &fsal, s.dense);
      if (!all_finite(s.k[0])) {
        throw Error(ErrorCode::NonFiniteState, "non-finite derivative at t = " + std::to_string(t));
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= factor;
      if (auto term = monitor.observe(t, x, s.k[0]); term) {
        if (*term == Termination::ConvergedToOrigin) traj.t_converged = monitor.converged_since();
        if (cfg.stop_on_convergence || *term == Termination::Stalled) {
          traj.termination = *term;
          return;
        }
      }
    } else {
      ++traj.rejected_steps;
      const double factor = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0) : 0.2;
      h *= factor;
    }
  }
  if (max_abs(x) < cfg.eta && std::isnan(traj.t_converged)) traj.t_converged = monitor.converged_since();
  traj.termination = Termination::ReachedEnd;
}

class OdeSystem {
 public:
  explicit OdeSystem(const VectorField& f) : f_(f) {}

  void deriv(double, std::span<const double> x, std::span<double> out) {
    ++evals_;
    f_.eval(x, out);
  }
  double step_cap(double) const { return std::numeric_limits<double>::infinity(); }
  void begin_step(double, double, std::span<const double>, std::span<const double>) {}
  bool needs_iteration() const { return false; }
  void set_provisional(std::span<const double>, std::span<const double>, std::span<const double>) {}

  void accept(Trajectory& traj, double t, std::span<const double> x, Point& k0, const Point* fsal,
              std::span<const double> dense) {
    if (fsal) {
      k0 = *fsal;
    } else {
      deriv(t, x, k0);
    }
    traj.push(t, x, k0, dense);
    traj.rhs_evaluations = evals_;
  }

 private:
  const VectorField& f_;
  std::size_t evals_ = 0;
};

class DdeSystem {
 public:
  DdeSystem(const DelayField& g, const InitialHistory& phi, const Trajectory& traj)
      : g_(g), phi_(phi), traj_(traj), n_(g.dimension()), y_(n_) {}

  void deriv(double t, std::span<const double> x, std::span<double> out) {
    ++evals_;
    const DelaySchedule& d = g_.delays();
    if (!d.heterogeneous()) {
      const double r = t - d.shared()(t);
      for (std::size_t j = 0; j < n_; ++j) y_[j] = retarded(j, r, t, x);
      g_.eval(x, y_, out);
      return;
    }
    // Each component i sees its own delayed vector (x_j(t - τ_i^j(t)))_j.
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) y_[j] = retarded(j, t - d.law(i, j)(t), t, x);
      out[i] = g_.component(i, x, y_);
    }
  }

  double step_cap(double t) const {
    const DelaySchedule& d = g_.delays();
    double cap = std::numeric_limits<double>::infinity();
    if (!d.heterogeneous()) {
      const double lag = d.shared()(t);
      return lag > 0.0 ? lag : cap;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double lag = d.law(i, j)(t);
        if (lag > 0.0) cap = std::min(cap, lag);
      }
    }
    return cap;
  }

  void begin_step(double t, double h, std::span<const double> x, std::span<const double> k0) {
    t0_ = t;
    h_ = h;
    x0_.assign(x.begin(), x.end());
    k0_.assign(k0.begin(), k0.end());
    provisional_ = false;
    beyond_front_ = false;
  }
  bool needs_iteration() const { return beyond_front_; }
  void set_provisional(std::span<const double> x1, std::span<const double> k1, std::span<const double> r5) {
    x1_.assign(x1.begin(), x1.end());
    k1_.assign(k1.begin(), k1.end());
    r5_.assign(r5.begin(), r5.end());
    provisional_ = true;
    beyond_front_ = false;
  }

  void accept(Trajectory& traj, double t, std::span<const double> x, Point& k0, const Point*,
              std::span<const double> dense) {
    front_ = t;
    has_front_ = true;
    // Recompute at the new node: the last stage may have read provisional data.
    deriv(t, x, k0);
    traj.push(t, x, k0, dense);
    traj.rhs_evaluations = evals_;
  }

 private:
  double retarded(std::size_t j, double r, double t_stage, std::span<const double> x_stage) {
    if (r >= t_stage) return x_stage[j];
    if (r <= 0.0) {
      if (r < -phi_.domain() - 1e-12) {
        throw Error(ErrorCode::HistoryGap, "retarded time " + std::to_string(r) +
                                               " lies before the history domain");
      }
      return phi_.value(j, r);
    }
    if (has_front_ && r <= front_) return traj_.at(j, r);
    // Beyond the accepted front: extrapolate or use the tentative step.
    beyond_front_ = true;
    const double s = r - t0_;
    if (!provisional_) return x0_[j] + s * k0_[j];
    return quartic(s / h_, h_, x0_[j], x1_[j], k0_[j], k1_[j], r5_[j]);
  }

  const DelayField& g_;
  const InitialHistory& phi_;
  const Trajectory& traj_;
  std::size_t n_;
  Point y_;
  double front_ = 0.0;
  bool has_front_ = false;
  double t0_ = 0.0, h_ = 0.0;
  Point x0_, k0_, x1_, k1_, r5_;
  bool provisional_ = false;
  bool beyond_front_ = false;
  std::size_t evals_ = 0;
};

}  // namespace

Trajectory integrate_ode(const VectorField& f, std::span<const double> x0, const IntegratorConfig& cfg) {
  if (x0.size() != f.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state does not match the field dimension");
  }
  Trajectory traj(f.dimension());
  OdeSystem sys(f);
  drive(sys, traj, x0, cfg, cfg.window);
  return traj;
}

double delay_window(const DelaySchedule& delays, const IntegratorConfig& cfg) {
  return std::max(cfg.window, delays.max_delay(cfg.t_end));
}

Trajectory integrate_dde(const DelayField& g, const InitialHistory& phi, const IntegratorConfig& cfg) {
  if (phi.dimension() != g.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "history does not match the field dimension");
  }
  const double tau_max = g.delays().tau_max();
  if (phi.domain() + 1e-12 < tau_max) {
    throw Error(ErrorCode::HistoryGap, "history covers [-" + std::to_string(phi.domain()) +
                                           ", 0] but tau_max = " + std::to_string(tau_max));
  }
  const Point x0 = phi.at(0.0);
  Trajectory traj(g.dimension());
  DdeSystem sys(g, phi, traj);
  drive(sys, traj, x0, cfg, delay_window(g.delays(), cfg));
  return traj;
}

}  // namespace monocert
