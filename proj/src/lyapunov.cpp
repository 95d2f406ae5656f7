#include "monocert/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace monocert {

// ---------------------------------------------------------------------------
// LyapComponent

LyapComponent LyapComponent::linear(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) {
    throw Error(ErrorCode::PreconditionViolated, "linear component needs a positive slope");
  }
  LyapComponent c;
  c.kind_ = Kind::Linear;
  c.slope_ = slope;
  return c;
}

LyapComponent LyapComponent::expression(const Expr& v, std::size_t index) {
  for (const Variable& var : v.variables()) {
    if (var.kind != VarKind::X || var.index != index) {
      throw Error(ErrorCode::InvalidVariableUse,
                  "component V" + std::to_string(index + 1) + " may only use x" + std::to_string(index + 1));
    }
  }
  LyapComponent c;
  c.kind_ = Kind::Expression;
  c.expr_ = v;
  c.dexpr_ = v.differentiate(Variable::x(index));
  c.index_ = index;
  return c;
}

LyapComponent LyapComponent::path_inverse(std::shared_ptr<const PathCandidate> path, std::size_t index) {
  if (!path || index >= path->dimension()) throw Error(ErrorCode::PreconditionViolated, "bad path component");
  LyapComponent c;
  c.kind_ = Kind::PathInverse;
  c.path_ = std::move(path);
  c.index_ = index;
  return c;
}

LyapComponent LyapComponent::tabulated(MonotoneCubic t_of_x, double cutoff) {
  if (!(cutoff > 0.0) || cutoff < t_of_x.x_min() * (1 - 1e-12)) {
    throw Error(ErrorCode::PreconditionViolated, "cutoff must be positive and inside the table");
  }
  LyapComponent c;
  c.kind_ = Kind::Tabulated;
  c.table_ = std::move(t_of_x);
  c.cutoff_ = cutoff;
  return c;
}

double LyapComponent::table_value(double x) const { return std::exp(-table_.value(x)); }

double LyapComponent::table_derivative(double x) const { return -table_.derivative(x) * table_value(x); }

double LyapComponent::value(double x) const {
  switch (kind_) {
    case Kind::Linear: return slope_ * x;
    case Kind::Expression: {
      Point xs(index_ + 1, 0.0);
      xs[index_] = x;
      return expr_.eval(Env{.x = xs});
    }
    case Kind::PathInverse: {
      const double top = path_->rho(index_, path_->sbar());
      if (x >= top) return path_->sbar() + (x - top) / path_->rho_derivative(index_, path_->sbar());
      if (x <= 0.0) return x / path_->rho_derivative(index_, path_->sbar() * 1e-9);
      double lo = 0.0, hi = path_->sbar();
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (path_->rho(index_, mid) < x ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    case Kind::Tabulated:
      if (x >= cutoff_) return table_value(x);
      return table_value(cutoff_) * x / cutoff_;
  }
  return 0.0;
}

double LyapComponent::derivative(double x) const {
  switch (kind_) {
    case Kind::Linear: return slope_;
    case Kind::Expression: {
      Point xs(index_ + 1, 0.0);
      xs[index_] = x;
      return dexpr_.eval(Env{.x = xs});
    }
    case Kind::PathInverse: {
      const double s = std::clamp(value(x), path_->sbar() * 1e-9, path_->sbar());
      return 1.0 / path_->rho_derivative(index_, s);
    }
    case Kind::Tabulated: {
      const double chord = table_value(cutoff_) / cutoff_;
      if (x < cutoff_) return chord;
      const double right = table_derivative(x);
      if (x == cutoff_ && std::abs(right - chord) > 1e-6 * std::max(std::abs(right), std::abs(chord))) {
        throw Error(ErrorCode::NondifferentiablePoint,
                    "tabulated component has a kink at its cutoff " + std::to_string(cutoff_));
      }
      return right;
    }
  }
  return 0.0;
}

double LyapComponent::inverse(double v) const {
  if (v <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::Linear: return v / slope_;
    case Kind::PathInverse:
      if (v <= path_->sbar()) return path_->rho(index_, v);
      break;
    default: break;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 2000 && value(hi) < v; ++it) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool LyapComponent::extrapolated(double x) const {
  return kind_ == Kind::Tabulated && (x < cutoff_ || x > table_.x_max());
}

std::string LyapComponent::describe(std::size_t index) const {
  const std::string xi = "x" + std::to_string(index + 1);
  switch (kind_) {
    case Kind::Linear: return slope_ == 1.0 ? xi : format_number(slope_, 6) + "*" + xi;
    case Kind::Expression: return expr_.to_string();
    case Kind::PathInverse: return "rho" + std::to_string(index + 1) + "^-1(" + xi + ")";
    case Kind::Tabulated: return "exp(-T" + std::to_string(index + 1) + "(" + xi + "))";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// MaxSepLyap

MaxSepLyap::MaxSepLyap(std::vector<LyapComponent> components, Point box)
    : components_(std::move(components)), box_(std::move(box)) {
  if (components_.empty() || components_.size() != box_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Lyapunov components do not match the box dimension");
  }
}

double MaxSepLyap::value(std::span<const double> x) const {
  double v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < components_.size(); ++i) v = std::max(v, components_[i].value(x[i]));
  return v;
}

std::vector<std::size_t> MaxSepLyap::active_set(std::span<const double> x, double tie) const {
  std::vector<double> vals(components_.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = components_[i].value(x[i]);
  const double v = *std::max_element(vals.begin(), vals.end());
  std::vector<std::size_t> j;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (v - vals[i] <= tie * (1.0 + std::abs(v))) j.push_back(i);
  }
  return j;
}

bool MaxSepLyap::extrapolated(std::span<const double> x) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].extrapolated(x[i])) return true;
  }
  return false;
}

double MaxSepLyap::envelope_lower(double r) const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : components_) v = std::min(v, c.value(r));
  return v;
}

double MaxSepLyap::envelope_upper(double r) const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& c : components_) v = std::max(v, c.value(r));
  return v;
}

std::string MaxSepLyap::describe() const {
  std::string out = "max{";
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i) out += ", ";
    out += components_[i].describe(i);
  }
  return out + "}";
}

void MaxSepLyap::write_csv(std::ostream& os, std::size_t samples) const {
  os << "i,x_i,V_i,dV_i\n";
  samples = std::max<std::size_t>(samples, 2);
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (std::size_t k = 0; k < samples; ++k) {
      const double x = box_[i] * static_cast<double>(k) / static_cast<double>(samples - 1);
      double d;
      try {
        d = components_[i].derivative(x);
      } catch (const Error&) {
        d = std::nan("");
      }
      os << i + 1 << ',' << format_number(x, 17) << ',' << format_number(components_[i].value(x), 17) << ','
         << format_number(d, 17) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Dini derivative

double dini_derivative(const MaxSepLyap& v, const VectorField& f, std::span<const double> x, double tie) {
  if (x.size() != v.dimension() || f.dimension() != v.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "point, field and V dimensions differ");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j : v.active_set(x, tie)) {
    best = std::max(best, v.component(j).derivative(x[j]) * f.component(j, x));
  }
  return best;
}

double dini_forward_estimate(const MaxSepLyap& v, const VectorField& f, std::span<const double> x, double h) {
  const Point fx = f(x);
  const double v0 = v.value(x);
  auto quotient = [&](double step) {
    Point y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += step * fx[i];
    return (v.value(y) - v0) / step;
  };
  return 2.0 * quotient(0.5 * h) - quotient(h);
}

// ---------------------------------------------------------------------------
// Construction from a trajectory

Construction construct_from_trajectory(const VectorField& f, std::span<const double> w,
                                       const IntegratorConfig& cfg) {
  const std::size_t n = f.dimension();
  if (w.size() != n) throw Error(ErrorCode::DimensionMismatch, "w does not match the field dimension");
  const Point fw = f(w);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0) || !(fw[i] < 0.0)) {
      throw Error(ErrorCode::NotInOmega, "f(w) < 0 fails in component " + std::to_string(i + 1) +
                                             " (f_i(w) = " + format_number(fw[i], 6) + ")");
    }
  }
  IntegratorConfig run = cfg;
  run.stop_on_convergence = true;
  Trajectory omega = integrate_ode(f, w, run);
  if (omega.termination != Termination::ConvergedToOrigin) {
    throw Error(ErrorCode::NoConvergence, std::string("trajectory from w did not reach the origin (") +
                                              to_string(omega.termination) + ", final norm " +
                                              format_number(omega.terminal_norm(), 6) + ")");
  }

  // Table nodes: every accepted step plus sub-nodes from the dense output,
  // with slopes dT/dx = 1/f_i evaluated at each node.
  constexpr int kSub = 8;
  std::vector<double> times;
  std::vector<Point> states, rates;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const int parts = k + 1 < omega.size() ? kSub : 1;
    for (int q = 0; q < parts; ++q) {
      const double t = q == 0 ? omega.times()[k]
                              : omega.times()[k] + (omega.times()[k + 1] - omega.times()[k]) * q / kSub;
      Point x = q == 0 ? Point(omega.state(k).begin(), omega.state(k).end()) : omega.at(t);
      rates.push_back(f(x));
      times.push_back(t);
      states.push_back(std::move(x));
    }
  }

  std::vector<LyapComponent> comps;
  Point cutoff(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Nodes while ω_i stays at or above η, reversed so x increases. Below
    // 1e-3·w_i a loss of strict decrease is integration noise and ends the
    // table; above it the component is rejected.
    const double noise_floor = 1e-3 * w[i];
    std::vector<double> xs, ts, slopes;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double xi = states[k][i];
      if (xi < cfg.eta) break;
      const double di = rates[k][i];
      if (!(di < 0.0) || (!xs.empty() && !(xi < xs.back()))) {
        if (xi < noise_floor) break;
        throw Error(ErrorCode::NonmonotoneComponent,
                    "omega_" + std::to_string(i + 1) + " is not strictly decreasing near t = " +
                        format_number(times[k], 6));
      }
      xs.push_back(xi);
      ts.push_back(times[k]);
      slopes.push_back(1.0 / di);
    }
    if (xs.size() < 2) {
      throw Error(ErrorCode::NonmonotoneComponent,
                  "omega_" + std::to_string(i + 1) + " has fewer than two nodes above eta");
    }
    std::reverse(xs.begin(), xs.end());
    std::reverse(ts.begin(), ts.end());
    std::reverse(slopes.begin(), slopes.end());
    cutoff[i] = xs.front();
    comps.push_back(LyapComponent::tabulated(MonotoneCubic(std::move(xs), std::move(ts), std::move(slopes)),
                                             cutoff[i]));
  }
  return Construction{MaxSepLyap(std::move(comps), Point(w.begin(), w.end())), std::move(omega), cutoff};
}

// ---------------------------------------------------------------------------
// Decrease verification

std::vector<Point> box_grid(std::span<const double> upper, std::size_t per_axis, std::size_t cap) {
  const std::size_t n = upper.size();
  per_axis = std::max<std::size_t>(per_axis, 2);
  while (per_axis > 2 && std::pow(static_cast<double>(per_axis), static_cast<double>(n)) > static_cast<double>(cap)) {
    --per_axis;
  }
  std::vector<Point> pts;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Point p(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = upper[i] * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
    }
    pts.push_back(std::move(p));
    std::size_t d = 0;
    while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
    if (d == n) break;
  }
  return pts;
}

DecreaseReport verify_decrease(const MaxSepLyap& v, const VectorField& f, const BoxSet& box, std::size_t grid,
                               double margin) {
  constexpr std::size_t kBins = 32;
  DecreaseReport rep;
  const auto pts = box_grid(box.upper, grid);
  std::vector<double> levels, rates;
  levels.reserve(pts.size());
  rates.reserve(pts.size());
  rep.worst_ratio = -std::numeric_limits<double>::infinity();
  rep.min_decay_ratio = std::numeric_limits<double>::infinity();
  for (const Point& x : pts) {
    const double vx = v.value(x);
    if (vx <= 0.0) continue;  // origin
    const double d = dini_derivative(v, f, x);
    ++rep.samples;
    levels.push_back(vx);
    rates.push_back(-d);
    const double ratio = d / vx;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_point = x;
    }
    if (!(d < -margin * vx)) ++rep.violations;
    if (v.extrapolated(x)) {
      ++rep.extrapolated_points;
    } else {
      rep.min_decay_ratio = std::min(rep.min_decay_ratio, -ratio);
    }
  }
  const double top = levels.empty() ? 1.0 : *std::max_element(levels.begin(), levels.end());
  rep.level_edges.resize(kBins + 1);
  for (std::size_t b = 0; b <= kBins; ++b) rep.level_edges[b] = top * static_cast<double>(b) / kBins;
  rep.mu_hat.assign(kBins, std::nan(""));
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto b = std::min(kBins - 1, static_cast<std::size_t>(levels[k] / top * kBins));
    rep.mu_hat[b] = std::isnan(rep.mu_hat[b]) ? rates[k] : std::min(rep.mu_hat[b], rates[k]);
  }
  rep.status = rep.samples > 0 && rep.violations == 0 ? Verdict::Pass : Verdict::Fail;
  return rep;
}

Report DecreaseReport::to_report() const {
  Report r("verify_decrease", status);
  r.set("samples", samples).set("violations", violations);
  if (!worst_point.empty()) r.set("worst_point", worst_point).set("worst_ratio", worst_ratio);
  r.set("min_decay_ratio", min_decay_ratio).set("extrapolated_points", extrapolated_points);
  double mu_min = std::numeric_limits<double>::infinity();
  for (double m : mu_hat) {
    if (!std::isnan(m)) mu_min = std::min(mu_min, m);
  }
  r.set("mu_hat_min", mu_min).set("mu_hat", Point(mu_hat));
  return r;
}

}  // namespace monocert
