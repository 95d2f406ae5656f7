#include "monocert/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "monocert/monotone.hpp"
#include "monocert/random.hpp"

namespace monocert {

namespace {

bool is_num(const Expr& e) { return e.kind() == NodeKind::Number; }

// Solves g(s) = target for s, where target is an expression in x.
std::optional<Expr> invert(const Expr& g, const Expr& target) {
  switch (g.kind()) {
    case NodeKind::Var:
      if (g.var().kind == VarKind::S) return target;
      return std::nullopt;
    case NodeKind::Binary: {
      const Expr& a = g.args()[0];
      const Expr& b = g.args()[1];
      switch (g.op()) {
        case BinaryOp::Add:
          if (is_num(a)) return invert(b, Expr::binary(BinaryOp::Sub, target, a));
          if (is_num(b)) return invert(a, Expr::binary(BinaryOp::Sub, target, b));
          return std::nullopt;
        case BinaryOp::Sub:
          if (is_num(b)) return invert(a, Expr::binary(BinaryOp::Add, target, b));
          return std::nullopt;
        case BinaryOp::Mul:
          if (is_num(a) && a.number_value() > 0) return invert(b, Expr::binary(BinaryOp::Div, target, a));
          if (is_num(b) && b.number_value() > 0) return invert(a, Expr::binary(BinaryOp::Div, target, b));
          return std::nullopt;
        case BinaryOp::Div:
          if (is_num(b) && b.number_value() > 0) return invert(a, Expr::binary(BinaryOp::Mul, target, b));
          return std::nullopt;
        case BinaryOp::Pow:
          if (is_num(b) && b.number_value() > 0) {
            return invert(a, Expr::binary(BinaryOp::Pow, target, Expr::number(1.0 / b.number_value())));
          }
          return std::nullopt;
      }
      return std::nullopt;
    }
    case NodeKind::Call: {
      const auto& args = g.args();
      switch (g.function()) {
        case Function::Sqrt: return invert(args[0], Expr::binary(BinaryOp::Pow, target, Expr::number(2)));
        case Function::Exp: return invert(args[0], Expr::call(Function::Ln, {target}));
        case Function::Ln: return invert(args[0], Expr::call(Function::Exp, {target}));
        case Function::Pow:
          if (is_num(args[1]) && args[1].number_value() > 0) {
            return invert(args[0],
                          Expr::binary(BinaryOp::Pow, target, Expr::number(1.0 / args[1].number_value())));
          }
          return std::nullopt;
        default: return std::nullopt;
      }
    }
    default: return std::nullopt;
  }
}

// Closed-form V_i when the inverse exists and reproduces s on the grid.
LyapComponent path_component(const std::shared_ptr<const PathCandidate>& path, std::size_t i) {
  if (auto inv = invert_path_component(path->rho_exprs()[i], i)) {
    try {
      const auto comp = LyapComponent::expression(*inv, i);
      bool ok = true;
      for (int k = 1; k <= 64 && ok; ++k) {
        const double s = path->sbar() * k / 64.0;
        ok = std::abs(comp.value(path->rho(i, s)) - s) <= 1e-9 * (1.0 + s);
      }
      if (ok) return comp;
    } catch (const Error&) {
      // fall through to the numeric inverse
    }
  }
  return LyapComponent::path_inverse(path, i);
}

double max_ratio_violation(const VectorField& f, std::span<const double> w) {
  // max_i f_i(w) scaled by w_i; negative means w is inside Ω
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) m = std::max(m, f.component(i, w) / std::max(w[i], 1e-300));
  return m;
}

bool in_omega(const VectorField& f, std::span<const double> w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) return false;
  }
  try {
    return max_ratio_violation(f, w) < 0.0;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::optional<Expr> invert_path_component(const Expr& rho, std::size_t index) {
  return invert(rho, Expr::variable(Variable::x(index)));
}

CertificateResult certify_path(const VectorField& f, const PathCandidate& path, std::size_t grid) {
  const std::size_t n = f.dimension();
  if (path.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "path does not match the field");
  grid = std::max<std::size_t>(grid, 2);
  double worst = std::numeric_limits<double>::infinity();
  double worst_s = 0.0;
  std::size_t worst_i = 0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double s = path.sbar() * static_cast<double>(k) / static_cast<double>(grid - 1);
    Point x;
    Point fx;
    try {
      x = path.point(s);
      fx = f(x);
    } catch (const Error& e) {
      throw Error(ErrorCode::PathDomainError, "evaluation along the path failed at s = " + format_number(s, 17) +
                                                  ": " + e.what());
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double slack = -path.alpha(i, s) - fx[i];  // >= -1e-12 required
      if (slack < worst) {
        worst = slack;
        worst_s = s;
        worst_i = i;
      }
    }
  }
  CertificateResult res;
  const bool ok = worst >= -1e-12;
  res.status = ok ? Verdict::Certified : Verdict::Rejected;
  res.report = Report("certify_path", res.status);
  res.report.set("method", "path").set("sbar", path.sbar()).set("grid", grid).set("min_slack", worst);
  if (ok) {
    auto shared = std::make_shared<const PathCandidate>(path);
    std::vector<LyapComponent> comps;
    for (std::size_t i = 0; i < n; ++i) comps.push_back(path_component(shared, i));
    res.box = path.corner();
    res.lyap.emplace(std::move(comps), *res.box);
    res.report.set("box", *res.box).set("lyapunov", res.lyap->describe());
  } else {
    res.report.set("witness_s", worst_s).set("witness_component", worst_i + 1).set("witness_point",
                                                                                     path.point(worst_s));
  }
  return res;
}

CertificateResult certify_by_w(const VectorField& f, std::span<const double> w, const IntegratorConfig& cfg) {
  const std::size_t n = f.dimension();
  if (w.size() != n) throw Error(ErrorCode::DimensionMismatch, "w does not match the field");
  for (double v : w) {
    if (!(v > 0.0)) throw Error(ErrorCode::PreconditionViolated, "w must be componentwise positive");
  }
  CertificateResult res;
  const Point fw = f(w);
  res.report = Report("certify_w", Verdict::Inconclusive);
  res.report.set("method", "w").set("w", Point(w.begin(), w.end())).set("f_w", fw);
  const bool negative = std::all_of(fw.begin(), fw.end(), [](double v) { return v < 0.0; });
  if (!negative) {
    res.status = Verdict::Rejected;
    res.report.set_verdict(res.status);
    res.report.set("reason", "f(w) < 0 fails");
    return res;
  }
  IntegratorConfig run = cfg;
  run.stop_on_convergence = true;
  const Trajectory tr = integrate_ode(f, w, run);
  const Point final(tr.final_state().begin(), tr.final_state().end());
  res.report.set("termination", to_string(tr.termination))
      .set("t_final", tr.t_front())
      .set("terminal_state", final)
      .set("terminal_norm", tr.terminal_norm());
  if (tr.termination == Termination::ConvergedToOrigin) {
    res.status = Verdict::Certified;
    res.box = Point(w.begin(), w.end());
    res.report.set("t_converged", tr.t_converged).set("box", *res.box);
  } else {
    res.status = Verdict::Inconclusive;
    res.report.set("reason", "f(w) < 0 but convergence to the origin was not observed");
  }
  res.report.set_verdict(res.status);
  return res;
}

SearchResult search_w(const VectorField& f, const BoxSet& box, const SearchOptions& opts) {
  const std::size_t n = f.dimension();
  if (box.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "box does not match the field");
  box.require_positive();
  SearchResult out;
  out.report.set("trials", opts.trials).set("seed", static_cast<std::int64_t>(opts.seed));

  auto score = [&](const Point& w) {
    try {
      return max_ratio_violation(f, w);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // 1. sample and descend
  std::vector<Point> found;
  for (std::size_t k = 0; k < opts.trials; ++k) {
    auto rng = trial_rng(opts.seed, k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = box.upper[i] * std::max(unit(rng), 1e-6);
    double best = score(w);
    double step = 0.25;
    for (std::size_t it = 0; it < opts.descent_iterations && best >= 0.0; ++it) {
      bool improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (double dir : {-1.0, 1.0}) {
          Point c = w;
          c[i] = std::clamp(c[i] + dir * step * box.upper[i], 1e-9 * box.upper[i], box.upper[i]);
          const double sc = score(c);
          if (sc < best) {
            best = sc;
            w = std::move(c);
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (best < 0.0) found.push_back(std::move(w));
  }
  out.report.set("candidates", found.size());
  if (found.empty()) {
    out.report.set("reason", "no w with f(w) < 0 found in the box");
    return out;
  }

  // 2. push each candidate outward along its ray as far as Ω allows
  auto ray_limit = [&](const Point& w) {
    double lam_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) lam_max = std::min(lam_max, box.upper[i] / w[i]);
    auto at = [&](double lam) {
      Point p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = lam * w[i];
      return p;
    };
    if (in_omega(f, at(lam_max))) return at(lam_max);
    double lo = 1.0, hi = lam_max;
    for (std::size_t it = 0; it < opts.bisection_steps; ++it) {
      const double mid = 0.5 * (lo + hi);
      (in_omega(f, at(mid)) ? lo : hi) = mid;
    }
    return at(lo);
  };
  std::vector<std::pair<double, Point>> ranked;
  for (const Point& w : found) {
    Point far = ray_limit(w);
    double size = 0.0;
    for (std::size_t i = 0; i < n; ++i) size += far[i] / box.upper[i];
    ranked.emplace_back(size, std::move(far));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  // 3. the largest candidate that also converges wins
  std::size_t tried = 0;
  for (const auto& [size, w] : ranked) {
    if (++tried > 5) break;
    const auto cert = certify_by_w(f, w, opts.integrator);
    if (cert.status == Verdict::Certified) {
      out.w = w;
      out.report.set_verdict(Verdict::Pass);
      out.report.set("w", w).set("f_w", f(w)).set("t_converged", cert.report.number("t_converged"));
      return out;
    }
  }
  out.report.set("reason", "no candidate converged to the origin");
  return out;
}

PsiTransform apply_psi_transform(const VectorField& f, const ScalingPsi& psi, const BoxSet& box) {
  const std::size_t n = f.dimension();
  if (psi.dimension() != n || box.dimension() != n) {
    throw Error(ErrorCode::DimensionMismatch, "psi, box and field dimensions differ");
  }
  Point y_max(n, 0.0);
  for (const Point& x : box_grid(box.upper, 16, 100000)) {
    for (std::size_t i = 0; i < n; ++i) y_max[i] = std::max(y_max[i], std::abs(f.component(i, x)));
  }
  for (double& y : y_max) y = std::max(1.1 * y, 1e-6);
  psi.validate(box.upper, y_max);

  VectorField h = [&] {
    if (f.source()) {
      std::vector<Expr> comps;
      for (std::size_t i = 0; i < n; ++i) {
        comps.push_back(psi.components()[i].substitute(Variable::y(i), f.source()->component(i)));
      }
      return VectorField::from_system(ExprSystem(n, std::move(comps), VariableRoles::StateOnly));
    }
    return VectorField::from_function(
        n, [f, psi](std::size_t i, std::span<const double> x) { return psi.apply(i, x[i], f.component(i, x)); },
        std::nullopt, false);
  }();
  Report kamke = check_kamke(h, box);
  return PsiTransform{std::move(h), std::move(kamke)};
}

}  // namespace monocert
