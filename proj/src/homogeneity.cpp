#include "monocert/homogeneity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "monocert/random.hpp"

namespace monocert {

namespace {

Point random_point(std::mt19937_64& rng, const BoxSet& box) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point x(box.dimension());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = box.upper[i] * unit(rng);
  return x;
}

Expr num(double v) { return Expr::number(v); }
Expr svar() { return Expr::variable(Variable::s()); }
Expr mul(Expr a, Expr b) { return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b)); }
Expr power_of_s(double e) { return e == 1.0 ? svar() : Expr::binary(BinaryOp::Pow, svar(), num(e)); }

}  // namespace

Dilation::Dilation(Point weights, double degree) : r(std::move(weights)), p(degree) {
  if (r.empty()) throw Error(ErrorCode::PreconditionViolated, "dilation needs at least one weight");
  for (double ri : r) {
    if (!(ri > 0.0)) throw Error(ErrorCode::PreconditionViolated, "dilation weights must be positive");
  }
  if (!(p >= 0.0)) throw Error(ErrorCode::PreconditionViolated, "degree must be >= 0");
}

Point Dilation::apply(double lambda, std::span<const double> x) const {
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::pow(lambda, r.at(i)) * x[i];
  return out;
}

double Dilation::r_max() const { return *std::max_element(r.begin(), r.end()); }

Report check_homogeneous(const VectorField& f, const Dilation& dil, const BoxSet& box, const HomogeneityOptions& opts) {
  const std::size_t n = f.dimension();
  if (dil.dimension() != n || box.dimension() != n) {
    throw Error(ErrorCode::DimensionMismatch, "dilation, box and field dimensions differ");
  }
  Report rep("homogeneous", Verdict::Pass);
  rep.set("weights", dil.r).set("degree", dil.p).set("trials", opts.trials).set("tolerance", opts.rel_tol);
  double worst = 0.0;
  for (std::size_t k = 0; k < opts.trials; ++k) {
    auto rng = trial_rng(opts.seed, k);
    const Point x = random_point(rng, box);
    const double lambda = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    const Point lhs = f(dil.apply(lambda, x));
    const Point rhs = dil.apply(lambda, f(x));
    const double scale = std::pow(lambda, dil.p);
    for (std::size_t i = 0; i < n; ++i) {
      const double b = scale * rhs[i];
      const double err = std::abs(lhs[i] - b) / std::max({std::abs(lhs[i]), std::abs(b), 1e-300});
      const bool ok = std::abs(lhs[i] - b) <= opts.rel_tol * std::max(std::abs(lhs[i]), std::abs(b)) + 1e-300;
      if (!ok && rep.verdict() == Verdict::Pass) {
        rep.set_verdict(Verdict::Fail);
        rep.set("witness_x", x).set("witness_lambda", lambda).set("witness_component", i + 1);
        rep.set("witness_lhs", lhs[i]).set("witness_rhs", b);
      }
      worst = std::max(worst, err);
    }
  }
  rep.set("max_relative_error", worst);
  return rep;
}

DegreeFit infer_degree(const VectorField& f, const Point& r, const BoxSet& box, double p_min, double p_max,
                       const HomogeneityOptions& opts) {
  if (!(p_min >= 0.0) || !(p_max >= p_min)) throw Error(ErrorCode::PreconditionViolated, "bad degree range");
  const Dilation shape(r, 0.0);
  std::vector<double> estimates;
  for (std::size_t k = 0; k < opts.trials; ++k) {
    auto rng = trial_rng(opts.seed, k);
    const Point x = random_point(rng, box);
    const double lambda = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    if (std::abs(std::log(lambda)) < 1e-3) continue;
    const Point lhs = f(shape.apply(lambda, x));
    const Point rhs = shape.apply(lambda, f(x));
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const double ratio = lhs[i] / rhs[i];
      if (std::isfinite(ratio) && ratio > 0.0 && std::abs(rhs[i]) > 1e-200) {
        estimates.push_back(std::log(ratio) / std::log(lambda));
      }
    }
  }
  DegreeFit fit;
  if (estimates.empty()) {
    fit.p = p_min;
    fit.residual = std::numeric_limits<double>::infinity();
    return fit;
  }
  std::nth_element(estimates.begin(), estimates.begin() + estimates.size() / 2, estimates.end());
  fit.p = std::clamp(estimates[estimates.size() / 2], p_min, p_max);
  const Report check = check_homogeneous(f, Dilation(r, fit.p), box, opts);
  fit.residual = check.number("max_relative_error");
  return fit;
}

Report check_sub_homogeneous(const VectorField& f, double p, const BoxSet& box, const HomogeneityOptions& opts) {
  if (!(p >= 0.0)) throw Error(ErrorCode::PreconditionViolated, "degree must be >= 0");
  const std::size_t n = f.dimension();
  if (box.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "box does not match the field");
  Report rep("sub_homogeneous", Verdict::Pass);
  rep.set("degree", p).set("trials", opts.trials).set("tolerance", opts.rel_tol);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < opts.trials; ++k) {
    auto rng = trial_rng(opts.seed, k);
    const Point x = random_point(rng, box);
    const double lambda = std::uniform_real_distribution<double>(1.0, 10.0)(rng);
    Point lx = x;
    for (double& v : lx) v *= lambda;
    const Point lhs = f(lx);
    const Point fx = f(x);
    const double scale = std::pow(lambda, p);
    for (std::size_t i = 0; i < n; ++i) {
      const double bound = scale * fx[i];
      const double excess = lhs[i] - bound;
      worst = std::max(worst, excess);
      if (excess > opts.rel_tol * (1.0 + std::abs(bound)) && rep.verdict() == Verdict::Pass) {
        rep.set_verdict(Verdict::Fail);
        rep.set("witness_x", x).set("witness_lambda", lambda).set("witness_component", i + 1);
        rep.set("witness_lhs", lhs[i]).set("witness_bound", bound);
      }
    }
  }
  rep.set("max_excess", worst);
  return rep;
}

PathCandidate homogeneous_path(const VectorField& f, const Dilation& dil, std::span<const double> w, double sbar) {
  const std::size_t n = f.dimension();
  if (w.size() != n || dil.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "w or dilation mismatch");
  if (!(sbar > 0.0)) throw Error(ErrorCode::PreconditionViolated, "sbar must be positive");
  const Point fw = f(w);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0) || !(fw[i] < 0.0)) {
      throw Error(ErrorCode::NegativityFailed, "f(w) < 0 fails in component " + std::to_string(i + 1) +
                                                   " (value " + format_number(fw[i], 6) + ")");
    }
  }
  const double rmax = dil.r_max();
  std::vector<Expr> rho, alpha;
  for (std::size_t i = 0; i < n; ++i) {
    rho.push_back(mul(num(w[i]), power_of_s(dil.r[i] / rmax)));
    alpha.push_back(mul(num(-fw[i] * (1.0 - 1e-9)), power_of_s((dil.p + dil.r[i]) / rmax)));
  }
  return PathCandidate(std::move(rho), sbar, std::move(alpha));
}

GridTable::GridTable(Point upper, std::size_t per_axis) : upper_(std::move(upper)), m_(per_axis) {
  if (m_ < 2) throw Error(ErrorCode::PreconditionViolated, "grid needs at least 2 nodes per axis");
  std::size_t total = 1;
  for (std::size_t i = 0; i < upper_.size(); ++i) {
    stride_.push_back(total);
    total *= m_;
    if (total > 50'000'000) throw Error(ErrorCode::PreconditionViolated, "grid too large");
  }
  values_.assign(total, 0.0);
}

Point GridTable::node(std::size_t flat) const {
  Point x(upper_.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = upper_[i] * static_cast<double>((flat / stride_[i]) % m_) / static_cast<double>(m_ - 1);
  }
  return x;
}

double GridTable::interpolate(std::span<const double> x) const { return blend(x, std::nullopt); }

double GridTable::partial(std::span<const double> x, std::size_t axis) const {
  if (x[axis] < 0.0 || x[axis] >= upper_.at(axis)) return 0.0;
  return blend(x, axis);
}

double GridTable::blend(std::span<const double> x, std::optional<std::size_t> slope_axis) const {
  const std::size_t n = upper_.size();
  std::vector<std::size_t> base(n);
  std::vector<double> frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::clamp(x[i] / upper_[i], 0.0, 1.0) * static_cast<double>(m_ - 1);
    base[i] = std::min(static_cast<std::size_t>(u), m_ - 2);
    frac[i] = u - static_cast<double>(base[i]);
  }
  double sum = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool hi = (corner >> i) & 1U;
      if (slope_axis == i) {
        weight *= (hi ? 1.0 : -1.0) * static_cast<double>(m_ - 1) / upper_[i];
      } else {
        weight *= hi ? frac[i] : 1.0 - frac[i];
      }
      flat += (base[i] + (hi ? 1 : 0)) * stride_[i];
    }
    if (weight != 0.0) sum += weight * values_[flat];
  }
  return sum;
}

void GridTable::prefix_max(std::size_t axis) {
  const std::size_t s = stride_.at(axis);
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    if ((flat / s) % m_ != 0) values_[flat] = std::max(values_[flat], values_[flat - s]);
  }
}

void ComparisonField::write_csv(std::ostream& os) const {
  const std::size_t n = field.dimension();
  os << "i";
  for (std::size_t j = 0; j < n; ++j) os << ",x" << (j + 1);
  os << ",H_i,D_i\n";
  for (std::size_t i = 0; i < n; ++i) {
    const GridTable& h = (*h_sup)[i];
    const GridTable& d = (*d_sup)[i];
    for (std::size_t k = 0; k < h.size(); ++k) {
      os << (i + 1);
      for (double v : h.node(k)) os << ',' << format_number(v, 17);
      os << ',' << format_number(h[k], 17) << ',' << format_number(d[k], 17) << '\n';
    }
  }
}

ComparisonField comparison_field_bound(const VectorField& h, const VectorField& d, const BoxSet& box,
                                       std::size_t grid, DelaySchedule delays) {
  const std::size_t n = h.dimension();
  if (d.dimension() != n || box.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "h, d and box differ");
  box.require_positive();
  auto h_tab = std::make_shared<std::vector<GridTable>>(n, GridTable(box.upper, grid));
  auto d_tab = std::make_shared<std::vector<GridTable>>(n, GridTable(box.upper, grid));
  const GridTable& shape = h_tab->front();
  Point hx(n), dx(n);
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const Point x = shape.node(k);
    h.eval(x, hx);
    d.eval(x, dx);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 0.0 && hx[i] < -1e-12) {
        throw Error(ErrorCode::Assumption3Violated, "item 1: h" + std::to_string(i + 1) + " = " +
                                                        format_number(hx[i], 6) + " < 0 at x = " +
                                                        format_point(x, 6));
      }
      if (dx[i] < -1e-12) {
        throw Error(ErrorCode::Assumption3Violated, "item 2: d" + std::to_string(i + 1) + " = " +
                                                        format_number(dx[i], 6) + " < 0 at x = " +
                                                        format_point(x, 6));
      }
      (*h_tab)[i][k] = hx[i];
      (*d_tab)[i][k] = dx[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) (*h_tab)[i].prefix_max(j);
      (*d_tab)[i].prefix_max(j);
    }
  }
  std::shared_ptr<const std::vector<GridTable>> hs = h_tab;
  std::shared_ptr<const std::vector<GridTable>> ds = d_tab;
  auto gbar = [hs, ds](std::size_t i, std::span<const double> x, std::span<const double> y) {
    return (*hs)[i].interpolate(x) + (*ds)[i].interpolate(y);
  };
  auto jac_x = [hs](std::size_t i, std::size_t j, std::span<const double> x, std::span<const double>) {
    return (*hs)[i].partial(x, j);
  };
  auto jac_y = [ds](std::size_t i, std::size_t j, std::span<const double>, std::span<const double> y) {
    return (*ds)[i].partial(y, j);
  };
  return ComparisonField{DelayField::from_function(n, gbar, std::move(delays), jac_x, jac_y), hs, ds};
}

Report certify_nonmonotone_positive(const VectorField& h, const VectorField& d, double p, const BoxSet& box,
                                    const std::vector<DelayLaw>& laws, const NonMonotoneOptions& opts) {
  const std::size_t n = h.dimension();
  ComparisonField bound = comparison_field_bound(h, d, box, opts.grid);

  for (const auto& [name, field] : {std::pair{"h", &h}, std::pair{"d", &d}}) {
    const Report sub = check_sub_homogeneous(*field, p, box);
    if (sub.verdict() != Verdict::Pass) {
      throw Error(ErrorCode::Assumption3Violated,
                  std::string("item 3: ") + name + " is not sub-homogeneous of degree " + format_number(p, 6) +
                      " (witness x = " + format_point(sub.point("witness_x"), 6) + ")");
    }
  }
  const GridTable& shape = bound.h_sup->front();
  for (std::size_t k = 1; k < shape.size(); ++k) {
    bool dominated = false;
    for (std::size_t i = 0; i < n && !dominated; ++i) dominated = (*bound.d_sup)[i][k] < -(*bound.h_sup)[i][k];
    if (!dominated) {
      throw Error(ErrorCode::Assumption3Violated,
                  "item 4: no index with sup d_i < -sup h_i at x = " + format_point(shape.node(k), 6));
    }
  }

  const VectorField gbar0 = bound.field.induced();
  const SearchResult found = search_w(gbar0, box, opts.search);
  if (!found.w) {
    throw Error(ErrorCode::CertificationFailed, "no w certifies the delay-free comparison system on the box");
  }
  const Point& w = *found.w;

  Report rep("nonmonotone_positive", Verdict::Certified);
  rep.set("degree", p).set("grid", opts.grid).set("w", w).set("laws", laws.size());
  const auto phi = InitialHistory::constant(w);
  auto g_fn = [&h, &d](std::size_t i, std::span<const double> x, std::span<const double> y) {
    return h.component(i, x) + d.component(i, y);
  };
  double worst_gap = -std::numeric_limits<double>::infinity();
  double min_entry = std::numeric_limits<double>::infinity();
  std::size_t converged = 0;
  for (std::size_t k = 0; k < laws.size(); ++k) {
    IntegratorConfig cfg = opts.integrator;
    cfg.stop_on_convergence = false;
    const auto g = DelayField::from_function(n, g_fn, laws[k]);
    const Trajectory x = integrate_dde(g, phi, cfg);
    const Trajectory xbar = integrate_dde(bound.field.with_delays(laws[k]), phi, cfg);
    double gap = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < x.size(); ++s) {
      const double t = x.times()[s];
      for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, x.state(s)[i] - xbar.at(i, t));
    }
    const bool ok = x.terminal_norm() < opts.norm_tol && xbar.terminal_norm() < opts.norm_tol && gap <= 1e-6 &&
                    x.min_entry() >= -1e-9;
    converged += ok ? 1 : 0;
    worst_gap = std::max(worst_gap, gap);
    min_entry = std::min(min_entry, x.min_entry());
    const std::string tag = "law_" + std::to_string(k + 1);
    rep.set(tag, laws[k].describe())
        .set(tag + "_terminal_norm", x.terminal_norm())
        .set(tag + "_comparison_terminal_norm", xbar.terminal_norm())
        .set(tag + "_domination_gap", gap);
  }
  rep.set("max_domination_gap", worst_gap).set("min_state_entry", min_entry).set("converged", converged);
  if (converged != laws.size()) rep.set_verdict(Verdict::Fail);
  return rep;
}

}  // namespace monocert
