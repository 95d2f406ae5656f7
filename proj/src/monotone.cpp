#include "monocert/monotone.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "monocert/lyapunov.hpp"
#include "monocert/random.hpp"

namespace monocert {

namespace {

struct Witness {
  bool found = false;
  double value = std::numeric_limits<double>::infinity();
  Point x, y;
  std::string entry;
};

void record(Witness& w, double v, const Point& x, const Point* y, std::string entry) {
  if (v < w.value) {
    w.value = v;
    w.x = x;
    if (y) w.y = *y;
    w.entry = std::move(entry);
  }
}

std::string partial(const char* var, std::size_t i, std::size_t j) {
  return "d g" + std::to_string(i + 1) + "/d " + var + std::to_string(j + 1);
}

}  // namespace

Report check_kamke(const VectorField& f, const BoxSet& box, const GridOptions& grid) {
  const std::size_t n = f.dimension();
  if (box.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "box does not match the field");
  const auto pts = box_grid(box.upper, grid.per_axis, grid.cap);
  Witness w;
  for (const Point& x : pts) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = f.jacobian(i, j, x);
        record(w, std::isnan(d) ? -std::numeric_limits<double>::infinity() : d, x, nullptr,
               "d f" + std::to_string(i + 1) + "/d x" + std::to_string(j + 1));
      }
    }
  }
  const bool ok = n == 1 || w.value >= -grid.tol;
  Report r("kamke", ok ? Verdict::Pass : Verdict::Fail);
  r.set("grid_points", pts.size())
      .set("jacobian", f.has_analytic_jacobian() ? "symbolic" : "finite-difference")
      .set("confidence", f.is_smooth() ? "full" : "reduced")
      .set("tolerance", grid.tol);
  if (n > 1) r.set("min_offdiagonal", w.value).set("min_entry", w.entry).set("min_point", w.x);
  if (!ok) r.set("witness_point", w.x).set("witness_entry", w.entry).set("witness_value", w.value);
  return r;
}

Report check_assumption2(const DelayField& g, const BoxSet& box, const GridOptions& grid) {
  const std::size_t n = g.dimension();
  if (box.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "box does not match the field");
  // split the point budget between the x and y factors
  const auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(grid.cap)));
  const auto pts = box_grid(box.upper, grid.per_axis, std::max<std::size_t>(side, 4));
  Witness wx, wy;
  for (const Point& x : pts) {
    for (const Point& y : pts) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) record(wx, g.jacobian_x(i, j, x, y), x, &y, partial("x", i, j));
          record(wy, g.jacobian_y(i, j, x, y), x, &y, partial("y", i, j));
        }
      }
    }
  }
  const bool kamke_ok = n == 1 || wx.value >= -grid.tol;
  const bool order_ok = wy.value >= -grid.tol;
  Report r("assumption2", kamke_ok && order_ok ? Verdict::Pass : Verdict::Fail);
  r.set("grid_points", pts.size() * pts.size())
      .set("jacobian", g.has_analytic_jacobian() ? "symbolic" : "finite-difference")
      .set("kamke_in_x", kamke_ok)
      .set("order_preserving_in_y", order_ok)
      .set("tolerance", grid.tol);
  const Witness* bad = !order_ok ? &wy : (!kamke_ok ? &wx : nullptr);
  if (bad) {
    r.set("witness_x", bad->x).set("witness_y", bad->y).set("witness_entry", bad->entry).set("witness_value",
                                                                                               bad->value);
  }
  return r;
}

Report check_monotone_empirical(const VectorField& f, const BoxSet& box, const EmpiricalOptions& opts) {
  const std::size_t n = f.dimension();
  if (box.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "box does not match the field");
  IntegratorConfig cfg = opts.integrator;
  cfg.t_end = opts.horizon;
  cfg.stop_on_convergence = false;
  cfg.stall_rate = 0.0;

  double worst = -std::numeric_limits<double>::infinity();
  double min_entry = std::numeric_limits<double>::infinity();
  Point bad_hi, bad_lo;
  double bad_t = 0.0;
  std::size_t violations = 0;
  for (std::size_t k = 0; k < opts.trials; ++k) {
    auto rng = trial_rng(opts.seed, k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point hi(n), lo(n);
    for (std::size_t i = 0; i < n; ++i) {
      hi[i] = box.upper[i] * unit(rng);
      lo[i] = hi[i] * unit(rng);
    }
    const Trajectory a = integrate_ode(f, hi, cfg);
    const Trajectory b = integrate_ode(f, lo, cfg);
    min_entry = std::min({min_entry, a.min_entry(), b.min_entry()});
    bool violated = false;
    for (std::size_t s = 0; s < opts.samples; ++s) {
      const double t = opts.horizon * static_cast<double>(s) / static_cast<double>(opts.samples - 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double gap = b.at(i, t) - a.at(i, t);  // must be <= tol
        if (gap > worst) {
          worst = gap;
          if (gap > opts.tol) {
            bad_hi = hi;
            bad_lo = lo;
            bad_t = t;
          }
        }
        violated = violated || gap > opts.tol;
      }
    }
    if (violated) ++violations;
  }
  Report r("monotone_empirical", violations == 0 ? Verdict::Pass : Verdict::Fail);
  r.set("trials", opts.trials)
      .set("seed", static_cast<std::int64_t>(opts.seed))
      .set("horizon", opts.horizon)
      .set("max_order_gap", worst)
      .set("min_state_entry", min_entry)
      .set("violating_pairs", violations);
  if (violations > 0) r.set("witness_upper", bad_hi).set("witness_lower", bad_lo).set("witness_time", bad_t);
  return r;
}

}  // namespace monocert
