#include "monocert/delay.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

#include "monocert/certificates.hpp"

namespace monocert {

BoxSet roa_under_delay_t1(const DelayField& g, const MaxSepLyap& v, std::size_t grid) {
  if (v.dimension() != g.dimension()) throw Error(ErrorCode::DimensionMismatch, "V does not match the field");
  const auto rep = verify_decrease(v, g.induced(), BoxSet(v.box()), grid);
  if (rep.status != Verdict::Pass) {
    throw Error(ErrorCode::UncertifiedLyapunov,
                std::to_string(rep.violations) + " grid points violate D+V < 0 for g(x, x)");
  }
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.dimension(); ++i) c = std::min(c, v.component(i).value(v.box()[i]));
  Point corner(v.dimension());
  for (std::size_t i = 0; i < v.dimension(); ++i) {
    // the minimising components keep their box edge exactly
    const double vi = v.component(i).value(v.box()[i]);
    corner[i] = vi <= c ? v.box()[i] : std::min(v.component(i).inverse(c), v.box()[i]);
  }
  return BoxSet(std::move(corner));
}

BoxSet roa_under_delay_t2(const DelayField& g, const PathCandidate& path) {
  const auto cert = certify_path(g.induced(), path);
  if (cert.status != Verdict::Certified) {
    throw Error(ErrorCode::UncertifiedPath,
                "f(rho(s)) <= -alpha(s) fails at s = " + format_number(cert.report.number("witness_s"), 6));
  }
  return BoxSet(*cert.box);
}

BoxSet roa_under_delay_t3(const DelayField& g, std::span<const double> w, const IntegratorConfig& cfg) {
  const std::size_t n = g.dimension();
  if (w.size() != n) throw Error(ErrorCode::DimensionMismatch, "w does not match the field");
  for (double wi : w) {
    if (!(wi > 0.0)) throw Error(ErrorCode::PreconditionViolated, "w must be componentwise positive");
  }
  const Point gw = g(w, w);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gw[i] <= -1e-12)) {
      throw Error(ErrorCode::ConditionFailed, "g(w, w) < 0 fails in component " + std::to_string(i + 1) +
                                                  " (value " + format_number(gw[i], 6) + ")");
    }
  }
  IntegratorConfig run = cfg;
  run.stop_on_convergence = true;
  const Trajectory tr = integrate_ode(g.induced(), w, run);
  if (tr.termination != Termination::ConvergedToOrigin) {
    throw Error(ErrorCode::ConditionFailed, std::string("x(t, w) did not converge to the origin (") +
                                                to_string(tr.termination) + ", terminal state " +
                                                format_point(Point(tr.final_state().begin(), tr.final_state().end()), 6) + ")");
  }
  return BoxSet(Point(w.begin(), w.end()));
}

Report verify_box_invariance(const DelayField& g, const BoxSet& box, const InitialHistory& phi,
                             const IntegratorConfig& cfg) {
  const std::size_t n = g.dimension();
  if (box.dimension() != n || phi.dimension() != n) {
    throw Error(ErrorCode::DimensionMismatch, "box, history and field dimensions differ");
  }
  const Point top = phi.upper_bound();
  for (std::size_t i = 0; i < n; ++i) {
    if (top[i] > box.upper[i] + 1e-12) {
      throw Error(ErrorCode::PreconditionViolated, "initial history leaves the box in component " +
                                                       std::to_string(i + 1));
    }
  }
  const Point gv = g(box.upper, box.upper);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gv[i] < 0.0)) {
      throw Error(ErrorCode::PreconditionViolated,
                  "g(v, v) < 0 fails at the box corner in component " + std::to_string(i + 1));
    }
  }
  const Trajectory tr = integrate_dde(g, phi, cfg);
  const Point peak = tr.componentwise_max();
  double excursion = -std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (peak[i] - box.upper[i] > excursion) {
      excursion = peak[i] - box.upper[i];
      worst = i;
    }
  }
  Report rep("box_invariance", excursion <= kInvarianceTol ? Verdict::Pass : Verdict::Fail);
  rep.set("box", box.upper)
      .set("delays", g.delays().heterogeneous() ? std::string("per-pair") : g.delays().shared().describe())
      .set("max_excursion", excursion)
      .set("excursion_component", worst + 1)
      .set("peak", peak)
      .set("termination", to_string(tr.termination))
      .set("t_final", tr.t_front())
      .set("terminal_norm", tr.terminal_norm());
  if (tr.termination == Termination::ConvergedToOrigin) rep.set("t_converged", tr.t_converged);
  return rep;
}

double delay_horizon(const DelayLaw& law, double t_end) {
  if (law.kind() == DelayKind::Proportional && law.params().at(0) >= 0.9) return t_end / (1.0 - law.params()[0]);
  return t_end;
}

SweepResult sweep_delay_laws(const DelayField& g, const BoxSet& box, const std::vector<DelayLaw>& laws,
                             const IntegratorConfig& cfg, double norm_tol) {
  const auto phi = InitialHistory::constant(box.upper);
  auto run = [&](const DelayLaw& law) {
    SweepRow row;
    row.law = law.describe();
    row.t_converge = std::numeric_limits<double>::quiet_NaN();
    row.max_excursion = std::numeric_limits<double>::quiet_NaN();
    row.terminal_norm = std::numeric_limits<double>::quiet_NaN();
    try {
      IntegratorConfig c = cfg;
      c.t_end = delay_horizon(law, cfg.t_end);
      const Report rep = verify_box_invariance(g.with_delays(law), box, phi, c);
      row.max_excursion = rep.number("max_excursion");
      row.terminal_norm = rep.number("terminal_norm");
      const bool origin = std::get<std::string>(rep.get("termination")) == to_string(Termination::ConvergedToOrigin);
      row.converged = (origin || row.terminal_norm < norm_tol) && rep.verdict() == Verdict::Pass;
      if (origin) row.t_converge = rep.number("t_converged");
      else if (row.converged) row.t_converge = rep.number("t_final");
    } catch (const Error& e) {
      row.error = e.what();
    }
    return row;
  };

  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(laws.size());
  for (const DelayLaw& law : laws) jobs.push_back(std::async(std::launch::async, run, std::cref(law)));

  SweepResult out;
  std::size_t converged = 0;
  for (auto& job : jobs) {
    out.rows.push_back(job.get());
    converged += out.rows.back().converged ? 1 : 0;
  }
  out.report.set_verdict(converged == laws.size() ? Verdict::Pass : Verdict::Fail);
  out.report.set("box", box.upper).set("laws", laws.size()).set("converged", converged);
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    if (!out.rows[k].error.empty()) out.report.set("error_law_" + std::to_string(k + 1), out.rows[k].error);
  }
  return out;
}

void SweepResult::write_csv(std::ostream& os) const {
  os << "law_id,converged,t_converge,max_excursion,terminal_norm\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const SweepRow& r = rows[k];
    os << (k + 1) << ',' << (r.converged ? "true" : "false") << ',' << format_number(r.t_converge, 17) << ','
       << format_number(r.max_excursion, 17) << ',' << format_number(r.terminal_norm, 17) << '\n';
  }
}

Trajectory simulate_heterogeneous(const DelayField& g, std::vector<std::vector<DelayLaw>> laws,
                                  const InitialHistory& phi, const IntegratorConfig& cfg) {
  if (laws.size() != g.dimension()) throw Error(ErrorCode::DimensionMismatch, "delay table must be n x n");
  return integrate_dde(g.with_delays(DelaySchedule(std::move(laws))), phi, cfg);
}

}  // namespace monocert
