// Acceptance runner: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "monocert/certificates.hpp"
#include "monocert/delay.hpp"
#include "monocert/homogeneity.hpp"
#include "monocert/linear.hpp"
#include "monocert/lyapunov.hpp"
#include "monocert/monotone.hpp"
#include "monocert/random.hpp"

using namespace monocert;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_number(v, 6); }

VectorField field(std::size_t n, const std::vector<std::string>& src) {
  return VectorField::from_system(ExprSystem::parse(n, src, VariableRoles::StateOnly));
}

VectorField planar() { return field(2, {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"}); }

std::string coef(double c) { return "(" + format_number(c, 17) + ")"; }

Outcome planar_path() {
  const auto t0 = Clock::now();
  const auto f = planar();
  const auto cert = certify_path(f, PathCandidate::parse({"s", "sqrt(s)"}, 4.0, {"s", "s"}));
  if (cert.status != Verdict::Certified) return {false, "path rejected, min slack " + fmt(cert.report.number("min_slack"))};
  const std::string v = cert.lyap->describe();
  const auto dec = verify_decrease(*cert.lyap, f, BoxSet(*cert.box), 64);
  const double dt = seconds_since(t0);
  const bool ok = v == "max{x1, x2^2}" && *cert.box == Point{4, 2} && dec.status == Verdict::Pass &&
                  dec.violations == 0 && dt < 5.0;
  return {ok, "V = " + v + ", box " + format_point(*cert.box, 6) + ", violations " +
                  std::to_string(dec.violations) + "/" + std::to_string(dec.samples) + ", " + fmt(dt) + " s"};
}

Outcome planar_psi() {
  const auto f = planar();
  const BoxSet box({4, 2});
  const auto psi = ScalingPsi::parse({"x1/(x1^2 + 1)*y1^3", "x2^2*y2"});
  const auto h = apply_psi_transform(f, psi, box);
  IntegratorConfig cfg;
  cfg.t_end = 200;
  cfg.stop_on_convergence = false;
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    auto rng = trial_rng(kDefaultSeed, k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Point x0{4 * u(rng), 2 * u(rng)};
    const auto tr = integrate_ode(h.field, x0, cfg);
    const double norm = tr.terminal_norm();
    worst = std::max(worst, norm);
    ok += norm < 1e-4 ? 1 : 0;
  }
  return {ok == 10, std::to_string(ok) + "/10 runs reach |x(200)| < 1e-4, worst |x(200)| = " + fmt(worst) +
                        ", transformed Kamke " + to_string(h.kamke.verdict())};
}

Outcome planar_delays() {
  const auto t0 = Clock::now();
  const auto g = DelayField::from_system(
      ExprSystem::parse(2, {"-5*x1 + x1*y2^2", "y1 - 2*x2^2"}, VariableRoles::StateAndDelayed), DelayLaw::zero());
  IntegratorConfig cfg;
  cfg.t_end = 1000;
  const std::vector<DelayLaw> laws{DelayLaw::zero(), DelayLaw::constant(2), DelayLaw::sinusoid(1, 0.5, 1),
                                   DelayLaw::proportional(0.5)};
  const auto res = sweep_delay_laws(g, BoxSet({4, 2}), laws, cfg, 1e-3);
  const double dt = seconds_since(t0);
  bool ok = dt < 30.0 && res.rows.size() == laws.size();
  std::string detail;
  for (const auto& r : res.rows) {
    ok = ok && r.error.empty() && r.terminal_norm < 1e-3 && r.max_excursion <= 1e-6;
    detail += r.law + " |x(T)| = " + fmt(r.terminal_norm) + " excursion " + fmt(r.max_excursion) + "; ";
  }
  return {ok, detail + fmt(dt) + " s"};
}

Outcome bistable() {
  IntegratorConfig cfg;
  cfg.t_end = 1e6;
  const auto res = certify_by_w(field(1, {"-x1*(x1 - 1)"}), Point{2}, cfg);
  const double terminal = res.report.point("terminal_state").at(0);
  return {res.status != Verdict::Certified && std::abs(terminal - 1.0) <= 1e-4,
          std::string("status ") + to_string(res.status) + ", terminal state " + format_number(terminal, 10)};
}

Outcome linear_sweep() {
  const auto t0 = Clock::now();
  std::size_t disagreements = 0, hurwitz = 0, dstab_fail = 0;
  for (std::size_t k = 0; k < 200; ++k) {
    auto rng = trial_rng(kDefaultSeed + 5, k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 6) % 6;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (i != j && u(rng) < 0.6) {
          a(i, j) = u(rng);
          row += a(i, j);
        }
      }
      a(i, i) = -(row + 0.2) * (0.4 + 1.2 * u(rng));
    }
    const MetzlerMatrix m(a);
    const bool stable = is_hurwitz(a);
    const bool feasible = find_positive_w(m).has_value();
    disagreements += stable != feasible ? 1 : 0;
    if (stable) {
      ++hurwitz;
      dstab_fail += check_d_stability_linear(m, 20, kDefaultSeed + k).verdict() == Verdict::Pass ? 0 : 1;
    }
  }
  const double dt = seconds_since(t0);
  return {disagreements == 0 && dstab_fail == 0 && dt < 10.0,
          std::to_string(disagreements) + " disagreements over 200 matrices (" + std::to_string(hurwitz) +
              " Hurwitz), " + std::to_string(dstab_fail) + " failed scalings, " + fmt(dt) + " s"};
}

Outcome dini_oracle() {
  const std::vector<std::string> shapes{"x", "x^2", "exp(x) - 1", "x + x^3", "sqrt(x)", "ln(1 + x)"};
  std::size_t agree = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < 1000; ++k) {
    auto rng = trial_rng(kDefaultSeed + 6, k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 2 + static_cast<std::size_t>(u(rng) * 3) % 3;
    std::vector<LyapComponent> comps;
    std::vector<std::string> src;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& shape = shapes[static_cast<std::size_t>(u(rng) * shapes.size()) % shapes.size()];
      const std::string xi = "x" + std::to_string(i + 1);
      // substitute x_i for x, leaving the x in exp alone
      std::string v;
      for (std::size_t p = 0; p < shape.size(); ++p) {
        if (shape[p] == 'x' && (p == 0 || shape[p - 1] != 'e')) {
          v += xi;
        } else {
          v += shape[p];
        }
      }
      comps.push_back(LyapComponent::expression(parse_expr(coef(0.5 + u(rng)) + "*(" + v + ")"), i));
      std::string fi = "-" + coef(1 + u(rng)) + "*" + xi;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) fi += " + " + coef(u(rng)) + "*x" + std::to_string(j + 1) + "^2";
      }
      src.push_back(fi);
    }
    const MaxSepLyap v(std::move(comps), Point(n, 1.0));
    const auto f = field(n, src);
    Point x(n);
    for (double& xi : x) xi = 0.05 + 0.95 * u(rng);
    const double exact = dini_derivative(v, f, x);
    const double est = dini_forward_estimate(v, f, x);
    const double rel = std::abs(est - exact) / std::abs(exact);
    worst = std::max(worst, rel);
    agree += rel <= 1e-5 ? 1 : 0;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 agree, worst relative gap " + fmt(worst)};
}

Outcome construction() {
  const auto f = planar();
  IntegratorConfig cfg;
  cfg.t_end = 1e6;
  cfg.atol = 1e-12;
  const auto c = construct_from_trajectory(f, Point{4, 2}, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.omega.size(); ++k) {
    worst = std::max(worst, std::abs(c.lyap.value(c.omega.state(k)) - std::exp(-c.omega.times()[k])));
  }
  const auto dec = verify_decrease(c.lyap, f, BoxSet({4, 2}), 64);
  return {worst <= 1e-6 && dec.min_decay_ratio >= 1 - 1e-3,
          "max |V(w(t)) - exp(-t)| = " + fmt(worst) + " over " + std::to_string(c.omega.size()) +
              " nodes, min -D+V/V = " + format_number(dec.min_decay_ratio, 9)};
}

Outcome monotone_suite() {
  std::size_t kamke_pass = 0, ordered = 0;
  double gap = 0.0, min_entry = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    auto rng = trial_rng(kDefaultSeed + 8, k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 2 + static_cast<std::size_t>(u(rng) * 3) % 3;
    std::vector<std::string> src;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string xi = "x" + std::to_string(i + 1);
      std::string fi = "-" + coef(1 + 2 * u(rng)) + "*" + xi + " - " + coef(u(rng)) + "*" + xi + "^3";
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::string xj = "x" + std::to_string(j + 1);
        if (u(rng) < 0.7) fi += " + " + coef(u(rng)) + "*" + xj;
        if (u(rng) < 0.4) fi += " + " + coef(0.5 * u(rng)) + "*" + xi + "*" + xj;
        if (u(rng) < 0.3) fi += " + " + coef(0.3 * u(rng)) + "*" + xj + "^2";
      }
      src.push_back(fi);
    }
    const auto f = field(n, src);
    const BoxSet box(Point(n, 2.0));
    if (check_kamke(f, box, {.per_axis = 12}).verdict() != Verdict::Pass) continue;
    ++kamke_pass;
    EmpiricalOptions opts;
    opts.trials = 10;
    opts.seed = kDefaultSeed + k;
    const Report emp = check_monotone_empirical(f, box, opts);
    gap = std::max(gap, emp.number("max_order_gap"));
    min_entry = std::min(min_entry, emp.number("min_state_entry"));
    ordered += emp.verdict() == Verdict::Pass && emp.number("min_state_entry") >= -1e-9 ? 1 : 0;
  }
  return {kamke_pass == 50 && ordered == 50,
          std::to_string(kamke_pass) + "/50 pass Kamke, " + std::to_string(ordered) +
              " keep order, max order gap " + fmt(gap) + ", min entry " + fmt(min_entry)};
}

Outcome homogeneity() {
  const auto f = field(2, {"-x1^3", "x1^3 - x2^3"});
  const Dilation dil = Dilation::standard(2, 2);
  const auto hom = check_homogeneous(f, dil, BoxSet({5, 5}));
  const Point w{1, 2};
  const Point fw = f(w);
  double worst = 0.0;
  std::size_t certified = 0;
  for (double sbar : {1.0, 10.0, 100.0}) {
    const auto path = homogeneous_path(f, dil, w, sbar);
    certified += certify_path(f, path).status == Verdict::Certified ? 1 : 0;
    for (int k = 1; k <= 50; ++k) {
      const double s = sbar * k / 50.0;
      const Point direct = f(path.point(s));
      const Point scaled = dil.apply(std::pow(s, 1.0 / dil.r_max()), fw);
      for (std::size_t i = 0; i < 2; ++i) {
        const double predicted = std::pow(s, dil.p / dil.r_max()) * scaled[i];
        worst = std::max(worst, std::abs(direct[i] - predicted) / std::abs(predicted));
      }
    }
  }
  return {hom.verdict() == Verdict::Pass && worst <= 1e-9 && certified == 3,
          "homogeneity " + std::string(to_string(hom.verdict())) + ", identity residual " + fmt(worst) + ", " +
              std::to_string(certified) + "/3 paths certified"};
}

Outcome comparison() {
  NonMonotoneOptions opts;
  opts.integrator.t_end = 60;
  opts.search.trials = 20;
  opts.search.integrator.t_end = 200;
  const auto rep = certify_nonmonotone_positive(field(2, {"-4*x1", "-4*x2"}), field(2, {"x2", "x1"}), 1,
                                                BoxSet({2, 2}),
                                                {DelayLaw::constant(1), DelayLaw::proportional(0.5)}, opts);
  const double gap = rep.number("max_domination_gap");
  return {rep.verdict() == Verdict::Certified && gap <= 1e-6 && rep.number("converged") == 2,
          "max x(g) - x(gbar) = " + fmt(gap) + ", |x(T)| " + fmt(rep.number("law_1_terminal_norm")) + " and " +
              fmt(rep.number("law_2_terminal_norm"))};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"planar path certificate", planar_path},
      {"planar psi-scaled convergence", planar_psi},
      {"planar delay robustness", planar_delays},
      {"bistable counterexample", bistable},
      {"linear equivalence sweep", linear_sweep},
      {"Dini derivative oracle", dini_oracle},
      {"trajectory construction", construction},
      {"monotonicity property suite", monotone_suite},
      {"homogeneous paths", homogeneity},
      {"non-monotone comparison", comparison},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (std::size_t k = 0; k < criteria().size(); ++k) {
    if (only != 0 && static_cast<std::size_t>(only) != k + 1) continue;
    const auto& [name, run] = criteria()[k];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu (%s): %s: %s\n", k + 1, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
