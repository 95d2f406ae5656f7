#include "monocert/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>

#include "monocert/certificates.hpp"
#include "monocert/config.hpp"
#include "monocert/delay.hpp"
#include "monocert/linear.hpp"
#include "monocert/lyapunov.hpp"
#include "monocert/monotone.hpp"
#include "monocert/random.hpp"

namespace monocert {

namespace {

struct Common {
  std::string config;
  std::string format = "text";
  std::optional<double> tend;
  double rtol = 1e-8;
  std::optional<double> atol;
  std::uint64_t seed = kDefaultSeed;
  std::size_t grid = 0;  // 0 keeps the per-command default
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "system config file")->required();
  cmd->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "csv"}));
  cmd->add_option("--seed", c.seed, "master seed for randomized steps");
  cmd->add_option("--grid", c.grid, "grid points per axis");
  cmd->add_option("--tend", c.tend, "integration horizon");
  cmd->add_option("--rtol", c.rtol, "relative tolerance");
  cmd->add_option("--atol", c.atol, "absolute tolerance");
}

IntegratorConfig integrator(const Common& c, double tend, double atol) {
  IntegratorConfig cfg;
  cfg.t_end = c.tend.value_or(tend);
  cfg.rtol = c.rtol;
  cfg.atol = c.atol.value_or(atol);
  cfg.validate();
  return cfg;
}

void emit(const Report& rep, const Common& c, std::ostream& out) {
  if (c.format == "csv") {
    rep.write_csv(out);
  } else {
    rep.write_text(out);
  }
}

int exit_code(Verdict v) { return is_success(v) ? 0 : 1; }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  return f;
}

int check_monotone(const Common& c, std::size_t trials, bool use_psi, std::ostream& out) {
  const auto cfg = SystemConfig::load(c.config);
  const BoxSet box = cfg.region();
  GridOptions grid;
  if (c.grid) grid.per_axis = c.grid;
  std::optional<VectorField> scaled;
  if (use_psi) {
    if (!cfg.psi) throw Error(ErrorCode::InvalidConfig, c.config + ": --psi needs a psi entry");
    scaled = apply_psi_transform(cfg.field(), *cfg.psi, box).field;
  }
  const bool delayed = (cfg.g || (cfg.a && cfg.b)) && !cfg.f && !scaled;
  Report rep = delayed ? check_assumption2(cfg.delay_field(DelayLaw::zero()), box, grid)
                       : check_kamke(scaled ? *scaled : cfg.field(), box, grid);
  if (scaled) rep.set("field", "psi(x, f(x))");
  emit(rep, c, out);
  Verdict v = rep.verdict();
  if (trials > 0) {
    EmpiricalOptions opts;
    opts.trials = trials;
    opts.seed = c.seed;
    opts.integrator = integrator(c, 10, 1e-10);
    opts.horizon = opts.integrator.t_end;
    const Report emp = check_monotone_empirical(scaled ? *scaled : cfg.field(), box, opts);
    out << '\n';
    emit(emp, c, out);
    if (emp.verdict() != Verdict::Pass) v = Verdict::Fail;
  }
  return exit_code(v);
}

int certify(const Common& c, const std::string& method, double margin, const std::string& emit_lyap,
            std::ostream& out) {
  const auto cfg = SystemConfig::load(c.config);
  const std::size_t grid = c.grid ? c.grid : 64;
  std::optional<MaxSepLyap> lyap;
  Report rep("certify", Verdict::Inconclusive);

  if (method == "path") {
    if (!cfg.path) throw Error(ErrorCode::InvalidConfig, c.config + ": method path needs path.rho and path.sbar");
    const VectorField f = cfg.field();
    auto res = certify_path(f, *cfg.path);
    rep = res.report;
    if (res.status == Verdict::Certified) {
      const auto dec = verify_decrease(*res.lyap, f, BoxSet(*res.box), grid, margin);
      rep.set("decrease", to_string(dec.status))
          .set("decrease_samples", dec.samples)
          .set("decrease_violations", dec.violations)
          .set("min_decay_ratio", dec.min_decay_ratio);
      lyap = std::move(res.lyap);
    }
  } else if (method == "w") {
    const VectorField f = cfg.field();
    const IntegratorConfig run = integrator(c, 1e6, 1e-12);
    Point w;
    if (cfg.w) {
      w = *cfg.w;
    } else {
      SearchOptions opts;
      opts.seed = c.seed;
      opts.integrator = run;
      const auto found = search_w(f, cfg.region(), opts);
      if (!found.w) {
        rep = found.report;
        rep.set_verdict(Verdict::Inconclusive);
        emit(rep, c, out);
        return 1;
      }
      w = *found.w;
    }
    const auto res = certify_by_w(f, w, run);
    rep = res.report;
    if (res.status == Verdict::Certified && !emit_lyap.empty()) {
      lyap = construct_from_trajectory(f, w, run).lyap;
    }
  } else {
    if (!cfg.a) throw Error(ErrorCode::InvalidConfig, c.config + ": method linear needs A");
    const Eigen::MatrixXd a = cfg.b ? Eigen::MatrixXd(*cfg.a + *cfg.b) : *cfg.a;
    const MetzlerMatrix m(a);
    rep = Report("certify_linear", Verdict::Rejected);
    rep.set("method", "linear").set("spectral_abscissa", spectral_abscissa(a));
    if (const auto w = find_positive_w(m)) {
      const Point wp(w->data(), w->data() + w->size());
      const Eigen::VectorXd aw = a * *w;
      rep.set_verdict(Verdict::Certified);
      rep.set("w", wp).set("A_w", Point(aw.data(), aw.data() + aw.size())).set("box", wp);
      const Report dstab = check_d_stability_linear(m, 20, c.seed);
      rep.set("d_stability", to_string(dstab.verdict()));
      lyap = linear_max_sep_lyap(m, *w);
    } else {
      rep.set("reason", "no w > 0 with A w < 0");
    }
  }

  if (lyap && !emit_lyap.empty() && is_success(rep.verdict())) {
    auto f = open_out(emit_lyap);
    lyap->write_csv(f);
    rep.set("lyapunov_table", emit_lyap);
  }
  emit(rep, c, out);
  return exit_code(rep.verdict());
}

int simulate(const Common& c, const std::string& law_spec, std::ostream& out) {
  const auto cfg = SystemConfig::load(c.config);
  const IntegratorConfig run = integrator(c, 1000, 1e-10);
  const bool delayed = cfg.has_delay_field() && (!law_spec.empty() || cfg.delay || !cfg.f);
  Trajectory tr(cfg.dimension);
  Report rep("simulate", Verdict::Pass);
  if (delayed) {
    const DelayLaw law = law_spec.empty() ? cfg.delay.value_or(DelayLaw::zero()) : DelayLaw::parse(law_spec);
    tr = integrate_dde(cfg.delay_field(law), cfg.initial_history(), run);
    rep.set("delay", law.describe());
  } else {
    if (!law_spec.empty()) throw Error(ErrorCode::InvalidConfig, c.config + ": --law needs a delayed field");
    const Point x0 = cfg.x0 ? *cfg.x0 : cfg.w ? *cfg.w : cfg.region().upper;
    tr = integrate_ode(cfg.field(), x0, run);
  }
  rep.set("termination", to_string(tr.termination))
      .set("steps", tr.size() - 1)
      .set("t_final", tr.t_front())
      .set("terminal_state", Point(tr.final_state().begin(), tr.final_state().end()))
      .set("terminal_norm", tr.terminal_norm())
      .set("min_entry", tr.min_entry());
  if (tr.termination == Termination::ConvergedToOrigin) rep.set("t_converged", tr.t_converged);
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    tr.write_csv(f);
    rep.set("trajectory", c.out);
  }
  emit(rep, c, out);
  return 0;
}

int sweep(const Common& c, const std::string& laws_path, std::ostream& out) {
  const auto cfg = SystemConfig::load(c.config);
  const auto laws = load_delay_laws(laws_path);
  const IntegratorConfig run = integrator(c, 1000, 1e-10);
  const auto res = sweep_delay_laws(cfg.delay_field(DelayLaw::zero()), cfg.region(), laws, run);
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    res.write_csv(f);
  }
  Report rep = res.report;
  if (!c.out.empty()) rep.set("table", c.out);
  emit(rep, c, out);
  return exit_code(rep.verdict());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certification and simulation of monotone nonlinear systems", "monocert"};
  app.require_subcommand(1);

  Common c;
  std::size_t trials = 0;
  bool use_psi = false;
  std::string method = "path";
  double margin = 1e-9;
  std::string emit_lyap;
  std::string law;
  std::string laws_path;

  auto* mono = app.add_subcommand("check-monotone", "Kamke / order-preservation check on the config box");
  add_common(mono, c);
  mono->add_option("--trials", trials, "extra trajectory-ordering trials");
  mono->add_flag("--psi", use_psi, "check the scaled field psi(x, f(x)) instead of f");

  auto* cert = app.add_subcommand("certify", "stability certificate and ROA box");
  add_common(cert, c);
  cert->add_option("--method", method, "certificate route")->check(CLI::IsMember({"path", "w", "linear"}));
  cert->add_option("--margin", margin, "slack for the sampled decrease check");
  cert->add_option("--emit-lyap", emit_lyap, "write the Lyapunov table CSV here");

  auto* sim = app.add_subcommand("simulate", "integrate the ODE or DDE");
  add_common(sim, c);
  sim->add_option("--law", law, "delay law, e.g. prop:0.5");
  sim->add_option("--out", c.out, "trajectory CSV");

  auto* sw = app.add_subcommand("sweep", "run every delay law from the box corner");
  add_common(sw, c);
  sw->add_option("--laws", laws_path, "file with one law per line")->required();
  sw->add_option("--out", c.out, "per-law CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (mono->parsed()) return check_monotone(c, trials, use_psi, out);
    if (cert->parsed()) return certify(c, method, margin, emit_lyap, out);
    if (sim->parsed()) return simulate(c, law, out);
    return sweep(c, laws_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace monocert
