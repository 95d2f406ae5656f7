#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "monocert/certificates.hpp"
#include "monocert/random.hpp"

using namespace monocert;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

VectorField field(std::size_t n, const std::vector<std::string>& src) {
  return VectorField::from_system(ExprSystem::parse(n, src, VariableRoles::StateOnly));
}

VectorField planar() { return field(2, {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"}); }

IntegratorConfig long_run() {
  IntegratorConfig cfg;
  cfg.t_end = 1e6;
  return cfg;
}

}  // namespace

TEST_CASE("closed-form path inverses", "[certificates]") {
  auto check = [](const std::string& rho, double s) {
    const auto inv = invert_path_component(parse_expr(rho), 0);
    REQUIRE(inv);
    const double x = parse_expr(rho).eval({.s = s});
    const double xs[] = {x};
    CHECK_THAT(inv->eval({.x = xs}), WithinRel(s, 1e-12));
  };
  check("s", 0.7);
  check("sqrt(s)", 2.5);
  check("3*s + 1", 0.4);
  check("exp(s) - 1", 1.2);
  check("(s/2)^3", 1.9);
  CHECK_FALSE(invert_path_component(parse_expr("s + s^2"), 0));
  CHECK_FALSE(invert_path_component(parse_expr("1 - s"), 0));
}

TEST_CASE("path certificate", "[certificates]") {
  const auto f = planar();
  const auto good = certify_path(f, PathCandidate::parse({"s", "sqrt(s)"}, 4.0, {"s", "s"}));
  REQUIRE(good.status == Verdict::Certified);
  CHECK(*good.box == Point{4, 2});
  CHECK(good.lyap->describe() == "max{x1, x2^2}");
  CHECK(std::get<std::string>(good.report.get("lyapunov")) == "max{x1, x2^2}");
  CHECK(good.report.number("min_slack") >= -1e-12);

  const auto bad = certify_path(f, PathCandidate::parse({"s", "sqrt(s)"}, 5.0, {"s", "s"}));
  CHECK(bad.status == Verdict::Rejected);
  CHECK_FALSE(bad.box);
  CHECK(bad.report.has("witness_s"));

  const auto lnf = field(1, {"-ln(1 + x1)"});
  const auto path = PathCandidate::parse({"s"}, 1.0, {"s/4"});
  CHECK(certify_path(lnf, path).status == Verdict::Certified);
}

TEST_CASE("certificate by w", "[certificates]") {
  const auto f = planar();
  const auto ok = certify_by_w(f, Point{4, 2}, long_run());
  CHECK(ok.status == Verdict::Certified);
  CHECK(*ok.box == Point{4, 2});

  CHECK(certify_by_w(f, Point{4, 0.1}, long_run()).status == Verdict::Rejected);

  const auto bistable = field(1, {"-x1*(x1 - 1)"});
  const auto stuck = certify_by_w(bistable, Point{2}, long_run());
  CHECK(stuck.status == Verdict::Inconclusive);
  CHECK_THAT(stuck.report.point("terminal_state")[0], WithinAbs(1.0, 1e-3));

  CHECK_THROWS_AS(certify_by_w(f, Point{0, 1}, long_run()), Error);
}

TEST_CASE("search for w", "[certificates]") {
  SearchOptions opts;
  opts.trials = 40;
  opts.integrator = long_run();
  const auto found = search_w(planar(), BoxSet({10, 10}), opts);
  REQUIRE(found.w);
  const Point fw = planar()(*found.w);
  CHECK(fw[0] < 0);
  CHECK(fw[1] < 0);
  CHECK((*found.w)[0] <= 10);

  const auto unstable = search_w(VectorField::linear(Eigen::MatrixXd::Constant(1, 1, 1.0)), BoxSet({1}), opts);
  CHECK_FALSE(unstable.w);
  CHECK(unstable.report.verdict() == Verdict::Fail);
}

TEST_CASE("psi transform", "[certificates]") {
  const auto f = planar();
  const BoxSet box({4, 2});
  const auto same = apply_psi_transform(f, ScalingPsi::parse({"y1", "y2"}), box);
  const auto twice = apply_psi_transform(f, ScalingPsi::parse({"2*y1", "2*y2"}), box);
  for (std::uint64_t k = 0; k < 20; ++k) {
    auto rng = trial_rng(3, k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Point x{4 * u(rng), 2 * u(rng)};
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK_THAT(same.field.component(i, x), WithinAbs(f.component(i, x), 1e-14));
      CHECK_THAT(twice.field.component(i, x), WithinAbs(2 * f.component(i, x), 1e-13));
    }
  }
  CHECK(same.kamke.verdict() == Verdict::Pass);

  // positive state-dependent gains keep the Kamke condition
  const auto gain = apply_psi_transform(f, ScalingPsi::parse({"(1 + x1)*y1", "y2/(1 + x2^2)"}), box);
  CHECK(gain.kamke.verdict() == Verdict::Pass);

  CHECK_THROWS_AS(apply_psi_transform(f, ScalingPsi::parse({"-y1", "y2"}), box), Error);
}
