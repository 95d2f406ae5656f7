#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "monocert/certificates.hpp"
#include "monocert/delay.hpp"

using namespace monocert;
using Catch::Matchers::WithinAbs;

namespace {

DelayField planar_delayed(DelaySchedule delays = DelayLaw::zero()) {
  return DelayField::from_system(
      ExprSystem::parse(2, {"-5*x1 + x1*y2^2", "y1 - 2*x2^2"}, VariableRoles::StateAndDelayed), std::move(delays));
}

MaxSepLyap planar_v() {
  return MaxSepLyap({LyapComponent::expression(parse_expr("x1"), 0), LyapComponent::expression(parse_expr("x2^2"), 1)},
                    {4, 2});
}

int error_code(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

}  // namespace

TEST_CASE("delay tests T1 to T3", "[delay]") {
  const auto g = planar_delayed();
  CHECK(roa_under_delay_t1(g, planar_v()).upper == Point{4, 2});

  const auto path = PathCandidate::parse({"s", "sqrt(s)"}, 4.0, {"s", "s"});
  CHECK(roa_under_delay_t2(g, path).upper == Point{4, 2});
  CHECK(error_code([&] { (void)roa_under_delay_t2(g, PathCandidate::parse({"s", "sqrt(s)"}, 5.0, {"s", "s"})); }) ==
        static_cast<int>(ErrorCode::UncertifiedPath));

  // T1 and T2 agree when V_i is the path inverse
  const auto cert = certify_path(g.induced(), path);
  CHECK(roa_under_delay_t1(g, *cert.lyap).upper == roa_under_delay_t2(g, path).upper);

  IntegratorConfig cfg;
  cfg.t_end = 1e6;
  CHECK(roa_under_delay_t3(g, Point{4, 2}, cfg).upper == Point{4, 2});
  const auto bistable = DelayField::from_system(ExprSystem::parse(1, {"-x1*(y1 - 1)"}, VariableRoles::StateAndDelayed),
                                              DelayLaw::constant(1));
  CHECK(error_code([&] { (void)roa_under_delay_t3(bistable, Point{2}, cfg); }) ==
        static_cast<int>(ErrorCode::ConditionFailed));
  CHECK(error_code([&] { (void)roa_under_delay_t3(g, Point{0, 2}, cfg); }) ==
        static_cast<int>(ErrorCode::PreconditionViolated));

  // scalar linear V: the corner is v itself
  const MaxSepLyap lin({LyapComponent::linear(1.0)}, {3});
  const auto scalar = DelayField::linear(Eigen::MatrixXd::Constant(1, 1, -2.0), Eigen::MatrixXd::Constant(1, 1, 1.0),
                                         DelayLaw::constant(1));
  CHECK(roa_under_delay_t1(scalar, lin).upper == Point{3});

  const auto unstable = DelayField::linear(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Constant(1, 1, 2.0),
                                           DelayLaw::constant(1));
  CHECK(error_code([&] { (void)roa_under_delay_t1(unstable, lin); }) ==
        static_cast<int>(ErrorCode::UncertifiedLyapunov));
}

TEST_CASE("box invariance along delayed trajectories", "[delay]") {
  IntegratorConfig cfg;
  cfg.t_end = 200;
  const BoxSet box({4, 2});
  const auto phi = InitialHistory::constant({4, 2});
  for (const char* law : {"prop:0.5", "sin:1,0.5,1"}) {
    const auto rep = verify_box_invariance(planar_delayed(DelayLaw::parse(law)), box, phi, cfg);
    CHECK(rep.verdict() == Verdict::Pass);
    CHECK(rep.number("max_excursion") <= kInvarianceTol);
  }
  CHECK(error_code([&] { (void)verify_box_invariance(planar_delayed(), BoxSet({4, 0.1}), InitialHistory::constant({4, 0.1}),
                                                     cfg); }) == static_cast<int>(ErrorCode::PreconditionViolated));
  CHECK(error_code([&] { (void)verify_box_invariance(planar_delayed(), BoxSet({4, 2}), InitialHistory::constant({5, 2}),
                                                     cfg); }) == static_cast<int>(ErrorCode::PreconditionViolated));
}

TEST_CASE("sweep over delay laws", "[delay]") {
  IntegratorConfig cfg;
  cfg.t_end = 1000;
  const std::vector<DelayLaw> laws{DelayLaw::zero(), DelayLaw::constant(2), DelayLaw::sinusoid(1, 0.5, 1),
                                   DelayLaw::proportional(0.5)};
  const auto res = sweep_delay_laws(planar_delayed(), BoxSet({4, 2}), laws, cfg);
  CHECK(res.report.verdict() == Verdict::Pass);
  REQUIRE(res.rows.size() == 4);
  for (const auto& row : res.rows) {
    CHECK(row.converged);
    CHECK(row.terminal_norm < 1e-3);
    CHECK(row.max_excursion <= kInvarianceTol);
  }
  std::ostringstream csv;
  res.write_csv(csv);
  CHECK(csv.str().rfind("law_id,converged,t_converge,max_excursion,terminal_norm\n1,true,", 0) == 0);

  CHECK(sweep_delay_laws(planar_delayed(), BoxSet({4, 2}), {}, cfg).report.verdict() == Verdict::Pass);
  CHECK_THROWS_AS(DelayLaw::parse("prop:1"), Error);
  CHECK(delay_horizon(DelayLaw::proportional(0.95), 200) == Catch::Approx(4000));
  CHECK(delay_horizon(DelayLaw::proportional(0.5), 200) == 200);
}

TEST_CASE("heterogeneous delays", "[delay]") {
  IntegratorConfig cfg;
  cfg.t_end = 1000;
  const auto phi = InitialHistory::constant({4, 2});
  const auto zero = DelayLaw::zero();
  const auto tr = simulate_heterogeneous(
      planar_delayed(), {{zero, DelayLaw::proportional(0.3)}, {DelayLaw::constant(2), zero}}, phi, cfg);
  CHECK(tr.terminal_norm() < 1e-3);

  const auto law = DelayLaw::constant(1.5);
  cfg.t_end = 50;
  const auto same = simulate_heterogeneous(planar_delayed(), {{law, law}, {law, law}}, phi, cfg);
  const auto shared = integrate_dde(planar_delayed(law), phi, cfg);
  for (double t : {1.0, 7.3, 25.0, 50.0}) {
    for (std::size_t i = 0; i < 2; ++i) CHECK_THAT(same.at(i, t), WithinAbs(shared.at(i, t), 1e-7));
  }
  CHECK_THROWS_AS(DelayLaw::parse("expr:t"), Error);
}

TEST_CASE("zero delay reproduces the ODE", "[delay]") {
  IntegratorConfig cfg;
  cfg.t_end = 20;
  const auto dde = integrate_dde(planar_delayed(), InitialHistory::constant({4, 2}), cfg);
  const auto ode = integrate_ode(planar_delayed().induced(), Point{4, 2}, cfg);
  for (std::size_t i = 0; i < 2; ++i) CHECK_THAT(dde.final_state()[i], WithinAbs(ode.final_state()[i], 1e-7));
}

TEST_CASE("delayed trajectories are dominated by the corner history", "[delay]") {
  IntegratorConfig cfg;
  cfg.t_end = 100;
  cfg.stop_on_convergence = false;
  const auto g = planar_delayed(DelayLaw::sinusoid(1, 0.5, 1));
  const auto top = integrate_dde(g, InitialHistory::constant({4, 2}), cfg);
  const auto low = integrate_dde(g, InitialHistory::expression({parse_expr("2 + t^2/4"), parse_expr("1 + t/4")}, 2), cfg);
  for (double t = 0; t <= 100; t += 0.25) {
    for (std::size_t i = 0; i < 2; ++i) CHECK(low.at(i, t) <= top.at(i, t) + 1e-6);
  }
}
