#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "monocert/integrators.hpp"

using namespace monocert;
using Catch::Matchers::WithinAbs;

namespace {

VectorField parse_field(std::size_t n, const std::vector<std::string>& src) {
  return VectorField::from_system(ExprSystem::parse(n, src, VariableRoles::StateOnly));
}

DelayField planar_delayed(DelaySchedule delays) {
  return DelayField::from_system(
      ExprSystem::parse(2, {"-5*x1 + x1*y2^2", "y1 - 2*x2^2"}, VariableRoles::StateAndDelayed),
      std::move(delays));
}

}  // namespace

TEST_CASE("scalar linear decay matches the closed form", "[integrators]") {
  const auto f = parse_field(1, {"-x1"});
  IntegratorConfig cfg;
  cfg.t_end = 5;
  cfg.stop_on_convergence = false;
  const auto tr = integrate_ode(f, Point{1.0}, cfg);
  CHECK(tr.termination == Termination::ReachedEnd);
  CHECK(tr.t_front() == 5.0);
  CHECK_THAT(tr.final_state()[0], WithinAbs(std::exp(-5.0), 1e-8));
  for (double t : {0.1, 0.77, 2.5, 4.99}) CHECK_THAT(tr.at(0, t), WithinAbs(std::exp(-t), 1e-7));
  // interpolant reproduces nodes exactly
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(tr.at(0, tr.times()[k]) == tr.state(k)[0]);
}

TEST_CASE("zero initial state stays at the origin", "[integrators]") {
  const auto f = parse_field(2, {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"});
  const auto tr = integrate_ode(f, Point{0, 0}, IntegratorConfig{});
  CHECK(tr.termination == Termination::ConvergedToOrigin);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(tr.max_norm(k) == 0.0);
}

TEST_CASE("the logistic counterexample settles at one", "[integrators]") {
  const auto f = parse_field(1, {"-x1*(x1 - 1)"});
  IntegratorConfig cfg;
  cfg.t_end = 100;
  const auto tr = integrate_ode(f, Point{2.0}, cfg);
  CHECK(tr.termination == Termination::Stalled);
  CHECK_THAT(tr.final_state()[0], WithinAbs(1.0, 1e-6));
}

TEST_CASE("planar field trajectory from the box corner converges", "[integrators]") {
  const auto f = parse_field(2, {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"});
  IntegratorConfig cfg;
  cfg.t_end = 1e6;
  const auto tr = integrate_ode(f, Point{4, 2}, cfg);
  CHECK(tr.termination == Termination::ConvergedToOrigin);
  CHECK(tr.min_entry() >= -1e-9);
  const Point top = tr.componentwise_max();
  CHECK(top[0] <= 4.0 + 1e-9);
  CHECK(top[1] <= 2.0 + 1e-9);
}

TEST_CASE("halving tolerances changes the terminal state only slightly", "[integrators][property]") {
  const auto f = parse_field(2, {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"});
  IntegratorConfig cfg;
  cfg.t_end = 20;
  cfg.stop_on_convergence = false;
  cfg.rtol = 1e-7;
  cfg.atol = 1e-9;
  const auto coarse = integrate_ode(f, Point{3, 1.5}, cfg);
  cfg.rtol /= 2;
  cfg.atol /= 2;
  const auto fine = integrate_ode(f, Point{3, 1.5}, cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(coarse.final_state()[i] - fine.final_state()[i]) <= 10 * 1e-7);
  }
}

TEST_CASE("integrator errors", "[integrators]") {
  const auto blowup = parse_field(1, {"x1^2"});
  IntegratorConfig cfg;
  cfg.t_end = 10;
  bool threw = false;
  try {
    (void)integrate_ode(blowup, Point{1.0}, cfg);
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::StepSizeUnderflow || e.code() == ErrorCode::NonFiniteState;
  }
  CHECK(threw);

  IntegratorConfig bad;
  bad.t_end = 0;
  CHECK_THROWS_AS(integrate_ode(parse_field(1, {"-x1"}), Point{1.0}, bad), Error);
  CHECK_THROWS_AS(integrate_ode(parse_field(1, {"-x1"}), Point{-1.0}, IntegratorConfig{}), Error);
}

TEST_CASE("trajectory CSV", "[integrators]") {
  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  cfg.stop_on_convergence = false;
  const auto tr = integrate_ode(parse_field(2, {"-x1", "-x2"}), Point{1, 2}, cfg);
  std::ostringstream os;
  tr.write_csv(os);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,x1,x2\n0,1,2\n", 0) == 0);
}

TEST_CASE("zero delay reproduces the ODE run", "[integrators][dde]") {
  const auto g = planar_delayed(DelayLaw::zero());
  IntegratorConfig cfg;
  cfg.t_end = 50;
  const auto dde = integrate_dde(g, InitialHistory::constant({4, 2}), cfg);
  const auto ode = integrate_ode(g.induced(), Point{4, 2}, cfg);
  REQUIRE(dde.size() == ode.size());
  double diff = 0.0;
  for (std::size_t k = 0; k < dde.size(); ++k) {
    for (std::size_t i = 0; i < 2; ++i) diff = std::max(diff, std::abs(dde.state(k)[i] - ode.state(k)[i]));
  }
  CHECK(diff < 1e-7);
}

TEST_CASE("constant-delay linear DDE matches the method of steps by hand", "[integrators][dde]") {
  // x' = -x(t - 1), φ ≡ 1: x = 1 - t on [0, 1], x = 1 - t + (t - 1)^2 / 2 on [1, 2].
  const auto g = DelayField::from_system(ExprSystem::parse(1, {"-y1"}, VariableRoles::StateAndDelayed),
                                         DelayLaw::constant(1.0));
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  cfg.clamp_positive = false;
  cfg.stop_on_convergence = false;
  const auto tr = integrate_dde(g, InitialHistory::constant({1.0}), cfg);
  CHECK_THAT(tr.at(0, 0.5), WithinAbs(0.5, 1e-9));
  CHECK_THAT(tr.at(0, 1.5), WithinAbs(1 - 1.5 + 0.125, 1e-8));
  CHECK_THAT(tr.final_state()[0], WithinAbs(-0.5, 1e-8));
}

TEST_CASE("proportional delay against the pantograph solution", "[integrators][dde]") {
  // x' = -x(t/2) has the power series sum_k (-1)^k t^k / (k! 2^{k(k-1)/2}).
  const auto g = DelayField::from_system(ExprSystem::parse(1, {"-y1"}, VariableRoles::StateAndDelayed),
                                         DelayLaw::proportional(0.5));
  IntegratorConfig cfg;
  cfg.t_end = 3.0;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  cfg.stop_on_convergence = false;
  cfg.clamp_positive = false;
  const auto tr = integrate_dde(g, InitialHistory::constant({1.0}), cfg);
  double exact = 0.0, term = 1.0;
  for (int k = 0; k < 40; ++k) {
    if (k > 0) term *= -3.0 / k / std::pow(2.0, k - 1);
    exact += term;
  }
  CHECK_THAT(tr.final_state()[0], WithinAbs(exact, 1e-8));
}

TEST_CASE("delayed planar field converges under a proportional delay", "[integrators][dde]") {
  IntegratorConfig cfg;
  cfg.t_end = 1000;
  const auto tr = integrate_dde(planar_delayed(DelayLaw::proportional(0.5)), InitialHistory::constant({4, 2}), cfg);
  CHECK(tr.terminal_norm() < 1e-3);
  const Point top = tr.componentwise_max();
  CHECK(top[0] <= 4 + 1e-6);
  CHECK(top[1] <= 2 + 1e-6);
  CHECK(tr.min_entry() >= -1e-9);
}

TEST_CASE("zero history stays at the origin", "[integrators][dde]") {
  const auto tr = integrate_dde(planar_delayed(DelayLaw::constant(2)), InitialHistory::constant({0, 0}), IntegratorConfig{});
  CHECK(tr.termination == Termination::ConvergedToOrigin);
  CHECK(tr.terminal_norm() == 0.0);
}

TEST_CASE("history gaps are reported", "[integrators][dde]") {
  const auto g = planar_delayed(DelayLaw::constant(2));
  const auto short_phi = InitialHistory::samples({-1, 0}, {{4, 2}, {4, 2}});
  bool gap = false;
  try {
    (void)integrate_dde(g, short_phi, IntegratorConfig{});
  } catch (const Error& e) {
    gap = e.code() == ErrorCode::HistoryGap;
  }
  CHECK(gap);
}

TEST_CASE("a uniform delay table matches the shared law", "[integrators][dde]") {
  const auto law = DelayLaw::sinusoid(1, 0.5, 1);
  std::vector<std::vector<DelayLaw>> table(2, std::vector<DelayLaw>(2, law));
  IntegratorConfig cfg;
  cfg.t_end = 30;
  const auto shared = integrate_dde(planar_delayed(law), InitialHistory::constant({4, 2}), cfg);
  const auto hetero = integrate_dde(planar_delayed(DelaySchedule(table)), InitialHistory::constant({4, 2}), cfg);
  double diff = 0.0;
  for (double t = 0; t <= 30; t += 0.25) {
    for (std::size_t i = 0; i < 2; ++i) diff = std::max(diff, std::abs(shared.at(i, t) - hetero.at(i, t)));
  }
  CHECK(diff < 1e-7);
}
