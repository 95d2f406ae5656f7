#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "monocert/model.hpp"

using namespace monocert;
using Catch::Matchers::WithinAbs;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;  // sentinel: nothing thrown
}

const std::vector<std::string> kPlanar = {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"};
const std::vector<std::string> kPlanarDelayed = {"-5*x1 + x1*y2^2", "y1 - 2*x2^2"};

}  // namespace

TEST_CASE("vector fields from expressions", "[model]") {
  const auto f = VectorField::from_system(ExprSystem::parse(2, kPlanar, VariableRoles::StateOnly));
  const Point v = f(Point{1, 1});
  CHECK(v == Point{-4, -1});
  CHECK(f(Point{4, 2}) == Point{-4, -4});
  CHECK(f.has_analytic_jacobian());
  CHECK(f.jacobian(0, 1, Point{1.5, 2.0}) == 6.0);

  const auto bistable = VectorField::from_system(ExprSystem::parse(1, {"-x1*(x1 - 1)"}, VariableRoles::StateOnly));
  CHECK(bistable(Point{2})[0] == -2.0);

  const auto zero = VectorField::from_system(ExprSystem::parse(2, {"0", "0"}, VariableRoles::StateOnly));
  CHECK(zero(Point{3, 7}) == Point{0, 0});

  CHECK(code_of([] {
          (void)VectorField::from_system(ExprSystem::parse(1, {"1 - x1"}, VariableRoles::StateOnly));
        }) == ErrorCode::OriginNotEquilibrium);
  CHECK(code_of([] {
          (void)VectorField::from_system(ExprSystem::parse(1, {"-x1 + y1"}, VariableRoles::StateAndDelayed));
        }) == ErrorCode::InvalidVariableUse);
}

TEST_CASE("finite-difference and symbolic Jacobians agree", "[model]") {
  const auto sys = ExprSystem::parse(2, kPlanar, VariableRoles::StateOnly);
  const auto f = VectorField::from_system(sys);
  const auto fd = VectorField::from_function(2, [&](std::size_t i, std::span<const double> x) {
    return f.component(i, x);
  });
  for (double a : {0.3, 1.0, 3.7}) {
    for (double b : {0.0, 0.5, 1.9}) {
      const Point x{a, b};
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          const double exact = f.jacobian(i, j, x);
          CHECK(std::abs(fd.jacobian(i, j, x) - exact) <= 1e-5 * (1 + std::abs(exact)));
        }
      }
    }
  }
}

TEST_CASE("delay laws", "[model]") {
  CHECK(DelayLaw::zero().is_zero());
  CHECK(DelayLaw::constant(2).tau_max() == 2.0);
  const auto sine = DelayLaw::sinusoid(1, 0.5, 1);
  CHECK_THAT(sine(0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(sine.tau_max(), WithinAbs(1.0, 1e-12));
  CHECK(DelayLaw::proportional(0.5)(10) == 5.0);
  CHECK(DelayLaw::proportional(0.5).tau_max() == 0.0);

  CHECK(code_of([] { (void)DelayLaw::proportional(1.0); }) == ErrorCode::Assumption1Violated);
  CHECK(code_of([] { (void)DelayLaw::parse("prop:1.0"); }) == ErrorCode::Assumption1Violated);
  CHECK(code_of([] { (void)DelayLaw::parse("expr:t"); }) == ErrorCode::Assumption1Violated);
  CHECK(code_of([] { (void)DelayLaw::parse("expr:t + 1"); }) == ErrorCode::Assumption1Violated);
  CHECK(code_of([] { (void)DelayLaw::constant(-1); }) == ErrorCode::InvalidDelayLaw);
  CHECK(code_of([] { (void)DelayLaw::sinusoid(0.2, 0.5, 1); }) == ErrorCode::InvalidDelayLaw);
  CHECK(code_of([] { (void)DelayLaw::parse("const:abc"); }) == ErrorCode::InvalidDelayLaw);
  CHECK(code_of([] { (void)DelayLaw::parse("warp:1"); }) == ErrorCode::InvalidDelayLaw);
  CHECK(code_of([] { (void)DelayLaw::parse("expr:x1"); }) == ErrorCode::InvalidDelayLaw);

  const auto sq = DelayLaw::parse("expr:sqrt(t)");
  CHECK(sq.kind() == DelayKind::Expression);
  CHECK_THAT(sq.tau_max(), WithinAbs(0.25, 5e-3));  // peak of sqrt(t) - t, seen on a 0.1 grid
  CHECK(DelayLaw::parse("sin:1,0.5,1").describe() == "sin:1,0.5,1");
  CHECK(DelayLaw::parse(" const:2 ").describe() == "const:2");
  CHECK(DelayLaw::parse("zero").describe() == "zero");
}

TEST_CASE("delay fields", "[model]") {
  const auto sys = ExprSystem::parse(2, kPlanarDelayed, VariableRoles::StateAndDelayed);
  const auto g = DelayField::from_system(sys, DelayLaw::proportional(0.5));
  const auto f = g.induced();
  CHECK(f(Point{1, 1}) == Point{-4, -1});
  CHECK(g(Point{1, 2}, Point{3, 1}) == Point{-5 + 1, 3 - 8});
  CHECK(g.jacobian_y(0, 1, Point{2, 1}, Point{1, 3}) == 2 * 2 * 3);
  CHECK(f.jacobian(0, 1, Point{2, 3}) == 12.0);

  const auto ex1 = VectorField::from_system(ExprSystem::parse(2, kPlanar, VariableRoles::StateOnly));
  for (double a : {0.0, 0.7, 3.9}) {
    for (double b : {0.1, 1.3}) {
      CHECK(f(Point{a, b}) == ex1(Point{a, b}));
    }
  }

  CHECK(code_of([] { (void)DelayField::from_system(ExprSystem::parse(1, {"-x1 + y1 + 1"}, VariableRoles::StateAndDelayed), DelayLaw::zero()); }) ==
        ErrorCode::OriginNotEquilibrium);
}

TEST_CASE("path candidates", "[model]") {
  const auto path = PathCandidate::parse({"s", "sqrt(s)"}, 4.0, {"s", "s"});
  CHECK(path.corner() == Point{4, 2});
  CHECK(path.rho_derivative(1, 4.0) == 0.25);
  CHECK_THAT(path.alpha(0, 3.0), WithinAbs(3.0, 0));

  const auto dflt = PathCandidate::parse({"s"}, 1.0);
  CHECK(dflt.alpha(0, 2.0) == 2e-6);

  CHECK(code_of([] { (void)PathCandidate::parse({"0*s", "s"}, 1.0); }) == ErrorCode::PathValidationFailure);
  CHECK(code_of([] { (void)PathCandidate::parse({"s + 1"}, 1.0); }) == ErrorCode::PathValidationFailure);
  CHECK(code_of([] { (void)PathCandidate::parse({"s*(2 - s)"}, 2.0); }) == ErrorCode::PathValidationFailure);
  CHECK(code_of([] { (void)PathCandidate::parse({"ln(s)"}, 1.0); }) == ErrorCode::PathDomainError);
  CHECK(code_of([] { (void)PathCandidate::parse({"s"}, 0.0); }) == ErrorCode::PathValidationFailure);
  CHECK(code_of([] { (void)PathCandidate::parse({"x1"}, 1.0); }) == ErrorCode::InvalidVariableUse);
  // flat spot: derivative vanishes inside the interval
  CHECK(code_of([] { (void)PathCandidate::parse({"(s - 1)^3 + 1"}, 2.0, {}, 1e-6, 1023); }) ==
        ErrorCode::PathValidationFailure);
}

TEST_CASE("scalings", "[model]") {
  const auto psi = ScalingPsi::parse({"x1/(x1^2 + 1)*y1^3", "x2^2*y2"});
  CHECK_NOTHROW(psi.validate(Point{4, 2}, Point{20, 10}));
  CHECK(psi.apply(1, 2.0, 3.0) == 12.0);

  CHECK(code_of([] { (void)ScalingPsi::parse({"x2*y1", "y2"}); }) == ErrorCode::PsiValidationFailure);
  CHECK(code_of([] { ScalingPsi::parse({"y1 + 1"}).validate(Point{1}, Point{1}); }) ==
        ErrorCode::PsiValidationFailure);
  CHECK(code_of([] { ScalingPsi::parse({"-y1"}).validate(Point{1}, Point{1}); }) ==
        ErrorCode::PsiValidationFailure);
  CHECK(code_of([] { ScalingPsi::parse({"y1^2"}).validate(Point{1}, Point{1}); }) ==
        ErrorCode::PsiValidationFailure);
}

TEST_CASE("initial histories", "[model]") {
  const auto c = InitialHistory::constant({4, 2});
  CHECK(c.at(-100) == Point{4, 2});
  CHECK(std::isinf(c.domain()));

  const auto e = InitialHistory::expression({parse_expr("1 - t"), parse_expr("2")}, 3.0);
  CHECK(e.at(-2) == Point{3, 2});
  CHECK(e.upper_bound() == Point{4, 2});

  const auto s = InitialHistory::samples({-2, -1, 0}, {{0, 1}, {2, 1}, {1, 1}});
  CHECK(s.at(-1.5) == Point{1, 1});
  CHECK(s.domain() == 2.0);

  CHECK(code_of([] { (void)InitialHistory::constant({-1}); }) == ErrorCode::InvalidHistory);
  CHECK(code_of([] { (void)InitialHistory::expression({parse_expr("t")}, 1.0); }) == ErrorCode::InvalidHistory);
  CHECK(code_of([] { (void)InitialHistory::samples({-1, 0.5}, {{1}, {1}}); }) == ErrorCode::InvalidHistory);
}

TEST_CASE("boxes", "[model]") {
  const BoxSet box({4, 2});
  CHECK(box.contains(Point{4, 0}));
  CHECK_FALSE(box.contains(Point{4.1, 0}));
  CHECK(box.contains(Point{4.1, 0}, 0.2));
  CHECK_NOTHROW(box.require_positive());
  CHECK(code_of([] { BoxSet({1, 0}).require_positive(); }) == ErrorCode::PreconditionViolated);
  CHECK(code_of([] { (void)BoxSet({-1}); }) == ErrorCode::PreconditionViolated);
}
