#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "monocert/homogeneity.hpp"
#include "monocert/linear.hpp"
#include "monocert/monotone.hpp"

using namespace monocert;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

VectorField field(std::size_t n, const std::vector<std::string>& src) {
  return VectorField::from_system(ExprSystem::parse(n, src, VariableRoles::StateOnly));
}

VectorField cubic() { return field(2, {"-x1^3", "x1^3 - x2^3"}); }

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("homogeneity identity", "[homogeneity]") {
  Eigen::MatrixXd a(2, 2);
  a << -2, 1, 1, -3;
  const BoxSet box({5, 5});
  CHECK(check_homogeneous(VectorField::linear(a), Dilation::standard(2, 0), box).verdict() == Verdict::Pass);
  CHECK(check_homogeneous(cubic(), Dilation::standard(2, 2), box).verdict() == Verdict::Pass);
  CHECK(check_homogeneous(cubic(), Dilation::standard(2, 1), box).verdict() == Verdict::Fail);
  const auto ex1 = check_homogeneous(field(2, {"-5*x1 + x1*x2^2", "x1 - 2*x2^2"}), Dilation::standard(2, 0), box);
  CHECK(ex1.verdict() == Verdict::Fail);
  CHECK(ex1.has("witness_lambda"));

  // weighted: f = (-x1^3, -x2^2) is homogeneous with r = (1, 2), p = 2
  CHECK(check_homogeneous(field(2, {"-x1^3", "-(x2^2)"}), Dilation({1, 2}, 2), box).verdict() == Verdict::Pass);
  CHECK_THROWS_AS(Dilation({1, 0}, 1), Error);
}

TEST_CASE("degree inference", "[homogeneity]") {
  const auto fit = infer_degree(cubic(), {1, 1}, BoxSet({3, 3}), 0, 5);
  CHECK_THAT(fit.p, WithinAbs(2, 1e-9));
  CHECK(fit.residual < 1e-9);
  const auto bad = infer_degree(field(1, {"-x1 - x1^3"}), {1}, BoxSet({3}), 0, 5);
  CHECK(bad.residual > 1e-3);
}

TEST_CASE("sub-homogeneity", "[homogeneity]") {
  Eigen::MatrixXd a(2, 2);
  a << -2, 1, 1, -3;
  CHECK(check_sub_homogeneous(VectorField::linear(a), 1, BoxSet({5, 5})).verdict() == Verdict::Pass);
  // -λx/(1+λx) >= -λx/(1+x): the inequality runs the wrong way
  CHECK(check_sub_homogeneous(field(1, {"-x1/(1 + x1)"}), 1, BoxSet({5})).verdict() == Verdict::Fail);
  const auto quad = check_sub_homogeneous(field(1, {"-x1 + x1^2"}), 1, BoxSet({5}));
  CHECK(quad.verdict() == Verdict::Fail);
  CHECK(quad.has("witness_x"));
  CHECK(check_sub_homogeneous(field(1, {"-x1 - x1^2"}), 1, BoxSet({5})).verdict() == Verdict::Pass);
}

TEST_CASE("paths for homogeneous fields", "[homogeneity]") {
  const auto f = cubic();
  const Dilation dil = Dilation::standard(2, 2);
  const Point w{1, 2};
  for (double sbar : {1.0, 10.0, 100.0}) {
    const auto path = homogeneous_path(f, dil, w, sbar);
    const auto cert = certify_path(f, path);
    CHECK(cert.status == Verdict::Certified);
    CHECK(*cert.box == Point{sbar, 2 * sbar});
  }
  // f(ρ(s)) = s^p δ_s f(w)
  const auto path = homogeneous_path(f, dil, w, 10);
  const Point fw = f(w);
  for (double s : {0.1, 1.0, 3.7, 10.0}) {
    const Point direct = f(path.point(s));
    for (std::size_t i = 0; i < 2; ++i) CHECK_THAT(direct[i], WithinRel(s * s * s * fw[i], 1e-9));
  }

  Eigen::MatrixXd a(2, 2);
  a << -2, 1, 1, -3;
  const auto w_lin = find_positive_w(MetzlerMatrix(a));
  REQUIRE(w_lin);
  const Point wl(w_lin->data(), w_lin->data() + 2);
  const auto lin = homogeneous_path(VectorField::linear(a), Dilation::standard(2, 0), wl, 1);
  CHECK(certify_path(VectorField::linear(a), lin).status == Verdict::Certified);
  CHECK_THAT(lin.rho(1, 0.5), WithinRel(0.5 * wl[1], 1e-15));

  CHECK(code_of([&] { (void)homogeneous_path(f, dil, Point{2, 1}, 1); }) == ErrorCode::NegativityFailed);
}

TEST_CASE("comparison field", "[homogeneity]") {
  const BoxSet box({2, 2});
  SECTION("monotone parts give g itself") {
    const auto h = field(2, {"-4*x1 + x2", "-4*x2"});
    const auto d = field(2, {"x2", "x1"});
    const auto bound = comparison_field_bound(h, d, box, 17);
    for (const Point x : {Point{0.3, 1.1}, Point{2, 2}, Point{1.25, 0.5}}) {
      const Point y{x[1], 0.4};
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK_THAT(bound.field.component(i, x, y), WithinAbs(h.component(i, x) + d.component(i, y), 1e-12));
      }
    }
    std::ostringstream csv;
    bound.write_csv(csv);
    CHECK(csv.str().rfind("i,x1,x2,H_i,D_i\n1,0,0,0,0\n", 0) == 0);
  }
  SECTION("non-monotone parts are dominated and the bound is cooperative") {
    const auto h = field(2, {"-3*x1 - x1*x2", "-3*x2 + x1*(2 - x1)"});
    const auto d = field(2, {"x2*(2 - x2)", "x1/(1 + x1)"});
    const auto bound = comparison_field_bound(h, d, box, 21);
    const GridTable& nodes = bound.h_sup->front();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Point x = nodes.node(k);
      for (std::size_t m = 0; m < nodes.size(); m += 7) {
        const Point y = nodes.node(m);
        for (std::size_t i = 0; i < 2; ++i) {
          CHECK(h.component(i, x) + d.component(i, y) <= bound.field.component(i, x, y) + 1e-12);
        }
      }
    }
    const auto a2 = check_assumption2(bound.field, box, {.per_axis = 9});
    INFO(a2.text());
    CHECK(a2.verdict() == Verdict::Pass);
  }
  SECTION("zero delay part") {
    const auto bound = comparison_field_bound(field(2, {"-x1", "-x2 + x1"}), field(2, {"0", "0"}), box, 9);
    CHECK(bound.field.component(0, Point{1, 1}, Point{0, 0}) == bound.field.component(0, Point{1, 1}, Point{2, 2}));
  }
  SECTION("assumption violations") {
    CHECK(code_of([&] { (void)comparison_field_bound(field(2, {"-x1", "-x2"}), field(2, {"-x1", "0"}), box); }) ==
          ErrorCode::Assumption3Violated);
    CHECK(code_of([&] { (void)comparison_field_bound(field(2, {"-x1 - x2", "-x2"}), field(2, {"0", "0"}), box); }) ==
          ErrorCode::Assumption3Violated);
  }
}

TEST_CASE("non-monotone positive systems", "[homogeneity]") {
  NonMonotoneOptions opts;
  opts.integrator.t_end = 40;
  opts.search.trials = 20;
  opts.search.integrator.t_end = 200;
  const auto h = field(2, {"-4*x1", "-4*x2"});
  const auto d = field(2, {"x2", "x1"});
  const auto rep = certify_nonmonotone_positive(h, d, 1, BoxSet({2, 2}), {DelayLaw::proportional(0.5)}, opts);
  CHECK(rep.verdict() == Verdict::Certified);
  CHECK(rep.number("max_domination_gap") <= 1e-6);

  CHECK(code_of([&] {
          (void)certify_nonmonotone_positive(h, field(2, {"x2*(x2 - 1)", "x1"}), 1, BoxSet({2, 2}), {}, opts);
        }) == ErrorCode::Assumption3Violated);
  // d dominates h on the diagonal: item 4 fails
  CHECK(code_of([&] {
          (void)certify_nonmonotone_positive(field(2, {"-x1", "-x2"}), field(2, {"2*x2", "2*x1"}), 1,
                                             BoxSet({2, 2}), {}, opts);
        }) == ErrorCode::Assumption3Violated);
}
