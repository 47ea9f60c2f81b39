#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/field.hpp"

using namespace homog;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const std::vector<std::string> kVars{"v", "tau", "u", "t"};
}  // namespace

TEST_CASE("built-in metadata") {
  const ProblemField e1 = builtin_field("example1");
  CHECK(e1.beta == 5.0);
  CHECK(e1.alpha == kTwoPi);
  CHECK(e1.lipschitz_v == kTwoPi);
  CHECK(e1.flags.tau_independent);
  CHECK_FALSE(e1.flags.u_independent);
  CHECK(e1.flags.t_independent);
  CHECK(e1.bounds_certified);
  CHECK(e1.xi() == 11.0);
  CHECK(e1.xi_bar() == doctest::Approx((3 + 22) * (1 + 2 * kTwoPi)));

  const ProblemField e3 = builtin_field("example3");
  CHECK_FALSE(e3.flags.tau_independent);
  CHECK(e3.flags.u_independent);
  CHECK(e3.xi() == 3.0);

  const ProblemField c = builtin_field("constant", {2.5});
  CHECK(c.beta == 2.5);
  CHECK(c.evaluate(0.9, 0.1, -3.0, 7.0) == 2.5);
  CHECK(c.flags.tau_independent);
  CHECK(c.flags.u_independent);
  CHECK(c.flags.t_independent);

  const ProblemField sc = builtin_field("shifted_cosine", {2.0});
  CHECK(sc.beta == 3.0);
  CHECK(sc.xi() == 7.0);
  CHECK(sc.evaluate(0.0, 0.0, 0.0, 0.0) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(builtin_field("nope"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_field("constant"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_field("example1", {1.0}), std::invalid_argument);
}

TEST_CASE("built-in values at hand-checked points") {
  const ProblemField e1 = builtin_field("example1");
  CHECK(e1.evaluate(0.0, 0.0, 2.0, 0.0) == doctest::Approx(-1.0));
  CHECK(e1.evaluate(0.5, 0.0, 0.0, 0.0) == doctest::Approx(-1.0));
  CHECK(e1.evaluate(1.25, 0.0, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

  const ProblemField e3 = builtin_field("example3");
  CHECK(e3.evaluate(0.0, 0.0, 5.0, 9.0) == doctest::Approx(-0.5));
  CHECK(e3.evaluate(0.25, 0.25, 0.0, 0.0) == doctest::Approx(-1.0));
  CHECK(e3.evaluate(0.7, 0.3, 0.0, 0.0) == doctest::Approx(-0.5));
  // One ahead in either fast variable changes nothing.
  CHECK(e3.evaluate(1.25, 0.375, 0.0, 0.0) == e3.evaluate(0.25, 0.375, 0.0, 0.0));
  CHECK(e3.evaluate(0.25, 1.375, 0.0, 0.0) == e3.evaluate(0.25, 0.375, 0.0, 0.0));
}

TEST_CASE("expression fields mirror their built-in twins") {
  const ProblemField e1 = builtin_field("example1");
  const ProblemField x1 = expression_field(
      expr::parse("-u + cos(2 * pi * v)", kVars), kTwoPi, 5.0, kTwoPi);
  CHECK(x1.flags.tau_independent);
  CHECK_FALSE(x1.flags.u_independent);
  CHECK(x1.flags.t_independent);
  CHECK_FALSE(x1.bounds_certified);
  for (double v : {0.0, 0.17, 0.5, 0.93})
    for (double u : {-2.0, 0.0, 1.5})
      CHECK(x1.evaluate(v, 0.3, u, 1.0) ==
            doctest::Approx(e1.evaluate(v, 0.3, u, 1.0)).epsilon(1e-15));

  const ProblemField e3 = builtin_field("example3");
  const ProblemField x3 = expression_field(
      expr::parse("abs(v + tau - floor(v + tau) - 0.5) - 1", kVars), 1.0, 1.0,
      1.0);
  CHECK_FALSE(x3.flags.tau_independent);
  for (double v : {0.0, 0.4, 0.9})
    for (double tau : {0.1, 0.65})
      CHECK(x3.evaluate(v, tau, 0.0, 0.0) ==
            doctest::Approx(e3.evaluate(v, tau, 0.0, 0.0)).epsilon(1e-15));
}

TEST_CASE("validation certifies the built-ins") {
  for (const char* name : {"example1", "example2", "example3"}) {
    ProblemField field = builtin_field(name);
    const BoundsReport rep = validate_field(field, 2000);
    CHECK(rep.periodicity_defect <= 1e-9);
    CHECK(rep.monotonicity_defect <= 1e-9);
    CHECK(rep.sampled_beta <= field.beta + 1e-9);
    CHECK(rep.sampled_alpha <= field.alpha * (1 + 1e-6));
    CHECK(bounds_ok(rep, field));
  }
}

TEST_CASE("validation flags a non-periodic field") {
  ProblemField drift = expression_field(expr::parse("v", kVars), 1.0, 10.0, 1.0);
  const BoundsReport rep = validate_field(drift, 1000);
  CHECK(rep.periodicity_defect >= 0.9);
  CHECK_FALSE(bounds_ok(rep, drift));
  certify_field(drift, 1000);
  CHECK_FALSE(drift.bounds_certified);
}

TEST_CASE("validation flags an increasing field") {
  ProblemField rising = expression_field(expr::parse("u", kVars), 1.0, 10.0, 0.0);
  const BoundsReport rep = validate_field(rising, 1000);
  CHECK(rep.monotonicity_defect > 0.1);
  CHECK_FALSE(bounds_ok(rep, rising));
}

TEST_CASE("validation flags an understated sup bound") {
  ProblemField field =
      expression_field(expr::parse("cos(2 * pi * v) - 2", kVars), kTwoPi, 1.0,
                       kTwoPi);
  const BoundsReport rep = validate_field(field, 1000);
  CHECK(rep.sampled_beta > 1.0 + 1e-9);
  CHECK_FALSE(bounds_ok(rep, field));
}

TEST_CASE("validation is deterministic for a fixed seed") {
  const ProblemField field = builtin_field("example2");
  const BoundsReport a = validate_field(field, 500, 99);
  const BoundsReport b = validate_field(field, 500, 99);
  CHECK(a.sampled_beta == b.sampled_beta);
  CHECK(a.sampled_alpha == b.sampled_alpha);
  CHECK(a.periodicity_defect == b.periodicity_defect);
  CHECK_THROWS_AS(validate_field(field, 50), std::invalid_argument);
}

TEST_CASE("freezing narrows the sup bound to the visible profile") {
  const ProblemField frozen = freeze_field(builtin_field("example2"), 0.0, 0.0);
  // The frozen profile is |sin(2 pi v)|, whose sup is 1; the declared 5
  // would waste a factor of the certification budget.
  CHECK(frozen.beta >= 1.0);
  CHECK(frozen.beta <= 1.2);
  CHECK(frozen.flags.u_independent);
  CHECK(frozen.flags.t_independent);
  // The frozen arguments win regardless of what is passed.
  CHECK(frozen.evaluate(0.25, 0.0, 3.0, 7.0) == doctest::Approx(1.0));

  const ProblemField f3 = freeze_field(builtin_field("example3"), 0.0, 0.0);
  CHECK(f3.beta >= 1.0 - 1e-9);
  CHECK(f3.beta <= 1.01);
}

TEST_CASE("perturbation shifts values and widens beta") {
  const ProblemField base = builtin_field("example3");
  const ProblemField up = perturb_field(base, 0.125, 1);
  const ProblemField down = perturb_field(base, 0.125, -1);
  CHECK(up.evaluate(0.3, 0.1, 0.0, 0.0) ==
        doctest::Approx(base.evaluate(0.3, 0.1, 0.0, 0.0) + 0.125));
  CHECK(down.evaluate(0.3, 0.1, 0.0, 0.0) ==
        doctest::Approx(base.evaluate(0.3, 0.1, 0.0, 0.0) - 0.125));
  CHECK(up.beta == base.beta + 0.125);
  CHECK_THROWS_AS(perturb_field(base, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(perturb_field(base, 0.1, 2), std::invalid_argument);
}
