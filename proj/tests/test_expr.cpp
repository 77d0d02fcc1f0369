#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "melast/errors.hpp"
#include "melast/expr.hpp"

using namespace melast;

TEST_CASE("expression evaluation") {
    CHECK(Expr::parse("1 + 2*3").eval(0, 0, 0) == doctest::Approx(7.0));
    CHECK(Expr::parse("x1 - x2 / 2").eval(3, 4, 0) == doctest::Approx(1.0));
    CHECK(Expr::parse("2^3^1").eval(0, 0, 0) == doctest::Approx(8.0));
    CHECK(Expr::parse("-x1^2").eval(2, 0, 0) == doctest::Approx(-4.0));
    CHECK(Expr::parse("sin(pi/2)").eval(0, 0, 0) == doctest::Approx(1.0));
    CHECK(Expr::parse("exp(0) + cos(0)").eval(0, 0, 0) == doctest::Approx(2.0));
    CHECK(Expr::parse("t*(1 + x1)").eval(2, 0, 3) == doctest::Approx(9.0));
    CHECK(Expr::parse("(x1 + x2) * (x1 - x2)").eval(5, 3, 0) == doctest::Approx(16.0));
}

TEST_CASE("expression parse errors carry position context") {
    CHECK_THROWS_AS(Expr::parse("x3 + 1"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("sin 1"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("1 +"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("(1 + 2"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("1 2"), ConfigError);
}

TEST_CASE("symbolic differentiation matches finite differences") {
    const Expr e = Expr::parse("sin(2*x1)*cos(x2) + x1^3*t - exp(-x2*x1)");
    const Expr dx1 = e.diff(0);
    const Expr dx2 = e.diff(1);
    const Expr dt = e.diff(2);
    const double x1 = 0.7, x2 = -0.4, t = 1.3, h = 1e-6;
    CHECK(dx1.eval(x1, x2, t) ==
          doctest::Approx((e.eval(x1 + h, x2, t) - e.eval(x1 - h, x2, t)) / (2 * h))
              .epsilon(1e-8));
    CHECK(dx2.eval(x1, x2, t) ==
          doctest::Approx((e.eval(x1, x2 + h, t) - e.eval(x1, x2 - h, t)) / (2 * h))
              .epsilon(1e-8));
    CHECK(dt.eval(x1, x2, t) ==
          doctest::Approx((e.eval(x1, x2, t + h) - e.eval(x1, x2, t - h)) / (2 * h))
              .epsilon(1e-8));
}

TEST_CASE("vector expression jacobian") {
    const Expr2 f = Expr2::parse("x1*x2", "x1 + 2*x2");
    const Mat2 J = f.jacobian({3.0, 4.0}, 0.0);
    CHECK(J(0, 0) == doctest::Approx(4.0));
    CHECK(J(0, 1) == doctest::Approx(3.0));
    CHECK(J(1, 0) == doctest::Approx(1.0));
    CHECK(J(1, 1) == doctest::Approx(2.0));
    CHECK(Expr2::zero().is_zero());
    CHECK_FALSE(f.is_zero());
}
