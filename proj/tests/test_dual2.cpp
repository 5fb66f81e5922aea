#include <catch2/catch_amalgamated.hpp>

#include "thermoconvex/dual2.hpp"

using namespace thermoconvex;
using Catch::Approx;

namespace {

Dual2 var(double v, int i, int m) { return Dual2::variable(v, i, m); }

} // namespace

TEST_CASE("seeded variables carry unit gradients and zero Hessians") {
    Dual2 x = var(3.0, 0, 2);
    CHECK(x.value == 3.0);
    CHECK(x.grad(0) == 1.0);
    CHECK(x.grad(1) == 0.0);
    CHECK(x.hess.isZero(0.0));
}

TEST_CASE("product rule produces the symmetric rank-two Hessian update") {
    // f(x,y) = x*y: grad (y, x), hess [[0,1],[1,0]]
    Dual2 x = var(2.0, 0, 2), y = var(5.0, 1, 2);
    Dual2 f = x * y;
    CHECK(f.value == 10.0);
    CHECK(f.grad(0) == 5.0);
    CHECK(f.grad(1) == 2.0);
    CHECK(f.hess(0, 1) == 1.0);
    CHECK(f.hess(1, 0) == 1.0);
    CHECK(f.hess(0, 0) == 0.0);
}

TEST_CASE("quotient, log, exp, sqrt and pow match hand derivatives") {
    const double x0 = 1.7;
    Dual2 x = var(x0, 0, 1);

    Dual2 r = 1.0 / x;
    CHECK(r.value == Approx(1.0 / x0));
    CHECK(r.grad(0) == Approx(-1.0 / (x0 * x0)));
    CHECK(r.hess(0, 0) == Approx(2.0 / (x0 * x0 * x0)));

    Dual2 l = log(x);
    CHECK(l.grad(0) == Approx(1.0 / x0));
    CHECK(l.hess(0, 0) == Approx(-1.0 / (x0 * x0)));

    Dual2 e = exp(x);
    CHECK(e.hess(0, 0) == Approx(std::exp(x0)));

    Dual2 s = sqrt(x);
    CHECK(s.grad(0) == Approx(0.5 / std::sqrt(x0)));
    CHECK(s.hess(0, 0) == Approx(-0.25 * std::pow(x0, -1.5)));

    Dual2 p = pow(x, 3.5);
    CHECK(p.grad(0) == Approx(3.5 * std::pow(x0, 2.5)));
    CHECK(p.hess(0, 0) == Approx(3.5 * 2.5 * std::pow(x0, 1.5)));
}

TEST_CASE("pow with integral exponent is safe at zero base") {
    Dual2 x = var(0.0, 0, 1);
    Dual2 sq = pow(x, 2.0);
    CHECK(sq.value == 0.0);
    CHECK(sq.grad(0) == 0.0);
    CHECK(sq.hess(0, 0) == 2.0);
    Dual2 lin = pow(x, 1.0);
    CHECK(lin.grad(0) == 1.0);
    CHECK(lin.hess(0, 0) == 0.0);
}

TEST_CASE("domain errors raise NonFinite") {
    Dual2 x = var(-1.0, 0, 1);
    CHECK_THROWS_AS(log(x), NonFinite);
    CHECK_THROWS_AS(sqrt(x), NonFinite);
    CHECK_THROWS_AS(pow(x, 0.5), NonFinite);
    CHECK_THROWS_AS(inverse(Dual2::variable(0.0, 0, 1)), NonFinite);
}

TEST_CASE("composite expression in three variables: f = x*exp(y)/z") {
    const double x0 = 1.2, y0 = 0.3, z0 = 2.0;
    Dual2 x = var(x0, 0, 3), y = var(y0, 1, 3), z = var(z0, 2, 3);
    Dual2 f = x * exp(y) / z;
    const double ey = std::exp(y0);
    CHECK(f.value == Approx(x0 * ey / z0));
    CHECK(f.grad(0) == Approx(ey / z0));
    CHECK(f.grad(1) == Approx(x0 * ey / z0));
    CHECK(f.grad(2) == Approx(-x0 * ey / (z0 * z0)));
    CHECK(f.hess(0, 1) == Approx(ey / z0));
    CHECK(f.hess(0, 2) == Approx(-ey / (z0 * z0)));
    CHECK(f.hess(1, 2) == Approx(-x0 * ey / (z0 * z0)));
    CHECK(f.hess(2, 2) == Approx(2.0 * x0 * ey / (z0 * z0 * z0)));
    CHECK((f.hess - f.hess.transpose()).norm() == 0.0);
}
