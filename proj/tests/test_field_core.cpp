#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "thermoconvex/field.hpp"

using namespace thermoconvex;
using namespace tcx_test;
using Catch::Approx;

TEST_CASE("quadratic jet: value, gradient and identity Hessian") {
    ScalarField f = quadratic_field(3);
    Jet2 jet = f(vec({1.0, 2.0, 3.0}));
    CHECK(jet.value == Approx(7.0));
    CHECK(jet.gradient.isApprox(vec({1.0, 2.0, 3.0})));
    CHECK(jet.hessian.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST_CASE("u^4 has vanishing jet at the origin and curvature 12u^2 elsewhere") {
    ScalarField f = quartic_field();
    Jet2 at0 = f(vec({0.0}));
    CHECK(at0.value == 0.0);
    CHECK(at0.gradient(0) == 0.0);
    CHECK(at0.hessian(0, 0) == 0.0);

    Jet2 at1 = f(vec({1.0}));
    CHECK(at1.hessian(0, 0) == Approx(12.0));
    Eigen::MatrixXd fd = fd_hessian(f, vec({1.0}), 1e-4);
    CHECK(std::abs(fd(0, 0) - 12.0) / 12.0 < 1e-5);
}

TEST_CASE("Tait jet at the reference state matches hand substitution") {
    // By hand from the fundamental form with the desk constants
    // (u_r=2, C=1, theta_r=1, p_r=0.1, K_r=3, D=0.2, nu=7, v_r=1):
    //   u(v_r,s_r) = u_r + C theta_r^2 = 3
    //   u_v = -p_r = -0.1, u_s = theta_r = 1
    //   u_vv = B nu v_r^{-nu-1} + D^2/C = 21.04, u_vs = -0.2, u_ss = 1
    TaitEos tait(desk_tait());
    ScalarField u = tait.u_vs_field(vec({0.8, -0.5}), vec({1.3, 0.7}));
    Jet2 jet = u(vec({1.0, 0.0}));
    CHECK(jet.value == Approx(3.0));
    CHECK(jet.gradient(0) == Approx(-0.1));
    CHECK(jet.gradient(1) == Approx(1.0));
    CHECK(jet.hessian(0, 0) == Approx(21.04));
    CHECK(jet.hessian(0, 1) == Approx(-0.2));
    CHECK(jet.hessian(1, 1) == Approx(1.0));
}

TEST_CASE("finite-difference oracle validates jets of every built-in field") {
    IdealPolytropicGas gas = desk_polytropic();
    EosBoxes pb = desk_polytropic_boxes();
    TaitEos tait(desk_tait());
    EosBoxes tb = desk_tait_boxes();
    VanDerWaalsGas vdw(desk_vdw());

    std::vector<ScalarField> fields = {
        quadratic_field(3),
        quartic_field(),
        gas.u_vs_field(pb.vs_lo, pb.vs_hi),
        gas.u_vtheta_field(pb.vtheta_lo, pb.vtheta_hi),
        gas.p_vtheta_field(pb.vtheta_lo, pb.vtheta_hi),
        tait.u_vs_field(tb.vs_lo, tb.vs_hi),
        tait.u_vtheta_field(tb.vtheta_lo, tb.vtheta_hi),
        tait.p_vtheta_field(tb.vtheta_lo, tb.vtheta_hi),
        vdw.u_vtheta_field(vec({0.3, 0.5}), vec({3.0, 5.0})),
        vdw.p_vtheta_field(vec({0.3, 0.5}), vec({3.0, 5.0})),
    };

    std::uint64_t seed = 20240901;
    for (const ScalarField& f : fields) {
        INFO("field: " << f.provenance());
        // shrink toward the interior so every FD stencil stays admissible
        Eigen::VectorXd lo = f.domain().lower(), hi = f.domain().upper();
        Eigen::VectorXd span = hi - lo;
        DomainSpec inner(lo + 0.05 * span, hi - 0.05 * span, f.domain().predicate());
        for (const Eigen::VectorXd& p : random_points(inner, 100, seed++)) {
            Jet2 jet = f(p);
            Eigen::MatrixXd fd = fd_hessian(f, p, 1e-4);
            const double herr = (jet.hessian - fd).norm() /
                                std::max(1.0, jet.hessian.norm());
            CHECK(herr < 1e-5);
            Eigen::VectorXd fg = fd_gradient(f, p, 1e-5);
            const double gerr = (jet.gradient - fg).norm() /
                                std::max(1.0, jet.gradient.norm());
            CHECK(gerr < 1e-7);
        }
    }
}

TEST_CASE("evaluation is deterministic: identical jets bit for bit") {
    IdealPolytropicGas gas = desk_polytropic();
    EosBoxes pb = desk_polytropic_boxes();
    ScalarField u = gas.u_vs_field(pb.vs_lo, pb.vs_hi);
    const Eigen::VectorXd p = vec({1.3, 0.2});
    Jet2 a = u(p), b = u(p);
    CHECK(a.value == b.value);
    CHECK((a.gradient - b.gradient).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.hessian - b.hessian).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("domain enforcement") {
    ScalarField f = quadratic_field(2, 1.0);
    CHECK_THROWS_AS(f(vec({2.0, 0.0})), DomainViolation);
    CHECK_THROWS_AS(f(vec({0.0})), DimensionMismatch);

    // boundary points are rejected by the strict-interior rule
    CHECK_THROWS_AS(f(vec({1.0, 0.0})), DomainViolation);

    SECTION("stencil leaving the domain raises DomainViolation") {
        CHECK_THROWS_AS(fd_hessian(f, vec({0.99999, 0.0}), 1e-4), DomainViolation);
    }
}

TEST_CASE("non-finite expressions are reported, not returned") {
    ScalarField f = ScalarField::from_expression(
        "log-field", {"u"},
        DomainSpec(vec({-1.0}), vec({1.0})),
        [](const std::vector<Dual2>& x) { return log(x[0]); });
    CHECK_THROWS_AS(f(vec({-0.5})), NonFinite);
    CHECK(f(vec({0.5})).value == Approx(std::log(0.5)));
}

TEST_CASE("Point and DomainSpec invariants") {
    CHECK_THROWS_AS(Point(vec({1.0, 2.0}), {"only-one"}), DimensionMismatch);
    Eigen::VectorXd bad = vec({1.0});
    bad(0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Point(bad), NonFinite);
    CHECK_THROWS_AS(DomainSpec(vec({1.0}), vec({0.0})), DomainViolation);
}
