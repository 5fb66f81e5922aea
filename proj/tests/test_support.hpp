#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "thermoconvex/eos.hpp"
#include "thermoconvex/field.hpp"
#include "thermoconvex/sampling.hpp"

namespace tcx_test {

using namespace thermoconvex;

/// f(u) = 0.5 |u|^2 on a symmetric box; identity Hessian everywhere.
inline ScalarField quadratic_field(int m, double half_width = 10.0) {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, -half_width);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(m, half_width);
    std::vector<std::string> labels;
    for (int i = 0; i < m; ++i) labels.push_back("u" + std::to_string(i + 1));
    return ScalarField::from_expression(
        "quadratic", labels, DomainSpec(lo, hi), [](const std::vector<Dual2>& x) {
            Dual2 acc = 0.5 * x[0] * x[0];
            for (std::size_t i = 1; i < x.size(); ++i) acc = acc + 0.5 * x[i] * x[i];
            return acc;
        });
}

/// f(u) = u^4 on an interval: strictly convex with a vanishing second
/// derivative at the origin.
inline ScalarField quartic_field(double half_width = 4.0) {
    return ScalarField::from_expression(
        "quartic", {"u"},
        DomainSpec(Eigen::VectorXd::Constant(1, -half_width),
                   Eigen::VectorXd::Constant(1, half_width)),
        [](const std::vector<Dual2>& x) { return x[0] * x[0] * x[0] * x[0]; });
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

inline std::vector<Eigen::VectorXd> random_points(const DomainSpec& dom, int n,
                                                  std::uint64_t seed) {
    return sample_domain(dom, SamplerSpec::random(n, seed));
}

inline std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>
random_pairs(const DomainSpec& dom, int n, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> pts = random_points(dom, 2 * n, seed);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int i = 0; i < n; ++i)
        pairs.emplace_back(pts[std::size_t(2 * i)], pts[std::size_t(2 * i + 1)]);
    return pairs;
}

/// Desk-scaled parameter sets used across the test suite.
inline IdealPolytropicGas desk_polytropic(double gamma = 1.4, double c_v = 2.5) {
    IdealPolytropicParams p = IdealPolytropicParams::from({}, c_v, {}, gamma);
    ReferenceState ref;
    ref.v0 = 1.0;
    ref.s0 = 0.0;
    ref.u0 = c_v; // theta0 = 1
    return {p, ref};
}

inline EosBoxes desk_polytropic_boxes() {
    EosBoxes b;
    b.vs_lo = vec({0.4, -2.7});
    b.vs_hi = vec({2.2, 2.7});
    b.vtheta_lo = vec({0.4, 0.4});
    b.vtheta_hi = vec({2.2, 2.2});
    return b;
}

inline TaitParams desk_tait(double c_vr = 1.0) {
    TaitParams t;
    t.nu = 7.0;
    t.u_r = 2.0;
    t.v_r = 1.0;
    t.s_r = 0.0;
    t.theta_r = 1.0;
    t.p_r = 0.1;
    t.K_r = 3.0;
    t.D = 0.2;
    t.c_vr = c_vr;
    return t;
}

inline EosBoxes desk_tait_boxes() {
    EosBoxes b;
    b.vs_lo = vec({0.8, -0.4});
    b.vs_hi = vec({1.25, 0.6});
    b.vtheta_lo = vec({0.8, 0.6});
    b.vtheta_hi = vec({1.25, 1.6});
    return b;
}

inline VanDerWaalsParams desk_vdw() {
    VanDerWaalsParams p;
    p.a = 1.0;
    p.b = 0.1;
    p.R = 1.0;
    p.c_v = 1.5;
    return p;
}

} // namespace tcx_test
