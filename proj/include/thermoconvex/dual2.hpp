#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "thermoconvex/errors.hpp"

namespace thermoconvex {

/// Second-order forward-mode number: carries a value together with its
/// gradient and Hessian with respect to a fixed set of independent
/// variables. One sweep through an expression yields the exact jet,
/// with no truncation error beyond floating-point rounding.
///
/// The Hessian stays exactly symmetric because every rule below updates
/// it with symmetric combinations only.
struct Dual2 {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;

    Dual2() = default;

    Dual2(double v, Eigen::VectorXd g, Eigen::MatrixXd h)
        : value(v), grad(std::move(g)), hess(std::move(h)) {}

    /// A constant in an m-variable expression.
    static Dual2 constant(double v, Eigen::Index m) {
        return {v, Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, m)};
    }

    /// The i-th independent variable, seeded with value v.
    static Dual2 variable(double v, Eigen::Index i, Eigen::Index m) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
        g(i) = 1.0;
        return {v, std::move(g), Eigen::MatrixXd::Zero(m, m)};
    }

    Eigen::Index vars() const { return grad.size(); }
};

/// Chain rule for a scalar function applied to x: needs f(x), f'(x), f''(x).
inline Dual2 dual2_chain(const Dual2& x, double f, double fp, double fpp) {
    return {f, fp * x.grad,
            Eigen::MatrixXd(fp * x.hess + fpp * (x.grad * x.grad.transpose()))};
}

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
    return {a.value + b.value, a.grad + b.grad, a.hess + b.hess};
}
inline Dual2 operator+(const Dual2& a, double c) {
    return {a.value + c, a.grad, a.hess};
}
inline Dual2 operator+(double c, const Dual2& a) { return a + c; }

inline Dual2 operator-(const Dual2& a) { return {-a.value, -a.grad, -a.hess}; }
inline Dual2 operator-(const Dual2& a, const Dual2& b) {
    return {a.value - b.value, a.grad - b.grad, a.hess - b.hess};
}
inline Dual2 operator-(const Dual2& a, double c) {
    return {a.value - c, a.grad, a.hess};
}
inline Dual2 operator-(double c, const Dual2& a) {
    return {c - a.value, -a.grad, -a.hess};
}

inline Dual2 operator*(const Dual2& a, const Dual2& b) {
    Eigen::MatrixXd h = a.value * b.hess + b.value * a.hess;
    h.noalias() += a.grad * b.grad.transpose();
    h.noalias() += b.grad * a.grad.transpose();
    return {a.value * b.value, a.value * b.grad + b.value * a.grad, std::move(h)};
}
inline Dual2 operator*(const Dual2& a, double c) {
    return {a.value * c, c * a.grad, c * a.hess};
}
inline Dual2 operator*(double c, const Dual2& a) { return a * c; }

inline Dual2 inverse(const Dual2& x) {
    if (x.value == 0.0)
        throw NonFinite("dual2: division by zero");
    const double inv = 1.0 / x.value;
    return dual2_chain(x, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Dual2 operator/(const Dual2& a, const Dual2& b) { return a * inverse(b); }
inline Dual2 operator/(const Dual2& a, double c) { return a * (1.0 / c); }
inline Dual2 operator/(double c, const Dual2& b) { return inverse(b) * c; }

inline Dual2 log(const Dual2& x) {
    if (!(x.value > 0.0))
        throw NonFinite("dual2: log of nonpositive argument " + std::to_string(x.value));
    const double inv = 1.0 / x.value;
    return dual2_chain(x, std::log(x.value), inv, -inv * inv);
}

inline Dual2 exp(const Dual2& x) {
    const double e = std::exp(x.value);
    return dual2_chain(x, e, e, e);
}

inline Dual2 sqrt(const Dual2& x) {
    if (!(x.value > 0.0))
        throw NonFinite("dual2: sqrt of nonpositive argument " + std::to_string(x.value));
    const double r = std::sqrt(x.value);
    return dual2_chain(x, r, 0.5 / r, -0.25 / (r * x.value));
}

/// x^p for real exponent p; the base must be positive unless p is a
/// nonnegative integer, in which case the power rule extends smoothly.
inline Dual2 pow(const Dual2& x, double p) {
    const bool integral = p == std::floor(p) && p >= 0.0;
    if (!(x.value > 0.0) && !integral)
        throw NonFinite("dual2: pow with nonpositive base " + std::to_string(x.value));
    const double f = std::pow(x.value, p);
    // zero coefficients short-circuit so that 0 * pow(0, negative) never
    // produces NaN for integral exponents
    const double fp = p == 0.0 ? 0.0 : p * std::pow(x.value, p - 1.0);
    const double c2 = p * (p - 1.0);
    const double fpp = c2 == 0.0 ? 0.0 : c2 * std::pow(x.value, p - 2.0);
    return dual2_chain(x, f, fp, fpp);
}

inline Dual2 square(const Dual2& x) { return x * x; }

} // namespace thermoconvex
