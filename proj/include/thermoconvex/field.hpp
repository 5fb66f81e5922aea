#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thermoconvex/dual2.hpp"
#include "thermoconvex/errors.hpp"

namespace thermoconvex {

/// A state-space point: coordinates plus optional variable labels with
/// unit annotations, e.g. "v [m^3/kg]". Labels are carried for report
/// readability; they are not dimension-checked at runtime.
struct Point {
    Eigen::VectorXd coords;
    std::vector<std::string> labels;

    Point() = default;
    explicit Point(Eigen::VectorXd c, std::vector<std::string> l = {})
        : coords(std::move(c)), labels(std::move(l)) {
        if (!labels.empty() &&
            labels.size() != static_cast<std::size_t>(coords.size()))
            throw DimensionMismatch("point labels do not match coordinate count");
        if (!coords.allFinite())
            throw NonFinite("point has non-finite coordinates");
    }
};

/// Second-order Taylor data of a scalar field at a point.
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;

    bool all_finite() const {
        return std::isfinite(value) && gradient.allFinite() && hessian.allFinite();
    }
};

inline Dual2 to_dual(const Jet2& j) { return {j.value, j.gradient, j.hessian}; }
inline Jet2 to_jet(const Dual2& d) { return {d.value, d.grad, d.hess}; }

inline std::string format_point(const Eigen::VectorXd& x) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x(i);
    }
    os << ")";
    return os.str();
}

/// Open convex admissible set: a bounding box plus an optional predicate.
/// Membership is strict-interior: points closer than 1e-9 (relative to
/// the characteristic scale of the bound) to a box face are rejected,
/// since derivatives blow up at equation-of-state singularities.
class DomainSpec {
public:
    using Predicate = std::function<bool(const Eigen::VectorXd&)>;

    DomainSpec() = default;

    DomainSpec(Eigen::VectorXd lower, Eigen::VectorXd upper, Predicate predicate = {})
        : lower_(std::move(lower)), upper_(std::move(upper)),
          predicate_(std::move(predicate)) {
        if (lower_.size() != upper_.size())
            throw DimensionMismatch("domain box bounds differ in length");
        for (Eigen::Index i = 0; i < lower_.size(); ++i)
            if (!(lower_(i) < upper_(i)))
                throw DomainViolation("domain box is empty in component " +
                                      std::to_string(i));
    }

    static double boundary_margin(double bound) {
        return 1e-9 * std::max(1.0, std::abs(bound));
    }

    Eigen::Index dimension() const { return lower_.size(); }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    const Predicate& predicate() const { return predicate_; }

    bool inside_box(const Eigen::VectorXd& x) const {
        if (x.size() != lower_.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x(i))) return false;
            if (!(x(i) > lower_(i) + boundary_margin(lower_(i)))) return false;
            if (!(x(i) < upper_(i) - boundary_margin(upper_(i)))) return false;
        }
        return true;
    }

    bool contains(const Eigen::VectorXd& x) const {
        if (!inside_box(x)) return false;
        if (predicate_ && !predicate_(x)) return false;
        return true;
    }

private:
    Eigen::VectorXd lower_, upper_;
    Predicate predicate_;
};

/// An evaluable map from an open convex domain in R^m to R with exact
/// value, gradient and Hessian at any admissible point. The evaluator is
/// pure and deterministic: the same point yields a bit-identical jet.
/// Fields are immutable after construction and safe to share between
/// threads.
class ScalarField {
public:
    using Evaluator = std::function<Jet2(const Eigen::VectorXd&)>;
    using DualExpression = std::function<Dual2(const std::vector<Dual2>&)>;

    ScalarField() = default;

    ScalarField(std::string provenance, std::vector<std::string> labels,
                DomainSpec domain, Evaluator evaluator)
        : provenance_(std::move(provenance)), labels_(std::move(labels)),
          domain_(std::move(domain)), evaluator_(std::move(evaluator)) {
        if (labels_.size() != static_cast<std::size_t>(domain_.dimension()))
            throw DimensionMismatch("field labels do not match domain dimension");
    }

    /// Build a field from a closed-form expression written in Dual2
    /// arithmetic; jets come out exact by forward propagation.
    static ScalarField from_expression(std::string provenance,
                                       std::vector<std::string> labels,
                                       DomainSpec domain, DualExpression expr) {
        const Eigen::Index m = domain.dimension();
        Evaluator ev = [expr = std::move(expr), m](const Eigen::VectorXd& x) -> Jet2 {
            std::vector<Dual2> vars;
            vars.reserve(static_cast<std::size_t>(m));
            for (Eigen::Index i = 0; i < m; ++i)
                vars.push_back(Dual2::variable(x(i), i, m));
            return to_jet(expr(vars));
        };
        return {std::move(provenance), std::move(labels), std::move(domain),
                std::move(ev)};
    }

    Eigen::Index dimension() const { return domain_.dimension(); }
    const DomainSpec& domain() const { return domain_; }
    const std::string& provenance() const { return provenance_; }
    const std::vector<std::string>& labels() const { return labels_; }

    Jet2 operator()(const Eigen::VectorXd& x) const {
        if (x.size() != dimension())
            throw DimensionMismatch("field '" + provenance_ + "' expects dimension " +
                                    std::to_string(dimension()));
        if (!domain_.contains(x))
            throw DomainViolation("point " + format_point(x) +
                                  " outside domain of field '" + provenance_ + "'");
        Jet2 jet = evaluator_(x);
        if (!jet.all_finite())
            throw NonFinite("field '" + provenance_ + "' produced a non-finite jet at " +
                            format_point(x));
        return jet;
    }

    Jet2 evaluate(const Point& p) const { return (*this)(p.coords); }

    double value(const Eigen::VectorXd& x) const { return (*this)(x).value; }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        return (*this)(x).gradient;
    }
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const {
        return (*this)(x).hessian;
    }

    ScalarField with_provenance(std::string p) const {
        ScalarField f = *this;
        f.provenance_ = std::move(p);
        return f;
    }

private:
    std::string provenance_;
    std::vector<std::string> labels_;
    DomainSpec domain_;
    Evaluator evaluator_;
};

/// evaluate_jet2: spelled-out form of ScalarField::operator().
inline Jet2 evaluate_jet2(const ScalarField& field, const Point& p) {
    return field.evaluate(p);
}

/// Evaluate a field whose arguments are themselves Dual2 expressions of
/// some outer variables. Applies the exact second-order chain rule:
///   grad = J^T g,   hess = J^T H J + sum_i g_i Hess(arg_i)
/// where (g, H) is the inner jet and J the Jacobian of the arguments.
inline Dual2 compose(const ScalarField& field, const std::vector<Dual2>& args) {
    const Eigen::Index m = field.dimension();
    if (static_cast<Eigen::Index>(args.size()) != m)
        throw DimensionMismatch("compose: argument count does not match field dimension");
    const Eigen::Index n = args.front().vars();

    Eigen::VectorXd u(m);
    for (Eigen::Index i = 0; i < m; ++i) u(i) = args[static_cast<std::size_t>(i)].value;
    const Jet2 inner = field(u);

    Eigen::MatrixXd jac(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        jac.row(i) = args[static_cast<std::size_t>(i)].grad.transpose();

    Eigen::VectorXd grad = jac.transpose() * inner.gradient;
    Eigen::MatrixXd hess = jac.transpose() * inner.hessian * jac;
    for (Eigen::Index i = 0; i < m; ++i)
        hess.noalias() += inner.gradient(i) * args[static_cast<std::size_t>(i)].hess;
    return {inner.value, std::move(grad), std::move(hess)};
}

/// -f, as a field. Swaps convexity for concavity and mirrors Hessian
/// definiteness.
inline ScalarField negate(const ScalarField& f) {
    return {"-(" + f.provenance() + ")", f.labels(), f.domain(),
            [f](const Eigen::VectorXd& x) -> Jet2 {
                Jet2 j = f(x);
                j.value = -j.value;
                j.gradient = -j.gradient;
                j.hessian = -j.hessian;
                return j;
            }};
}

/// c*f, as a field. Positive c preserves convexity type.
inline ScalarField scale_field(const ScalarField& f, double c) {
    return {std::to_string(c) + "*(" + f.provenance() + ")", f.labels(), f.domain(),
            [f, c](const Eigen::VectorXd& x) -> Jet2 {
                Jet2 j = f(x);
                j.value *= c;
                j.gradient *= c;
                j.hessian *= c;
                return j;
            }};
}

/// Characteristic scale of a coordinate, used for finite-difference
/// steps and relative tolerances: state variables span orders of
/// magnitude, so steps are taken relative to max(1, |x_i|).
inline double characteristic_scale(double xi) { return std::max(1.0, std::abs(xi)); }

/// Central-difference gradient; test oracle, independent of the jet path
/// (only field values enter).
inline Eigen::VectorXd fd_gradient(const ScalarField& field, const Eigen::VectorXd& p,
                                   double h) {
    const Eigen::Index m = field.dimension();
    Eigen::VectorXd g(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double hi = h * characteristic_scale(p(i));
        Eigen::VectorXd a = p, b = p;
        a(i) += hi;
        b(i) -= hi;
        g(i) = (field(a).value - field(b).value) / (2.0 * hi);
    }
    return g;
}

/// Central second-difference Hessian; the independent oracle used to
/// cross-validate exact jets. Throws DomainViolation if any stencil
/// point exits the domain.
inline Eigen::MatrixXd fd_hessian(const ScalarField& field, const Eigen::VectorXd& p,
                                  double h) {
    const Eigen::Index m = field.dimension();
    Eigen::MatrixXd hess(m, m);
    const double f0 = field(p).value;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double hi = h * characteristic_scale(p(i));
        Eigen::VectorXd a = p, b = p;
        a(i) += hi;
        b(i) -= hi;
        hess(i, i) = (field(a).value - 2.0 * f0 + field(b).value) / (hi * hi);
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double hj = h * characteristic_scale(p(j));
            Eigen::VectorXd pp = p, pm = p, mp = p, mm = p;
            pp(i) += hi; pp(j) += hj;
            pm(i) += hi; pm(j) -= hj;
            mp(i) -= hi; mp(j) += hj;
            mm(i) -= hi; mm(j) -= hj;
            const double mixed = (field(pp).value - field(pm).value -
                                  field(mp).value + field(mm).value) /
                                 (4.0 * hi * hj);
            hess(i, j) = mixed;
            hess(j, i) = mixed;
        }
    }
    return hess;
}

} // namespace thermoconvex
