#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermoconvex/convexity.hpp"
#include "thermoconvex/dual2.hpp"
#include "thermoconvex/errors.hpp"
#include "thermoconvex/field.hpp"
#include "thermoconvex/linalg.hpp"

namespace thermoconvex {

/// Settings for the implicit inversions (Legendre gradient map, exchange
/// pivot). Residual tolerance is relative to max(1, |target|).
struct SolverSettings {
    double tolerance = 1e-12;
    int max_iterations = 50;
};

namespace detail {

inline std::vector<Eigen::VectorXd> box_corners(const Eigen::VectorXd& lo,
                                                const Eigen::VectorXd& hi) {
    const Eigen::Index m = lo.size();
    if (m > 12) throw DimensionMismatch("box corner enumeration limited to 12 dims");
    std::vector<Eigen::VectorXd> corners;
    corners.reserve(std::size_t(1) << m);
    for (std::size_t mask = 0; mask < (std::size_t(1) << m); ++mask) {
        Eigen::VectorXd c(m);
        for (Eigen::Index i = 0; i < m; ++i)
            c(i) = (mask >> i) & 1 ? hi(i) : lo(i);
        corners.push_back(std::move(c));
    }
    return corners;
}

/// Deterministic interior probe set of a domain: a coarse cell-center
/// grid plus near-corner points, filtered by the predicate. Used to
/// estimate image boxes, value ranges and derivative signs at transform
/// construction time.
inline std::vector<Eigen::VectorXd> construction_probes(const DomainSpec& dom) {
    const Eigen::Index m = dom.dimension();
    int res = 33;
    if (m == 3) res = 9;
    else if (m == 4) res = 6;
    else if (m >= 5) res = 5;

    std::vector<Eigen::VectorXd> pts;
    long total = 1;
    for (Eigen::Index i = 0; i < m; ++i) total *= res;
    for (long idx = 0; idx < total; ++idx) {
        Eigen::VectorXd x(m);
        long rem = idx;
        for (Eigen::Index i = 0; i < m; ++i) {
            const long cell = rem % res;
            rem /= res;
            x(i) = dom.lower()(i) +
                   (double(cell) + 0.5) * (dom.upper()(i) - dom.lower()(i)) / res;
        }
        if (dom.contains(x)) pts.push_back(std::move(x));
    }
    const Eigen::VectorXd span = dom.upper() - dom.lower();
    for (Eigen::VectorXd c : box_corners(dom.lower(), dom.upper())) {
        for (Eigen::Index i = 0; i < m; ++i)
            c(i) += (c(i) == dom.lower()(i) ? 1.0 : -1.0) * 1e-6 * span(i);
        if (dom.contains(c)) pts.push_back(std::move(c));
    }
    return pts;
}

inline std::pair<Eigen::VectorXd, Eigen::VectorXd>
bounding_box(const std::vector<Eigen::VectorXd>& pts) {
    if (pts.empty()) throw Error("bounding box of empty point set");
    Eigen::VectorXd lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

inline void inflate_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi, double rel) {
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const double pad = rel * (hi(i) - lo(i)) + 1e-12;
        lo(i) -= pad;
        hi(i) += pad;
    }
}

inline std::vector<std::string> default_labels(Eigen::Index m, const std::string& stem) {
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < m; ++i) labels.push_back(stem + std::to_string(i + 1));
    return labels;
}

} // namespace detail

/// A transformed field together with the forward map taking source-space
/// points to the new coordinates, so probe sets can follow a chain.
struct TransformedField {
    ScalarField field;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map_point;
};

// ---------------------------------------------------------------------------
// Newton solvers
// ---------------------------------------------------------------------------

/// Solve grad(f)(u) = w by damped Newton with backtracking that respects
/// the domain. Seeds are tried in order; residual tolerance is relative
/// to max(1, |w|).
inline Eigen::VectorXd solve_gradient_equation(const ScalarField& f,
                                               const Eigen::VectorXd& w,
                                               const std::vector<Eigen::VectorXd>& seeds,
                                               const SolverSettings& settings) {
    const double target = settings.tolerance * std::max(1.0, w.norm());
    std::string last_failure = "no admissible seed";
    for (const Eigen::VectorXd& seed : seeds) {
        if (!f.domain().contains(seed)) continue;
        Eigen::VectorXd u = seed;
        Jet2 jet = f(u);
        double res = (jet.gradient - w).norm();
        bool stalled = false;
        for (int it = 0; it < settings.max_iterations && !stalled; ++it) {
            if (res <= target) return u;
            Eigen::VectorXd step;
            try {
                step = solve_linear(jet.hessian, w - jet.gradient);
            } catch (const SingularHessian&) {
                last_failure = "singular Hessian during Newton step";
                stalled = true;
                break;
            }
            double t = 1.0;
            bool accepted = false;
            while (t >= 0x1p-40) {
                const Eigen::VectorXd u_try = u + t * step;
                if (f.domain().contains(u_try)) {
                    const Jet2 jet_try = f(u_try);
                    const double res_try = (jet_try.gradient - w).norm();
                    if (res_try < res) {
                        u = u_try;
                        jet = jet_try;
                        res = res_try;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if (!accepted) {
                last_failure = "line search stalled at residual " + std::to_string(res);
                stalled = true;
            }
        }
        if (!stalled && res <= target) return u;
        if (!stalled)
            last_failure = "residual " + std::to_string(res) + " after " +
                           std::to_string(settings.max_iterations) + " iterations";
    }
    throw NewtonDivergence("gradient-map inversion failed for field '" +
                           f.provenance() + "' at w = " + format_point(w) + ": " +
                           last_failure);
}

/// Solve f(..., u_k, ...) = target for the single slot k by safeguarded
/// Newton with a bisection bracket. expected_sign is the required sign
/// of df/du_k; a wrong-signed derivative raises MonotonicityViolation.
inline double solve_scalar_in_slot(const ScalarField& f, Eigen::VectorXd base, int k,
                                   double target, double lo, double hi,
                                   int expected_sign, const SolverSettings& settings) {
    auto eval = [&](double x) -> Jet2 {
        base(k) = x;
        return f(base);
    };
    auto shrink_into_domain = [&](double x, double toward) {
        for (int i = 0; i < 80; ++i) {
            base(k) = x;
            if (f.domain().contains(base)) return x;
            x += 0.1 * (toward - x);
        }
        throw BracketFailure("no admissible bracket endpoint near " + std::to_string(x) +
                             " for field '" + f.provenance() + "'");
    };

    const double mid0 = 0.5 * (lo + hi);
    lo = shrink_into_domain(lo, mid0);
    hi = shrink_into_domain(hi, mid0);

    double flo = eval(lo).value - target;
    double fhi = eval(hi).value - target;
    const double tol = settings.tolerance * std::max(1.0, std::abs(target));
    if (std::abs(flo) <= tol) return lo;
    if (std::abs(fhi) <= tol) return hi;
    if (flo * fhi > 0.0)
        throw BracketFailure("no sign change for target " + std::to_string(target) +
                             " in slot " + std::to_string(k) + " of field '" +
                             f.provenance() + "'");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < settings.max_iterations + 100; ++it) {
        Jet2 jet = eval(x);
        const double fx = jet.value - target;
        const double dfx = jet.gradient(k);
        if (expected_sign != 0 && (dfx == 0.0 || (dfx > 0) != (expected_sign > 0)))
            throw MonotonicityViolation(
                "pivot derivative changed sign during exchange inversion of field '" +
                f.provenance() + "'");
        if (std::abs(fx) <= tol) return x;
        // keep the bracket tight
        if ((fx > 0.0) == (fhi > 0.0)) { hi = x; fhi = fx; }
        else { lo = x; flo = fx; }
        double x_next = x - fx / dfx;
        if (!(x_next > std::min(lo, hi) && x_next < std::max(lo, hi)))
            x_next = 0.5 * (lo + hi);
        if (x_next == x) x_next = 0.5 * (lo + hi);
        x = x_next;
        if (std::abs(hi - lo) < 1e-17 * std::max(1.0, std::abs(x))) break;
    }
    Jet2 jet = eval(x);
    if (std::abs(jet.value - target) <= tol) return x;
    throw NewtonDivergence("scalar inversion did not reach tolerance for field '" +
                           f.provenance() + "' (target " + std::to_string(target) + ")");
}

// ---------------------------------------------------------------------------
// Legendre transformation
// ---------------------------------------------------------------------------

/// Legendre transform psi(w) = w.u - phi(u) along the gradient map
/// w = phi_u(u). Evaluation solves the gradient equation by damped
/// Newton from the stored seeds; the jet is
///   psi = w.u - phi(u),  psi_w = u,  psi_ww = phi_uu(u)^{-1}.
/// The image domain is represented implicitly: membership means the
/// solver converges from one of the seeds.
inline TransformedField legendre(const ScalarField& field, const Eigen::VectorXd& seed,
                                 SolverSettings settings = {},
                                 std::string name = {},
                                 std::vector<std::string> labels = {}) {
    if (seed.size() != field.dimension())
        throw DimensionMismatch("legendre seed dimension mismatch");

    std::vector<Eigen::VectorXd> seeds{seed};
    {
        Eigen::VectorXd center = 0.5 * (field.domain().lower() + field.domain().upper());
        if ((center - seed).norm() > 0.0) seeds.push_back(std::move(center));
    }

    std::vector<Eigen::VectorXd> images;
    for (const auto& p : detail::construction_probes(field.domain()))
        images.push_back(field(p).gradient);
    auto [lo, hi] = detail::bounding_box(images);
    detail::inflate_box(lo, hi, 0.1);

    auto solver = [field, seeds, settings](const Eigen::VectorXd& w) {
        return solve_gradient_equation(field, w, seeds, settings);
    };

    DomainSpec dom(lo, hi, [solver](const Eigen::VectorXd& w) {
        try {
            solver(w);
            return true;
        } catch (const Error&) {
            return false;
        }
    });

    if (name.empty()) name = "legendre(" + field.provenance() + ")";
    if (labels.empty()) labels = detail::default_labels(field.dimension(), "w");

    ScalarField out(
        std::move(name), std::move(labels), std::move(dom),
        [field, solver](const Eigen::VectorXd& w) -> Jet2 {
            const Eigen::VectorXd u = solver(w);
            const Jet2 jet = field(u);
            Jet2 result;
            result.value = w.dot(u) - jet.value;
            result.gradient = u;
            result.hessian = invert_hessian(jet.hessian);
            return result;
        });

    return {std::move(out),
            [field](const Eigen::VectorXd& u) { return field(u).gradient; }};
}

/// Sign-reversed Legendre variant psi(w) = phi(u) - w.u over the same
/// gradient map; swaps convexity for concavity. This is the form behind
/// enthalpy and the free energies.
inline TransformedField legendre_concave(const ScalarField& field,
                                         const Eigen::VectorXd& seed,
                                         SolverSettings settings = {},
                                         std::string name = {},
                                         std::vector<std::string> labels = {}) {
    TransformedField plain = legendre(field, seed, settings,
                                      name.empty() ? "legendre-concave(" +
                                                         field.provenance() + ")"
                                                   : name,
                                      std::move(labels));
    ScalarField inner = plain.field;
    ScalarField out(inner.provenance(), inner.labels(), inner.domain(),
                    [inner](const Eigen::VectorXd& w) -> Jet2 {
                        Jet2 j = inner(w);
                        j.value = -j.value;
                        j.gradient = -j.gradient;
                        j.hessian = -j.hessian;
                        return j;
                    });
    return {std::move(out), plain.map_point};
}

// ---------------------------------------------------------------------------
// Reciprocal involution
// ---------------------------------------------------------------------------

/// Map a point through the reciprocal involution with the given pivot:
/// w_k = 1/u_k, w_i = u_i/u_k. The map is its own inverse.
inline Eigen::VectorXd reciprocal_map(const Eigen::VectorXd& u, int pivot) {
    Eigen::VectorXd w = u / u(pivot);
    w(pivot) = 1.0 / u(pivot);
    return w;
}

/// Reciprocal involution psi(w) = w_k phi(T_R^{-1} w); the pivot must be
/// strictly one-signed over the source box. Jets are propagated by
/// direct second-order arithmetic through the variable map, not via the
/// congruence identity, so the identity remains an independent check.
inline TransformedField reciprocal(const ScalarField& field, int pivot,
                                   std::string name = {},
                                   std::vector<std::string> labels = {}) {
    const Eigen::Index m = field.dimension();
    if (pivot < 0 || pivot >= m)
        throw DimensionMismatch("reciprocal pivot out of range");
    const double lo_pivot = field.domain().lower()(pivot);
    const double hi_pivot = field.domain().upper()(pivot);
    if (lo_pivot <= 0.0 && hi_pivot >= 0.0)
        throw PivotSignViolation("reciprocal pivot variable " + std::to_string(pivot) +
                                 " can vanish inside the box of '" +
                                 field.provenance() + "'");

    std::vector<Eigen::VectorXd> images;
    for (const auto& c : detail::box_corners(field.domain().lower(),
                                             field.domain().upper()))
        images.push_back(reciprocal_map(c, pivot));
    auto [lo, hi] = detail::bounding_box(images);
    detail::inflate_box(lo, hi, 1e-6);

    DomainSpec dom(lo, hi, [field, pivot, lo_pivot](const Eigen::VectorXd& w) {
        if (lo_pivot > 0.0 ? !(w(pivot) > 0.0) : !(w(pivot) < 0.0)) return false;
        return field.domain().contains(reciprocal_map(w, pivot));
    });

    if (name.empty())
        name = "reciprocal(" + field.provenance() + "; pivot " +
               std::to_string(pivot + 1) + ")";
    if (labels.empty()) labels = detail::default_labels(m, "w");

    ScalarField out(std::move(name), std::move(labels), std::move(dom),
                    [field, pivot, m](const Eigen::VectorXd& w) -> Jet2 {
                        const Dual2 wk = Dual2::variable(w(pivot), pivot, m);
                        std::vector<Dual2> args;
                        args.reserve(std::size_t(m));
                        const Dual2 inv_wk = inverse(wk);
                        for (Eigen::Index i = 0; i < m; ++i) {
                            if (i == pivot) args.push_back(inv_wk);
                            else
                                args.push_back(Dual2::variable(w(i), i, m) * inv_wk);
                        }
                        return to_jet(wk * compose(field, args));
                    });

    return {std::move(out),
            [pivot](const Eigen::VectorXd& u) { return reciprocal_map(u, pivot); }};
}

// ---------------------------------------------------------------------------
// Exchange of a variable with the function
// ---------------------------------------------------------------------------

/// Exchange involution: the pivot variable swaps roles with the function
/// value, so psi(phi(u), u_hat) = u_k. Requires phi strictly monotone in
/// the pivot over the box. Evaluation inverts the monotone slice by
/// safeguarded Newton/bisection; jets follow from inverting the
/// second-order data of the forward map (w_k = phi, w_i = u_i).
inline TransformedField exchange(const ScalarField& field, int pivot,
                                 SolverSettings settings = {},
                                 std::string name = {},
                                 std::vector<std::string> labels = {}) {
    const Eigen::Index m = field.dimension();
    if (pivot < 0 || pivot >= m)
        throw DimensionMismatch("exchange pivot out of range");

    // Establish the pivot-derivative sign and the value range on a
    // deterministic probe set.
    int sign = 0;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    for (const auto& p : detail::construction_probes(field.domain())) {
        const Jet2 j = field(p);
        const int s = j.gradient(pivot) > 0.0 ? 1 : (j.gradient(pivot) < 0.0 ? -1 : 0);
        if (s == 0)
            throw MonotonicityViolation("exchange pivot derivative vanishes at " +
                                        format_point(p) + " for '" +
                                        field.provenance() + "'");
        if (sign == 0) sign = s;
        else if (s != sign)
            throw MonotonicityViolation("exchange pivot derivative changes sign over '" +
                                        field.provenance() + "'");
        vmin = std::min(vmin, j.value);
        vmax = std::max(vmax, j.value);
    }
    if (sign == 0)
        throw MonotonicityViolation("exchange found no admissible probe in '" +
                                    field.provenance() + "'");

    Eigen::VectorXd lo = field.domain().lower(), hi = field.domain().upper();
    const double pad = 0.1 * (vmax - vmin) + 1e-9 * std::max(1.0, std::abs(vmax));
    lo(pivot) = vmin - pad;
    hi(pivot) = vmax + pad;

    const double slot_lo = field.domain().lower()(pivot);
    const double slot_hi = field.domain().upper()(pivot);

    auto solve = [field, pivot, slot_lo, slot_hi, sign,
                  settings](const Eigen::VectorXd& w) -> double {
        Eigen::VectorXd base = w;
        const double margin = DomainSpec::boundary_margin(slot_lo) +
                              1e-12 * (slot_hi - slot_lo);
        return solve_scalar_in_slot(field, base, pivot, w(pivot),
                                    slot_lo + margin, slot_hi - margin, sign, settings);
    };

    DomainSpec dom(lo, hi, [solve](const Eigen::VectorXd& w) {
        try {
            solve(w);
            return true;
        } catch (const Error&) {
            return false;
        }
    });

    if (name.empty())
        name = "exchange(" + field.provenance() + "; slot " + std::to_string(pivot + 1) +
               ")";
    if (labels.empty()) labels = detail::default_labels(m, "w");

    ScalarField out(
        std::move(name), std::move(labels), std::move(dom),
        [field, solve, pivot, m](const Eigen::VectorXd& w) -> Jet2 {
            Eigen::VectorXd u = w;
            u(pivot) = solve(w);
            const Jet2 inner = field(u);

            // Forward map G: u -> (u with slot k replaced by phi(u)).
            Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(m, m);
            jac.row(pivot) = inner.gradient.transpose();
            const Eigen::MatrixXd jac_inv = jac.inverse();

            Jet2 result;
            result.value = u(pivot);
            result.gradient = jac_inv.row(pivot).transpose();
            result.hessian =
                (-jac_inv(pivot, pivot)) *
                (jac_inv.transpose() * inner.hessian * jac_inv);
            return result;
        });

    return {std::move(out), [field, pivot](const Eigen::VectorXd& u) {
                Eigen::VectorXd w = u;
                w(pivot) = field(u).value;
                return w;
            }};
}

/// Exchange of u(v,s) into s(v,u); requires u_s = theta > 0.
inline TransformedField exchange_to_s_of_vu(const ScalarField& u_vs,
                                            SolverSettings settings = {}) {
    return exchange(u_vs, 1, settings, "s(v,u) from " + u_vs.provenance(),
                    {"v [m^3/kg]", "u [J/kg]"});
}

// ---------------------------------------------------------------------------
// Affine transformations and sign flips
// ---------------------------------------------------------------------------

/// True when an affine coordinate map with matrix T carries Hessian
/// definiteness over (square and comfortably invertible).
inline bool affine_preserves_definiteness(const Eigen::MatrixXd& t) {
    return t.rows() == t.cols() && condition_estimate(t) < 1e12;
}

/// psi(w) = phi(T w + b); the Hessian transforms by congruence
/// T^T phi_uu T. Rank-deficient T is allowed but then definiteness
/// degrades to semi-definiteness.
inline TransformedField affine(const ScalarField& field, const Eigen::MatrixXd& t,
                               const Eigen::VectorXd& b, std::string name = {},
                               std::vector<std::string> labels = {}) {
    const Eigen::Index m = field.dimension();
    if (t.rows() != m || b.size() != m)
        throw DimensionMismatch("affine transform shape does not match field dimension");
    const Eigen::Index n = t.cols();

    const bool invertible = affine_preserves_definiteness(t);
    Eigen::MatrixXd t_inv;
    if (invertible) t_inv = t.inverse();

    Eigen::VectorXd lo, hi;
    if (invertible) {
        std::vector<Eigen::VectorXd> images;
        for (const auto& c : detail::box_corners(field.domain().lower(),
                                                 field.domain().upper()))
            images.push_back(t_inv * (c - b));
        std::tie(lo, hi) = detail::bounding_box(images);
        detail::inflate_box(lo, hi, 1e-6);
    } else {
        lo = Eigen::VectorXd::Constant(n, -1e30);
        hi = Eigen::VectorXd::Constant(n, 1e30);
    }

    DomainSpec dom(lo, hi, [field, t, b](const Eigen::VectorXd& w) {
        return field.domain().contains(t * w + b);
    });

    if (name.empty()) name = "affine(" + field.provenance() + ")";
    if (labels.empty()) labels = detail::default_labels(n, "w");

    ScalarField out(std::move(name), std::move(labels), std::move(dom),
                    [field, t, b, m, n](const Eigen::VectorXd& w) -> Jet2 {
                        std::vector<Dual2> args;
                        args.reserve(std::size_t(m));
                        const Eigen::VectorXd u = t * w + b;
                        for (Eigen::Index i = 0; i < m; ++i)
                            args.emplace_back(u(i), Eigen::VectorXd(t.row(i)),
                                              Eigen::MatrixXd::Zero(n, n));
                        return to_jet(compose(field, args));
                    });

    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map_point;
    if (invertible)
        map_point = [t_inv, b](const Eigen::VectorXd& u) {
            return Eigen::VectorXd(t_inv * (u - b));
        };
    else
        map_point = [](const Eigen::VectorXd&) -> Eigen::VectorXd {
            throw DimensionMismatch("affine map with singular T has no point map");
        };
    return {std::move(out), std::move(map_point)};
}

/// Diagonal +-1 coordinate flips; the transformed function inherits all
/// convexity and definiteness properties.
inline TransformedField sign_flip(const ScalarField& field, const Eigen::VectorXd& signs,
                                  std::string name = {},
                                  std::vector<std::string> labels = {}) {
    const Eigen::Index m = field.dimension();
    if (signs.size() != m) throw DimensionMismatch("sign vector dimension mismatch");
    for (Eigen::Index i = 0; i < m; ++i)
        if (signs(i) != 1.0 && signs(i) != -1.0)
            throw ConfigError("sign flip entries must be +1 or -1");
    if (name.empty()) name = "sign-flip(" + field.provenance() + ")";
    return affine(field, Eigen::MatrixXd(signs.asDiagonal()), Eigen::VectorXd::Zero(m),
                  std::move(name), std::move(labels));
}

/// Sign flip of a single slot.
inline TransformedField sign_flip_slot(const ScalarField& field, int slot,
                                       std::string name = {},
                                       std::vector<std::string> labels = {}) {
    Eigen::VectorXd signs = Eigen::VectorXd::Ones(field.dimension());
    signs(slot) = -1.0;
    return sign_flip(field, signs, std::move(name), std::move(labels));
}

// ---------------------------------------------------------------------------
// Congruence identities from the involution theorems
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::MatrixXd pivot_first_permutation(Eigen::Index m, int pivot) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
    p(0, pivot) = 1.0;
    Eigen::Index row = 1;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (i == pivot) continue;
        p(row++, i) = 1.0;
    }
    return p;
}

} // namespace detail

/// Relative Frobenius residual of the reciprocal-involution congruence
/// D^T F^T psi_ww F D = u_k phi_uu, with the Frobenius matrix F carrying
/// the hatted coordinates and D = diag(-1/u_k, I), both taken in the
/// pivot-first frame.
inline double reciprocal_congruence_residual(const Eigen::MatrixXd& psi_ww,
                                             const Eigen::MatrixXd& phi_uu,
                                             const Eigen::VectorXd& u, int pivot) {
    const Eigen::Index m = u.size();
    const Eigen::MatrixXd perm = detail::pivot_first_permutation(m, pivot);
    const Eigen::MatrixXd psi_p = perm * psi_ww * perm.transpose();
    const Eigen::MatrixXd phi_p = perm * phi_uu * perm.transpose();
    const Eigen::VectorXd u_p = perm * u;

    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(m, m);
    f.col(0).tail(m - 1) = u_p.tail(m - 1);
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(m, m);
    d(0, 0) = -1.0 / u_p(0);

    const Eigen::MatrixXd lhs =
        d.transpose() * f.transpose() * psi_p * f * d;
    const Eigen::MatrixXd rhs = u_p(0) * phi_p;
    return relative_matrix_difference(lhs, rhs);
}

/// Relative Frobenius residual of the exchange congruence
/// D^T F^T psi_ww F D = -(1/phi_k) phi_uu in the pivot-first frame,
/// where F carries the hatted gradient and D = diag(phi_k, I).
inline double exchange_congruence_residual(const Eigen::MatrixXd& psi_ww,
                                           const Jet2& phi_at_u, int pivot) {
    const Eigen::Index m = phi_at_u.gradient.size();
    const Eigen::MatrixXd perm = detail::pivot_first_permutation(m, pivot);
    const Eigen::MatrixXd psi_p = perm * psi_ww * perm.transpose();
    const Eigen::MatrixXd phi_p = perm * phi_at_u.hessian * perm.transpose();
    const Eigen::VectorXd grad_p = perm * phi_at_u.gradient;

    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(m, m);
    f.row(0).tail(m - 1) = grad_p.tail(m - 1).transpose();
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(m, m);
    d(0, 0) = grad_p(0);

    const Eigen::MatrixXd lhs = d.transpose() * f.transpose() * psi_p * f * d;
    const Eigen::MatrixXd rhs = (-1.0 / grad_p(0)) * phi_p;
    return relative_matrix_difference(lhs, rhs);
}

// ---------------------------------------------------------------------------
// Declarative chains
// ---------------------------------------------------------------------------

enum class TransformKind { Legendre, LegendreConcave, Reciprocal, Exchange, Affine, SignFlip };

inline const char* to_string(TransformKind k) {
    switch (k) {
    case TransformKind::Legendre: return "legendre";
    case TransformKind::LegendreConcave: return "legendre-concave";
    case TransformKind::Reciprocal: return "reciprocal";
    case TransformKind::Exchange: return "exchange";
    case TransformKind::Affine: return "affine";
    case TransformKind::SignFlip: return "sign-flip";
    }
    return "?";
}

/// One declarative transformation step. pivot is 0-based in the C++ API;
/// the JSON config uses 1-based indices.
struct TransformRecord {
    TransformKind kind = TransformKind::Legendre;
    int pivot = 0;
    Eigen::MatrixXd affine_t;
    Eigen::VectorXd affine_b;
    Eigen::VectorXd signs;
    SolverSettings solver;
};

/// Expected convexity-type verdict at one chain stage. "Strict" claims
/// are tested by segment sampling; "definite" claims by eigenvalues —
/// strict convexity does not imply a definite Hessian, so the vocabulary
/// keeps them distinct.
enum class ExpectedProperty {
    None,
    Convex,
    StrictlyConvex,
    Concave,
    StrictlyConcave,
    PositiveDefinite,
    NegativeDefinite,
    PositiveSemiDefinite,
    NegativeSemiDefinite,
};

inline const char* to_string(ExpectedProperty p) {
    switch (p) {
    case ExpectedProperty::None: return "none";
    case ExpectedProperty::Convex: return "convex";
    case ExpectedProperty::StrictlyConvex: return "strictly-convex";
    case ExpectedProperty::Concave: return "concave";
    case ExpectedProperty::StrictlyConcave: return "strictly-concave";
    case ExpectedProperty::PositiveDefinite: return "positive-definite";
    case ExpectedProperty::NegativeDefinite: return "negative-definite";
    case ExpectedProperty::PositiveSemiDefinite: return "positive-semi-definite";
    case ExpectedProperty::NegativeSemiDefinite: return "negative-semi-definite";
    }
    return "?";
}

struct ChainStage {
    std::string name;
    TransformRecord record;
    ExpectedProperty expect = ExpectedProperty::None;
    std::vector<std::string> labels;
    Eigen::VectorXd legendre_seed; // optional; defaults to the source box center
};

struct ChainSpec {
    std::string name;
    std::string start_label;
    ExpectedProperty expect_start = ExpectedProperty::None;
    std::vector<ChainStage> stages;
};

struct StageResult {
    std::string name;
    ExpectedProperty expect = ExpectedProperty::None;
    bool ok = true;
    int probes = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::array<int, 5> class_counts{};
    std::string note;
};

struct ChainReport {
    std::string chain;
    bool pass = true;
    int first_mismatch = -1; // stage index; 0 is the start field
    std::vector<StageResult> stages;
};

inline TransformedField apply_transform(const TransformRecord& rec,
                                        const ScalarField& src,
                                        const std::string& name = {},
                                        std::vector<std::string> labels = {},
                                        const Eigen::VectorXd& legendre_seed = {}) {
    switch (rec.kind) {
    case TransformKind::Legendre: {
        Eigen::VectorXd seed = legendre_seed.size()
                                   ? legendre_seed
                                   : Eigen::VectorXd(0.5 * (src.domain().lower() +
                                                            src.domain().upper()));
        return legendre(src, seed, rec.solver, name, std::move(labels));
    }
    case TransformKind::LegendreConcave: {
        Eigen::VectorXd seed = legendre_seed.size()
                                   ? legendre_seed
                                   : Eigen::VectorXd(0.5 * (src.domain().lower() +
                                                            src.domain().upper()));
        return legendre_concave(src, seed, rec.solver, name, std::move(labels));
    }
    case TransformKind::Reciprocal:
        return reciprocal(src, rec.pivot, name, std::move(labels));
    case TransformKind::Exchange:
        return exchange(src, rec.pivot, rec.solver, name, std::move(labels));
    case TransformKind::Affine:
        return affine(src, rec.affine_t, rec.affine_b, name, std::move(labels));
    case TransformKind::SignFlip:
        return sign_flip(src, rec.signs, name, std::move(labels));
    }
    throw ConfigError("unknown transform kind");
}

namespace detail {

inline StageResult evaluate_expectation(const ScalarField& f, const std::string& name,
                                        ExpectedProperty expect,
                                        const std::vector<Eigen::VectorXd>& probes,
                                        double scale_floor, int threads) {
    StageResult r;
    r.name = name;
    r.expect = expect;
    r.probes = static_cast<int>(probes.size());
    if (expect == ExpectedProperty::None) return r;

    auto definite = [&](DefinitenessClass cls) {
        RegionReport rep = sweep_points(f, probes, cls, scale_floor, threads);
        r.worst_margin = rep.worst_margin;
        r.class_counts = rep.counts;
        if (!rep.pass()) {
            r.ok = false;
            r.note = std::to_string(rep.violation_indices.size()) +
                     " probes off-class (expected " + std::string(to_string(cls)) + ")";
        }
    };

    auto segments = [&](bool strict, bool concave) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < probes.size(); i += 2) {
            try {
                SegmentTestResult st = segment_convexity_test(f, probes[i], probes[i + 1],
                                                              9, concave);
                worst = std::min(worst, st.worst_residual);
                if (strict ? !st.strict_ok : !st.convex_ok) r.ok = false;
            } catch (const DomainViolation& e) {
                // reported distinctly: the sampled segment left the domain
                r.ok = false;
                r.note = std::string("segment domain violation: ") + e.what();
                return;
            }
        }
        r.worst_margin = worst;
        if (!r.ok && r.note.empty()) r.note = "convexity inequality violated";
    };

    switch (expect) {
    case ExpectedProperty::PositiveDefinite:
        definite(DefinitenessClass::PositiveDefinite);
        break;
    case ExpectedProperty::NegativeDefinite:
        definite(DefinitenessClass::NegativeDefinite);
        break;
    case ExpectedProperty::PositiveSemiDefinite:
        definite(DefinitenessClass::PositiveSemiDefinite);
        break;
    case ExpectedProperty::NegativeSemiDefinite:
        definite(DefinitenessClass::NegativeSemiDefinite);
        break;
    case ExpectedProperty::Convex: segments(false, false); break;
    case ExpectedProperty::StrictlyConvex: segments(true, false); break;
    case ExpectedProperty::Concave: segments(false, true); break;
    case ExpectedProperty::StrictlyConcave: segments(true, true); break;
    case ExpectedProperty::None: break;
    }
    return r;
}

} // namespace detail

/// Execute a transformation chain: apply each step, push the probe set
/// through the variable maps, test every stage against its expected
/// verdict and report the first mismatch. Step errors propagate with the
/// stage index attached.
inline ChainReport run_chain(const ChainSpec& chain, const ScalarField& start,
                             const std::vector<Eigen::VectorXd>& probes,
                             double scale_floor = 1.0, int threads = 1) {
    ChainReport report;
    report.chain = chain.name;

    const std::string start_name =
        chain.start_label.empty() ? start.provenance() : chain.start_label;
    report.stages.push_back(detail::evaluate_expectation(
        start, start_name, chain.expect_start, probes, scale_floor, threads));

    ScalarField current = start;
    std::vector<Eigen::VectorXd> current_probes = probes;

    for (std::size_t k = 0; k < chain.stages.size(); ++k) {
        const ChainStage& stage = chain.stages[k];
        TransformedField next;
        try {
            next = apply_transform(stage.record, current, stage.name, stage.labels,
                                   stage.legendre_seed);
            std::vector<Eigen::VectorXd> mapped;
            mapped.reserve(current_probes.size());
            for (const auto& p : current_probes) mapped.push_back(next.map_point(p));
            current_probes = std::move(mapped);
        } catch (const Error& e) {
            throw Error("chain '" + chain.name + "' stage " + std::to_string(k + 1) +
                        " (" + stage.name + "): " + e.what());
        }
        current = next.field;
        StageResult r = detail::evaluate_expectation(
            current, stage.name.empty() ? current.provenance() : stage.name,
            stage.expect, current_probes, scale_floor, threads);
        if (stage.record.kind == TransformKind::Affine &&
            (stage.expect == ExpectedProperty::PositiveDefinite ||
             stage.expect == ExpectedProperty::NegativeDefinite) &&
            !affine_preserves_definiteness(stage.record.affine_t)) {
            r.ok = false;
            r.note = "affine matrix is not invertible: only semi-definiteness preserved";
        }
        report.stages.push_back(std::move(r));
    }

    for (std::size_t i = 0; i < report.stages.size(); ++i) {
        if (!report.stages[i].ok) {
            report.pass = false;
            report.first_mismatch = static_cast<int>(i);
            break;
        }
    }
    return report;
}

} // namespace thermoconvex
