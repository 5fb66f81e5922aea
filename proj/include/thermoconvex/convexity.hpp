#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thermoconvex/errors.hpp"
#include "thermoconvex/field.hpp"
#include "thermoconvex/linalg.hpp"
#include "thermoconvex/sampling.hpp"

namespace thermoconvex {

enum class DefinitenessClass {
    PositiveDefinite,
    PositiveSemiDefinite,
    NegativeDefinite,
    NegativeSemiDefinite,
    Indefinite,
};

inline const char* to_string(DefinitenessClass c) {
    switch (c) {
    case DefinitenessClass::PositiveDefinite: return "positive-definite";
    case DefinitenessClass::PositiveSemiDefinite: return "positive-semi-definite";
    case DefinitenessClass::NegativeDefinite: return "negative-definite";
    case DefinitenessClass::NegativeSemiDefinite: return "negative-semi-definite";
    case DefinitenessClass::Indefinite: return "indefinite";
    }
    return "?";
}

inline DefinitenessClass mirror(DefinitenessClass c) {
    switch (c) {
    case DefinitenessClass::PositiveDefinite: return DefinitenessClass::NegativeDefinite;
    case DefinitenessClass::PositiveSemiDefinite:
        return DefinitenessClass::NegativeSemiDefinite;
    case DefinitenessClass::NegativeDefinite: return DefinitenessClass::PositiveDefinite;
    case DefinitenessClass::NegativeSemiDefinite:
        return DefinitenessClass::PositiveSemiDefinite;
    case DefinitenessClass::Indefinite: return DefinitenessClass::Indefinite;
    }
    return c;
}

/// Classification of one symmetric matrix under the relative zero-band
/// policy. Eigenvalues inside the band count as zero and force a
/// semi-definite class (flagged near-degenerate); eigenvalues of both
/// signs outside the band win the tie as Indefinite.
struct DefinitenessVerdict {
    DefinitenessClass cls = DefinitenessClass::Indefinite;
    double min_eig = 0.0;
    double max_eig = 0.0;
    double scale = 0.0;   // Frobenius norm of the symmetrized matrix
    double band = 0.0;    // zero band actually used
    double margin = 0.0;  // min |eigenvalue| / max(scale, floor)
    double asymmetry = 0.0;
    bool near_degenerate = false;
    Eigen::VectorXd eigenvalues;          // ascending
    std::vector<double> leading_minors;   // Sylvester cross-check data
    bool minor_check_agrees = true;

    bool is(DefinitenessClass c) const { return cls == c; }
};

/// Eigenvalue-based definiteness classification with an independent
/// leading-principal-minor cross-check. scale_floor guards the zero band
/// for matrices whose natural scale is far below 1.
inline DefinitenessVerdict classify_hessian(const Eigen::MatrixXd& h,
                                            double scale_floor = 1.0) {
    if (h.rows() != h.cols())
        throw DimensionMismatch("classify_hessian: matrix is not square");

    DefinitenessVerdict v;
    v.asymmetry = asymmetry_ratio(h);
    if (v.asymmetry > 1e-8)
        throw AsymmetryTooLarge("matrix asymmetry " + std::to_string(v.asymmetry) +
                                " exceeds 1e-8 before symmetrization");
    const Eigen::MatrixXd hs = symmetric_part(h);
    v.eigenvalues = symmetric_eigenvalues(hs);
    v.min_eig = v.eigenvalues(0);
    v.max_eig = v.eigenvalues(v.eigenvalues.size() - 1);
    v.scale = hs.norm();
    v.band = 1e-9 * std::max(v.scale, scale_floor);

    int positive = 0, negative = 0, zero = 0;
    double min_abs = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.eigenvalues.size(); ++i) {
        const double ev = v.eigenvalues(i);
        min_abs = std::min(min_abs, std::abs(ev));
        if (ev > v.band) ++positive;
        else if (ev < -v.band) ++negative;
        else ++zero;
    }
    v.margin = min_abs / std::max({v.scale, scale_floor, 1e-300});
    v.near_degenerate = zero > 0;

    if (positive > 0 && negative > 0) v.cls = DefinitenessClass::Indefinite;
    else if (positive > 0 && zero > 0) v.cls = DefinitenessClass::PositiveSemiDefinite;
    else if (positive > 0) v.cls = DefinitenessClass::PositiveDefinite;
    else if (negative > 0 && zero > 0) v.cls = DefinitenessClass::NegativeSemiDefinite;
    else if (negative > 0) v.cls = DefinitenessClass::NegativeDefinite;
    else v.cls = DefinitenessClass::PositiveSemiDefinite; // all within band

    v.leading_minors = leading_principal_minors(hs);
    bool minors_pd = true, minors_nd = true;
    for (std::size_t k = 0; k < v.leading_minors.size(); ++k) {
        if (!(v.leading_minors[k] > 0.0)) minors_pd = false;
        const double alt = (k % 2 == 0) ? -v.leading_minors[k] : v.leading_minors[k];
        if (!(alt > 0.0)) minors_nd = false;
    }
    // Minor signs are only trustworthy well clear of the band.
    if (min_abs > 10.0 * v.band) {
        if (v.cls == DefinitenessClass::PositiveDefinite) v.minor_check_agrees = minors_pd;
        else if (v.cls == DefinitenessClass::NegativeDefinite)
            v.minor_check_agrees = minors_nd;
        else if (v.cls == DefinitenessClass::Indefinite)
            v.minor_check_agrees = !minors_pd && !minors_nd;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Pointwise convexity tests
// ---------------------------------------------------------------------------

struct SegmentTestResult {
    bool convex_ok = true;      // inequality holds at every sample
    bool strict_ok = true;      // with margin above the strict band
    double worst_residual = std::numeric_limits<double>::infinity();
    int samples = 0;
};

/// Sample the defining convexity inequality along the segment [u, v]:
/// residual(s) = s f(u) + (1-s) f(v) - f(su + (1-s)v) must be >= 0.
/// Pass concave = true to test the reversed inequality. Throws
/// DomainViolation (reported distinctly from a convexity failure) if the
/// segment leaves the admissible set, since that breaks the premise that
/// the domain is convex.
inline SegmentTestResult segment_convexity_test(const ScalarField& field,
                                                const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& v,
                                                int n_samples = 9,
                                                bool concave = false) {
    if (n_samples < 1) throw ConfigError("segment test needs at least one sample");
    const double fu = field(u).value;
    const double fv = field(v).value;
    SegmentTestResult r;
    r.samples = n_samples;
    const double value_scale = std::max({std::abs(fu), std::abs(fv), 1.0});
    const double strict_band = 1e-12 * value_scale;
    for (int k = 1; k <= n_samples; ++k) {
        const double s = static_cast<double>(k) / (n_samples + 1);
        const Eigen::VectorXd mid = s * u + (1.0 - s) * v;
        if (!field.domain().contains(mid))
            throw DomainViolation(
                "segment exits the admissible set at " + format_point(mid) +
                "; the domain box/predicate is not convex along this segment");
        double residual = s * fu + (1.0 - s) * fv - field(mid).value;
        if (concave) residual = -residual;
        r.worst_residual = std::min(r.worst_residual, residual);
        if (residual < -strict_band) r.convex_ok = false;
        if (residual <= strict_band) r.strict_ok = false;
    }
    return r;
}

struct PairTestResult {
    bool pass = true;
    double worst = std::numeric_limits<double>::infinity();
    int pairs = 0;
};

/// Monotone-gradient inequality [f_u(u) - f_u(v)] . (u - v) > 0,
/// equivalent to strict convexity.
inline PairTestResult gradient_monotonicity_test(
    const ScalarField& field,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs) {
    PairTestResult r;
    r.pairs = static_cast<int>(pairs.size());
    for (const auto& [u, v] : pairs) {
        const double inner = (field(u).gradient - field(v).gradient).dot(u - v);
        r.worst = std::min(r.worst, inner);
        if (!(inner > 0.0)) r.pass = false;
    }
    return r;
}

/// Supporting-hyperplane inequality f(u) - f(v) >= f_v(v) . (u - v);
/// strict mode requires a positive margin for u != v.
inline PairTestResult supporting_hyperplane_test(
    const ScalarField& field,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
    bool strict = false) {
    PairTestResult r;
    r.pairs = static_cast<int>(pairs.size());
    for (const auto& [u, v] : pairs) {
        const Jet2 jv = field(v);
        const double fu = field(u).value;
        const double residual = fu - jv.value - jv.gradient.dot(u - v);
        const double band = 1e-12 * std::max({std::abs(fu), std::abs(jv.value), 1.0});
        r.worst = std::min(r.worst, residual);
        if (strict ? !(residual > band) : residual < -band) r.pass = false;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Region sweeps
// ---------------------------------------------------------------------------

struct ProbeVerdict {
    Eigen::VectorXd point;
    DefinitenessVerdict verdict;
};

/// Aggregated Hessian classification over a sampled region. Sampling
/// proves nothing globally: the report's semantics are "no violation
/// found among N probes".
struct RegionReport {
    std::string provenance;
    std::string sampler;
    std::optional<DefinitenessClass> expected;
    std::vector<ProbeVerdict> probes;
    std::array<int, 5> counts{};  // indexed by DefinitenessClass order
    double worst_margin = std::numeric_limits<double>::infinity();
    double min_min_eig = std::numeric_limits<double>::infinity();
    double max_max_eig = -std::numeric_limits<double>::infinity();
    std::vector<int> violation_indices;

    int probe_count() const { return static_cast<int>(probes.size()); }
    bool pass() const { return violation_indices.empty(); }

    /// Empirical uniform-definiteness bound: min over probes of the
    /// smallest eigenvalue (meaningful for the positive-definite case;
    /// use max_max_eig for the negative case).
    double uniform_bound() const { return min_min_eig; }
};

inline RegionReport sweep_points(const ScalarField& field,
                                 const std::vector<Eigen::VectorXd>& points,
                                 std::optional<DefinitenessClass> expected = {},
                                 double scale_floor = 1.0, int threads = 1) {
    RegionReport report;
    report.provenance = field.provenance();
    report.sampler = "explicit(" + std::to_string(points.size()) + ")";
    report.expected = expected;

    std::function<ProbeVerdict(int)> job = [&](int i) -> ProbeVerdict {
        const Eigen::VectorXd& x = points[static_cast<std::size_t>(i)];
        return {x, classify_hessian(field(x).hessian, scale_floor)};
    };
    report.probes = parallel_map<ProbeVerdict>(static_cast<int>(points.size()), job, threads);

    for (std::size_t i = 0; i < report.probes.size(); ++i) {
        const DefinitenessVerdict& v = report.probes[i].verdict;
        report.counts[static_cast<std::size_t>(v.cls)]++;
        report.worst_margin = std::min(report.worst_margin, v.margin);
        report.min_min_eig = std::min(report.min_min_eig, v.min_eig);
        report.max_max_eig = std::max(report.max_max_eig, v.max_eig);
        if (expected && v.cls != *expected)
            report.violation_indices.push_back(static_cast<int>(i));
    }
    return report;
}

/// Classify Hessians at sampled admissible points of the field's own
/// domain.
inline RegionReport region_sweep(const ScalarField& field, const SamplerSpec& sampler,
                                 std::optional<DefinitenessClass> expected = {},
                                 double scale_floor = 1.0, int threads = 1) {
    RegionReport report =
        sweep_points(field, sample_domain(field.domain(), sampler), expected,
                     scale_floor, threads);
    report.sampler = sampler.describe();
    return report;
}

} // namespace thermoconvex
