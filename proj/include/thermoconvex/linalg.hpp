#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "thermoconvex/errors.hpp"

namespace thermoconvex {

inline double frobenius(const Eigen::MatrixXd& m) { return m.norm(); }

/// ||H - H^T||_F / ||H||_F, zero for the zero matrix.
inline double asymmetry_ratio(const Eigen::MatrixXd& h) {
    const double scale = h.norm();
    if (scale == 0.0) return 0.0;
    return (h - h.transpose()).norm() / scale;
}

inline Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& h) {
    return 0.5 * (h + h.transpose());
}

/// Ascending eigenvalues of a symmetric matrix.
inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error("symmetric eigensolver failed");
    return solver.eigenvalues();
}

/// Determinant by Gaussian elimination with partial pivoting, on a plain
/// array copy. Kept independent of the eigensolver so the Sylvester
/// minor cross-check exercises a separate code path.
inline double det_gauss(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);

    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double cand = std::abs(a[static_cast<std::size_t>(r) * n + col]);
            if (cand > best) { best = cand; pivot = r; }
        }
        if (best == 0.0) return 0.0;
        if (pivot != col) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(pivot) * n + j],
                          a[static_cast<std::size_t>(col) * n + j]);
            det = -det;
        }
        const double d = a[static_cast<std::size_t>(col) * n + col];
        det *= d;
        for (int r = col + 1; r < n; ++r) {
            const double factor = a[static_cast<std::size_t>(r) * n + col] / d;
            for (int j = col; j < n; ++j)
                a[static_cast<std::size_t>(r) * n + j] -=
                    factor * a[static_cast<std::size_t>(col) * n + j];
        }
    }
    return det;
}

/// Leading principal minors det(H[0..k, 0..k]) for k = 0..n-1.
inline std::vector<double> leading_principal_minors(const Eigen::MatrixXd& h) {
    std::vector<double> minors;
    minors.reserve(static_cast<std::size_t>(h.rows()));
    for (Eigen::Index k = 1; k <= h.rows(); ++k)
        minors.push_back(det_gauss(h.topLeftCorner(k, k)));
    return minors;
}

/// 2-norm condition number estimate via singular values.
inline double condition_estimate(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

/// Inverse of a symmetric matrix with a singularity guard: throws
/// SingularHessian when the spectral condition estimate exceeds 1e12.
inline Eigen::MatrixXd invert_hessian(const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw SingularHessian("eigendecomposition failed during Hessian inversion");
    const Eigen::VectorXd ev = solver.eigenvalues();
    const double amax = ev.cwiseAbs().maxCoeff();
    const double amin = ev.cwiseAbs().minCoeff();
    if (amin == 0.0 || amax / amin > 1e12)
        throw SingularHessian("Hessian numerically singular (condition > 1e12)");
    return solver.eigenvectors() * ev.cwiseInverse().asDiagonal() *
           solver.eigenvectors().transpose();
}

/// Solve A x = b with partial-pivot LU; throws SingularHessian on
/// numerically singular A.
inline Eigen::VectorXd solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw SingularHessian("linear system matrix is singular");
    return lu.solve(b);
}

inline double relative_difference(double a, double b, double floor = 1.0) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double relative_matrix_difference(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b) {
    const double scale = std::max(a.norm(), b.norm());
    if (scale == 0.0) return 0.0;
    return (a - b).norm() / scale;
}

inline double relative_vector_difference(const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b) {
    const double scale = std::max(a.norm(), b.norm());
    if (scale == 0.0) return 0.0;
    return (a - b).norm() / scale;
}

} // namespace thermoconvex
