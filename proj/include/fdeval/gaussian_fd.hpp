#pragma once

// Gaussian moment fitting and the Frechet distance between two Gaussians.
//
// Everything here is templated on the scalar type and accepts any Eigen
// expression; the rest of the library instantiates it with double.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "fdeval/error.hpp"

namespace fdeval {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Mean and covariance of a p-dimensional sample. `cov` is exactly symmetric.
template <typename Scalar>
struct GaussianStats {
    VectorX<Scalar> mean;
    MatrixX<Scalar> cov;
    Eigen::Index sample_count = 0;

    Eigen::Index dim() const { return mean.size(); }
};

namespace detail {

// Eigenvalues below this fraction of the largest one are treated as zero.
template <typename Scalar>
constexpr Scalar kEigenClamp = Scalar(1e-10);

template <typename Scalar>
MatrixX<Scalar> symmetrized(const MatrixX<Scalar>& m) {
    return (m + m.transpose()) / Scalar(2);
}

template <typename Scalar>
VectorX<Scalar> clamp_spectrum(VectorX<Scalar> eigenvalues) {
    const Scalar top = eigenvalues.size() > 0 ? eigenvalues.maxCoeff() : Scalar(0);
    const Scalar floor = top > Scalar(0) ? kEigenClamp<Scalar> * top : Scalar(0);
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (!(eigenvalues[i] >= floor)) eigenvalues[i] = Scalar(0);
    }
    return eigenvalues;
}

// Square root of a symmetric PSD matrix, or nullopt if the eigensolver fails.
template <typename Scalar>
std::optional<MatrixX<Scalar>> try_sqrt_psd(const MatrixX<Scalar>& m) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(m, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) return std::nullopt;
    const VectorX<Scalar> roots = clamp_spectrum<Scalar>(es.eigenvalues()).cwiseSqrt();
    const MatrixX<Scalar> s = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
    return symmetrized<Scalar>(s);
}

// Tr((A B)^{1/2}) evaluated as Tr((A^{1/2} B A^{1/2})^{1/2}), which only
// needs symmetric eigensolves.
template <typename Scalar>
std::optional<Scalar> try_trace_sqrt_product(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
    const auto sqrt_a = try_sqrt_psd<Scalar>(a);
    if (!sqrt_a) return std::nullopt;
    const MatrixX<Scalar> inner = symmetrized<Scalar>(*sqrt_a * b * *sqrt_a);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(inner, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return std::nullopt;
    return clamp_spectrum<Scalar>(es.eigenvalues()).cwiseSqrt().sum();
}

}  // namespace detail

/// Column means and unbiased (n-1) covariance of the rows of `samples`.
template <typename Derived>
GaussianStats<typename Derived::Scalar> fit_gaussian(const Eigen::MatrixBase<Derived>& samples) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = samples.rows();
    if (n < 2) {
        throw ValidationError("fit_gaussian needs at least 2 samples, got " + std::to_string(n));
    }
    if (!samples.allFinite()) throw ValidationError("fit_gaussian: samples contain NaN or Inf");

    GaussianStats<Scalar> stats;
    stats.sample_count = n;
    stats.mean = samples.colwise().mean().transpose();
    const MatrixX<Scalar> centered = samples.rowwise() - stats.mean.transpose();
    stats.cov = detail::symmetrized<Scalar>((centered.transpose() * centered) / Scalar(n - 1));
    return stats;
}

/// Builds stats from explicit moments. The covariance is symmetrized and
/// must be positive semidefinite up to -1e-8 of its largest eigenvalue.
template <typename Scalar>
GaussianStats<Scalar> make_gaussian(VectorX<Scalar> mean, const MatrixX<Scalar>& cov,
                                    Eigen::Index sample_count = 2) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw ValidationError("covariance shape does not match mean dimension");
    }
    if (!mean.allFinite() || !cov.allFinite()) throw ValidationError("gaussian moments must be finite");
    GaussianStats<Scalar> stats{std::move(mean), detail::symmetrized<Scalar>(cov), sample_count};
    if (stats.dim() > 0) {
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(stats.cov, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolve of covariance failed");
        const Scalar top = es.eigenvalues().maxCoeff();
        const Scalar bottom = es.eigenvalues().minCoeff();
        if (bottom < -Scalar(1e-8) * std::max(top, Scalar(0))) {
            throw ValidationError("covariance is not positive semidefinite");
        }
    }
    return stats;
}

/// Symmetric PSD square root by eigendecomposition; eigenvalues below
/// 1e-10 of the largest are set to zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> matrix_sqrt_psd(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    if (m.rows() != m.cols()) throw ValidationError("matrix_sqrt_psd: matrix is not square");
    const MatrixX<Scalar> mat = m;
    const Scalar asym = (mat - mat.transpose()).norm();
    if (asym > Scalar(1e-10) * mat.norm()) throw ValidationError("matrix_sqrt_psd: matrix is not symmetric");
    auto root = detail::try_sqrt_psd<Scalar>(detail::symmetrized<Scalar>(mat));
    if (!root) throw NumericalError("matrix_sqrt_psd: eigendecomposition did not converge");
    return *root;
}

template <typename Scalar>
struct FrechetResult {
    Scalar value = 0;
    /// True when the first eigensolve failed and epsilon*I was added to both covariances.
    bool regularized = false;
    Scalar epsilon = 0;
    /// Magnitude of negative round-off removed by the final clamp at zero.
    Scalar clamped = 0;
    /// Set when `clamped` exceeds 1e-6.
    bool clamp_warning = false;
};

/// Frechet distance with diagnostics.
///   |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2})
template <typename Scalar>
FrechetResult<Scalar> frechet_distance_detailed(const GaussianStats<Scalar>& a, const GaussianStats<Scalar>& b) {
    if (a.dim() != b.dim() || a.cov.rows() != a.dim() || b.cov.rows() != b.dim()) {
        throw ValidationError("frechet_distance: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    }
    FrechetResult<Scalar> result;
    MatrixX<Scalar> cov_a = a.cov;
    MatrixX<Scalar> cov_b = b.cov;
    auto trace_sqrt = detail::try_trace_sqrt_product<Scalar>(cov_a, cov_b);
    if (!trace_sqrt) {
        const Eigen::Index p = a.dim();
        result.epsilon = Scalar(1e-6) * (cov_a.trace() + cov_b.trace()) / Scalar(2 * std::max<Eigen::Index>(p, 1));
        result.regularized = true;
        cov_a.diagonal().array() += result.epsilon;
        cov_b.diagonal().array() += result.epsilon;
        trace_sqrt = detail::try_trace_sqrt_product<Scalar>(cov_a, cov_b);
        if (!trace_sqrt) {
            std::ostringstream diag;
            diag << "frechet_distance: eigendecomposition failed after regularization (p=" << p
                 << ", epsilon=" << result.epsilon << ", tr(S_a)=" << a.cov.trace() << ", tr(S_b)=" << b.cov.trace()
                 << ")";
            throw NumericalError(diag.str());
        }
    }
    const Scalar value = (a.mean - b.mean).squaredNorm() + cov_a.trace() + cov_b.trace() - Scalar(2) * *trace_sqrt;
    if (value < Scalar(0)) {
        result.clamped = -value;
        result.clamp_warning = result.clamped > Scalar(1e-6);
        result.value = Scalar(0);
    } else {
        result.value = value;
    }
    return result;
}

template <typename Scalar>
Scalar frechet_distance(const GaussianStats<Scalar>& a, const GaussianStats<Scalar>& b) {
    return frechet_distance_detailed(a, b).value;
}

/// Univariate case from means and standard deviations.
template <typename Scalar>
Scalar frechet_distance_1d(Scalar mean_a, Scalar stddev_a, Scalar mean_b, Scalar stddev_b) {
    const Scalar dm = mean_a - mean_b;
    const Scalar ds = stddev_a - stddev_b;
    return dm * dm + ds * ds;
}

}  // namespace fdeval
