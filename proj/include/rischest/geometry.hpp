#ifndef RISCHEST_GEOMETRY_HPP
#define RISCHEST_GEOMETRY_HPP

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rischest/core.hpp"

namespace rischest {

/// Uniform planar array of l_h x l_v elements in the y-z plane. Element a
/// (1-based) sits at column mod(a-1, l_h) and row floor((a-1)/l_h).
template <typename Real>
class RisGeometry {
public:
    RisGeometry(int l_h, int l_v, Real d_h, Real d_v, Real lambda)
        : l_h_(l_h), l_v_(l_v), d_h_(d_h), d_v_(d_v), lambda_(lambda) {
        if (l_h < 1 || l_v < 1)
            throw std::invalid_argument("RisGeometry: element counts must be >= 1");
        if (!(d_h > 0) || !(d_v > 0) || !(lambda > 0))
            throw std::invalid_argument("RisGeometry: spacings and wavelength must be positive");
    }

    /// Spacing given as fractions of the wavelength, e.g. (16, 16, 1/8, 1/8, lambda).
    static RisGeometry from_wavelength_fractions(int l_h, int l_v, Real dh_frac, Real dv_frac, Real lambda) {
        return RisGeometry(l_h, l_v, dh_frac * lambda, dv_frac * lambda, lambda);
    }

    int l_h() const { return l_h_; }
    int l_v() const { return l_v_; }
    Real d_h() const { return d_h_; }
    Real d_v() const { return d_v_; }
    Real lambda() const { return lambda_; }
    int element_count() const { return l_h_ * l_v_; }
    Real area() const { return d_h_ * d_v_; }

private:
    int l_h_;
    int l_v_;
    Real d_h_;
    Real d_v_;
    Real lambda_;
};

/// sin(pi x) / (pi x), exactly 1 at the origin.
template <typename Real>
Real sinc(Real x) {
    const Real px = std::numbers::pi_v<Real> * x;
    if (std::abs(px) < Real(1e-4)) {
        // Taylor tail below the truncation error of sin(px)/px.
        const Real px2 = px * px;
        return Real(1) - px2 / Real(6) + px2 * px2 / Real(120);
    }
    return std::sin(px) / px;
}

/// Position of element a (1-based) in meters: [0, i(a) d_h, j(a) d_v].
template <typename Real>
Vector3<Real> element_position(int a, const RisGeometry<Real>& geom) {
    if (a < 1 || a > geom.element_count()) {
        std::ostringstream msg;
        msg << "element_position: index " << a << " outside [1, " << geom.element_count() << "]";
        throw std::out_of_range(msg.str());
    }
    const int i = (a - 1) % geom.l_h();
    const int j = (a - 1) / geom.l_h();
    return {Real(0), Real(i) * geom.d_h(), Real(j) * geom.d_v()};
}

/// Normalized spatial correlation under isotropic scattering:
/// R(a, b) = sinc(2 |u_a - u_b| / lambda).
template <typename Real>
Matrix<Real> build_correlation(const RisGeometry<Real>& geom) {
    const int count = geom.element_count();
    Matrix<Real> r(count, count);
    for (int a = 0; a < count; ++a) {
        r(a, a) = Real(1);
        const Vector3<Real> ua = element_position(a + 1, geom);
        for (int b = a + 1; b < count; ++b) {
            const Real dist = (ua - element_position(b + 1, geom)).norm();
            const Real value = sinc(Real(2) * dist / geom.lambda());
            r(a, b) = value;
            r(b, a) = value;
        }
    }
    return r;
}

inline constexpr double kDefaultClampTol = 1e-10;

/// Principal square root of a symmetric PSD matrix via eigendecomposition.
///
/// Eigenvalues with magnitude at most clamp_tol * lambda_max are treated as
/// zero; anything more negative than -clamp_tol * lambda_max is rejected as
/// indefinite. The result is symmetric and squares back to the input up to
/// the discarded spectrum.
template <typename Derived>
Matrix<typename Derived::Scalar> matrix_sqrt_psd(const Eigen::MatrixBase<Derived>& m,
                                                 double clamp_tol = kDefaultClampTol) {
    using Real = typename Derived::Scalar;
    if (m.rows() != m.cols())
        throw std::invalid_argument("matrix_sqrt_psd: matrix must be square");
    if (m.size() == 0)
        return Matrix<Real>(0, 0);

    Eigen::SelfAdjointEigenSolver<Matrix<Real>> eig(m.derived());
    if (eig.info() != Eigen::Success)
        throw NumericalError("matrix_sqrt_psd: eigendecomposition failed");

    const Vector<Real>& values = eig.eigenvalues();  // ascending
    const Real lambda_max = values(values.size() - 1);
    const Real lambda_min = values(0);
    const Real floor = Real(clamp_tol) * std::max(lambda_max, Real(0));
    if (lambda_min < -floor || (lambda_max <= 0 && lambda_min < 0)) {
        std::ostringstream msg;
        msg << "matrix_sqrt_psd: matrix is not PSD (min eigenvalue " << lambda_min << ", max eigenvalue "
            << lambda_max << ")";
        throw NumericalError(msg.str());
    }

    Vector<Real> roots(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
        roots(i) = values(i) > floor ? std::sqrt(values(i)) : Real(0);

    const Matrix<Real>& vecs = eig.eigenvectors();
    Matrix<Real> s = vecs * roots.asDiagonal() * vecs.transpose();
    return (s + s.transpose()) / Real(2);
}

/// Covariance K = area * mu * R of every UE-RIS channel column, together
/// with its PSD square root used by the coloring transform.
template <typename Real>
struct CorrelationModel {
    Matrix<Real> r;
    Real area = Real(1);
    Real large_scale = Real(1);
    Matrix<Real> k;
    Matrix<Real> k_sqrt;

    Eigen::Index element_count() const { return r.rows(); }
};

template <typename Real>
CorrelationModel<Real> build_covariance(const Matrix<Real>& r, Real area, Real mu,
                                        double clamp_tol = kDefaultClampTol) {
    if (r.rows() != r.cols() || r.rows() == 0)
        throw std::invalid_argument("build_covariance: correlation must be square and nonempty");
    if (!(area > 0) || !(mu > 0))
        throw std::invalid_argument("build_covariance: area and mu must be positive");
    for (Eigen::Index a = 0; a < r.rows(); ++a) {
        if (r(a, a) != Real(1))
            throw std::invalid_argument("build_covariance: correlation diagonal must be 1");
        for (Eigen::Index b = 0; b < a; ++b) {
            if (r(a, b) != r(b, a))
                throw std::invalid_argument("build_covariance: correlation must be symmetric");
            if (std::abs(r(a, b)) > Real(1))
                throw std::invalid_argument("build_covariance: correlation entries must lie in [-1, 1]");
        }
    }

    CorrelationModel<Real> model;
    model.r = r;
    model.area = area;
    model.large_scale = mu;
    model.k = (area * mu) * r;
    model.k_sqrt = matrix_sqrt_psd(model.k, clamp_tol);
    return model;
}

/// Correlation model of a geometry with large-scale coefficient mu.
template <typename Real>
CorrelationModel<Real> make_correlation_model(const RisGeometry<Real>& geom, Real mu,
                                              double clamp_tol = kDefaultClampTol) {
    return build_covariance(build_correlation(geom), geom.area(), mu, clamp_tol);
}

}  // namespace rischest

#endif  // RISCHEST_GEOMETRY_HPP
