#include <doctest.h>

#include <random>

#include "rischest/analysis.hpp"
#include "rischest/geometry.hpp"
#include "test_support.hpp"

using namespace rischest;
using rischest::testing::rel_frobenius;

namespace {

RisGeometry<double> eighth_wavelength(int l_h, int l_v) {
    return RisGeometry<double>::from_wavelength_fractions(l_h, l_v, 0.125, 0.125, 1.0);
}

}  // namespace

TEST_CASE("geometry rejects invalid dimensions") {
    CHECK_THROWS_AS(RisGeometry<double>(0, 4, 0.1, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RisGeometry<double>(4, 4, 0.0, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RisGeometry<double>(4, 4, 0.1, 0.1, -1.0), std::invalid_argument);
    const RisGeometry<double> g(16, 8, 0.02, 0.03, 0.1);
    CHECK(g.element_count() == 128);
    CHECK(g.area() == doctest::Approx(6e-4));
}

TEST_CASE("element positions follow column-major UPA indexing") {
    const RisGeometry<double> g(16, 16, 0.01, 0.02, 0.08);
    CHECK(element_position(1, g) == Vector3<double>(0, 0, 0));
    // a = L_h + 2: column 1, row 1
    CHECK(element_position(18, g) == Vector3<double>(0, 0.01, 0.02));
    // a = L_h: last column of the first row
    CHECK(element_position(16, g) == Vector3<double>(0, 15 * 0.01, 0));
    CHECK(element_position(256, g) == Vector3<double>(0, 15 * 0.01, 15 * 0.02));
    CHECK_THROWS_AS(element_position(0, g), std::out_of_range);
    CHECK_THROWS_AS(element_position(257, g), std::out_of_range);
}

TEST_CASE("sinc is exact at the origin and matches the closed form elsewhere") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(std::abs(sinc(1.0)) < 1e-15);
    for (double x : {1e-9, 1e-6, 1e-5, 3e-5, 0.01, 0.25, 0.5, 1.5, 7.25})
        CHECK(sinc(x) == doctest::Approx(rischest::testing::reference_sinc(x)).epsilon(1e-14));
    CHECK(sinc(0.25f) == doctest::Approx(0.9003163161571061).epsilon(1e-6));
}

TEST_CASE("correlation entries") {
    SUBCASE("half-wavelength neighbours are uncorrelated") {
        const RisGeometry<double> g(2, 1, 0.5, 0.5, 1.0);
        const Matrix<double> r = build_correlation(g);
        CHECK(r(0, 0) == 1.0);
        CHECK(std::abs(r(0, 1)) < 1e-15);
    }
    SUBCASE("eighth-wavelength horizontal neighbours") {
        const Matrix<double> r = build_correlation(eighth_wavelength(4, 4));
        CHECK(r(0, 1) == doctest::Approx(0.9003163161571061).epsilon(1e-14));
    }
}

TEST_CASE("correlation invariants hold across geometries") {
    for (auto [lh, lv, dh, dv] : {std::tuple{4, 4, 0.125, 0.125}, std::tuple{8, 3, 0.2, 0.35}, std::tuple{16, 16, 0.125, 0.125},
                                  std::tuple{5, 7, 0.5, 0.25}}) {
        const auto g = RisGeometry<double>::from_wavelength_fractions(lh, lv, dh, dv, 0.0857);
        const Matrix<double> r = build_correlation(g);
        CAPTURE(lh);
        CAPTURE(lv);
        CHECK((r.array() == r.transpose().array()).all());
        CHECK((r.diagonal().array() == 1.0).all());
        CHECK(r.cwiseAbs().maxCoeff() <= 1.0);

        // Entries depend only on the offset between elements: compare every
        // pair with the pair anchored at element 1 having the same offset.
        for (int a = 0; a < g.element_count(); ++a) {
            for (int b = 0; b < g.element_count(); b += 5) {
                const int di = std::abs(a % lh - b % lh);
                const int dj = std::abs(a / lh - b / lh);
                CHECK(r(a, b) == doctest::Approx(r(0, di + dj * lh)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("matrix_sqrt_psd on closed-form cases") {
    const Matrix<double> id = Matrix<double>::Identity(5, 5);
    CHECK(matrix_sqrt_psd(id).isApprox(id, 1e-14));

    Matrix<double> diag = Vector<double>(Eigen::Vector3d(4, 1, 0)).asDiagonal();
    const Matrix<double> s = matrix_sqrt_psd(diag);
    CHECK(s.isApprox(Matrix<double>(Vector<double>(Eigen::Vector3d(2, 1, 0)).asDiagonal()), 1e-14));

    CHECK(matrix_sqrt_psd(Matrix<double>::Zero(3, 3)).isZero());
}

TEST_CASE("matrix_sqrt_psd reconstructs the sinc correlation of a small surface") {
    const Matrix<double> r = build_correlation(eighth_wavelength(2, 2));
    const Matrix<double> s = matrix_sqrt_psd(r);
    CHECK((s - s.transpose()).norm() == 0.0);
    CHECK(rel_frobenius(s * s, r) <= 1e-8);
}

TEST_CASE("matrix_sqrt_psd reconstructs random PSD matrices") {
    std::mt19937_64 rng(7);
    for (auto [n, rank] : {std::pair{3, 3}, std::pair{16, 5}, std::pair{64, 64}, std::pair{128, 40}, std::pair{256, 100}}) {
        const Matrix<double> m = rischest::testing::random_psd(n, rank, rng);
        const Matrix<double> s = matrix_sqrt_psd(m);
        CAPTURE(n);
        CHECK(rel_frobenius(s * s, m) <= 1e-8);
        CHECK((s - s.transpose()).norm() == 0.0);
    }
}

TEST_CASE("matrix_sqrt_psd rejects indefinite matrices") {
    Matrix<double> m(2, 2);
    m << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(matrix_sqrt_psd(m), NumericalError);
    CHECK_THROWS_AS(matrix_sqrt_psd(Matrix<double>(-Matrix<double>::Identity(2, 2))), NumericalError);

    // Round-off sized negatives are absorbed.
    m << 1.0, 0.0, 0.0, -1e-13;
    const Matrix<double> s = matrix_sqrt_psd(m);
    CHECK(s(1, 1) == 0.0);
}

TEST_CASE("build_covariance scales the correlation and stores its root") {
    const Matrix<double> id = Matrix<double>::Identity(4, 4);
    CHECK(build_covariance(id, 1.0, 1.0).k_sqrt.isApprox(id, 1e-14));
    CHECK(build_covariance(id, 2.0, 2.0).k_sqrt.isApprox(2.0 * id, 1e-14));

    const Matrix<double> r = build_correlation(eighth_wavelength(4, 4));
    const CorrelationModel<double> unit = build_covariance(r, 1.0, 1.0);
    CHECK(unit.k == r);

    Matrix<double> bad = id;
    bad(0, 0) = 0.9;
    CHECK_THROWS_AS(build_covariance(bad, 1.0, 1.0), std::invalid_argument);
    bad = id;
    bad(0, 1) = 0.3;
    CHECK_THROWS_AS(build_covariance(bad, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_covariance(id, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("square root keeps the numerical rank of the covariance") {
    for (auto [lh, lv] : {std::pair{4, 4}, std::pair{8, 8}, std::pair{16, 16}, std::pair{12, 6}}) {
        const CorrelationModel<double> model = build_covariance(build_correlation(eighth_wavelength(lh, lv)), 1.0, 1.0);
        CAPTURE(lh);
        CHECK(numerical_rank(model.k, kDefaultClampTol) == numerical_rank(model.k_sqrt, kDefaultClampTol));
    }
}

TEST_CASE("float instantiation") {
    const auto g = RisGeometry<float>::from_wavelength_fractions(4, 4, 0.125f, 0.125f, 1.0f);
    const Matrix<float> r = build_correlation(g);
    const Matrix<float> s = matrix_sqrt_psd(r, 1e-6);
    CHECK(((s * s - r).norm() / r.norm()) < 1e-4f);
}
