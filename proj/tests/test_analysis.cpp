#include <doctest.h>

#include "rischest/analysis.hpp"
#include "rischest/geometry.hpp"

using namespace rischest;

TEST_CASE("numerical rank on closed-form matrices") {
    CHECK(numerical_rank(Matrix<double>(Matrix<double>::Identity(4, 4))) == 4);
    const Vector<double> u = Vector<double>::LinSpaced(6, 1.0, 6.0);
    const Vector<double> v = Vector<double>::LinSpaced(5, -2.0, 2.0);
    CHECK(numerical_rank(Matrix<double>(u * v.transpose())) == 1);
    CHECK(numerical_rank(Matrix<double>(Matrix<double>::Zero(3, 3))) == 0);
    CHECK_THROWS_AS(numerical_rank(Matrix<double>(0, 0)), std::invalid_argument);

    ComplexMatrix<double> c(2, 2);
    c << std::complex<double>(1, 1), std::complex<double>(2, 2), std::complex<double>(0, 1), std::complex<double>(0, 2);
    CHECK(numerical_rank(c) == 1);
}

TEST_CASE("numerical rank is scale invariant and monotone in added rows") {
    Rng rng(3);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 30; ++t) {
        const int rank = 1 + t % 7;
        Matrix<double> a(10, rank), b(rank, 12);
        for (Eigen::Index i = 0; i < a.size(); ++i)
            a.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b.data()[i] = normal(rng);
        const Matrix<double> m = a * b;
        const int base = numerical_rank(m);
        CHECK(base == rank);
        CHECK(numerical_rank(Matrix<double>(1e-7 * m)) == base);
        CHECK(numerical_rank(Matrix<double>(3e5 * m)) == base);

        Matrix<double> grown(11, 12);
        grown.topRows(10) = m;
        for (Eigen::Index j = 0; j < 12; ++j)
            grown(10, j) = normal(rng);
        CHECK(numerical_rank(grown) >= base);
    }
}

TEST_CASE("rank of sub-root rows for a large surface with few active elements") {
    const auto geom = RisGeometry<double>::from_wavelength_fractions(16, 16, 0.125, 0.125, 1.0);
    const CorrelationModel<double> model = build_covariance(build_correlation(geom), 1.0, 1.0);
    Rng rng(5);
    int full = 0;
    for (int t = 0; t < 100; ++t) {
        const ActiveSet act = select_active(256, 16, PlacementPolicy::random_uniform, rng);
        const RankSample s = active_rank(model.k_sqrt, act);
        CHECK(s.singular_values.size() == 16);
        CHECK(std::is_sorted(s.singular_values.rbegin(), s.singular_values.rend()));
        full += s.rank == 16;
    }
    CHECK(full >= 99);
}

TEST_CASE("rank CDF experiment") {
    const auto small = RisGeometry<double>::from_wavelength_fractions(4, 4, 0.125, 0.125, 1.0);
    const auto large = RisGeometry<double>::from_wavelength_fractions(16, 16, 0.125, 0.125, 1.0);
    Rng rng(9);
    const std::vector<RankConfig<double>> grid{{1, small}, {128, large}};
    const auto dists = rank_cdf_experiment(grid, 20, rng);
    REQUIRE(dists.size() == 2);

    CHECK(dists[0].full_rank_fraction() == 1.0);
    const std::vector<double> cdf0 = dists[0].cdf();
    CHECK(cdf0 == std::vector<double>{0.0, 1.0});

    // Both large: the rows span less than L_act dimensions.
    CHECK(dists[1].full_rank_fraction() < 0.9);
    const std::vector<double> cdf1 = dists[1].cdf();
    CHECK(cdf1.size() == 129);
    CHECK(std::is_sorted(cdf1.begin(), cdf1.end()));
    CHECK(cdf1.back() == 1.0);

    CHECK_THROWS_AS(rank_cdf_experiment(std::vector<RankConfig<double>>{{17, small}}, 5, rng), std::invalid_argument);
}

TEST_CASE("nmse reference values") {
    Rng rng(11);
    const ComplexMatrix<double> h = complex_normal_matrix<double>(20, 8, rng);
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(h, ComplexMatrix<double>(ComplexMatrix<double>::Zero(20, 8))) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(nmse(h, ComplexMatrix<double>(2.0 * h)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(nmse(h, ComplexMatrix<double>(h.topRows(3))), std::invalid_argument);
}

TEST_CASE("nmse is invariant under a common unitary transform of the rows") {
    Rng rng(12);
    const ComplexMatrix<double> h = complex_normal_matrix<double>(15, 6, rng);
    const ComplexMatrix<double> est = h + 0.3 * complex_normal_matrix<double>(15, 6, rng);
    const Eigen::HouseholderQR<ComplexMatrix<double>> qr(complex_normal_matrix<double>(6, 6, rng));
    const ComplexMatrix<double> q = qr.householderQ();
    CHECK(nmse(ComplexMatrix<double>(h * q), ComplexMatrix<double>(est * q)) == doctest::Approx(nmse(h, est)).epsilon(1e-12));
}

TEST_CASE("nmse skips zero-norm rows and supports row subsets") {
    ComplexMatrix<double> h(3, 2), est(3, 2);
    h << 1, 0, 0, 0, 0, 2;
    est << 0, 0, 5, 5, 0, 2;
    const NmseValue v = nmse_detailed(h, est);
    CHECK(v.zero_norm_rows == 1);
    CHECK(v.value == doctest::Approx(0.5));

    const std::vector<Eigen::Index> last{2};
    CHECK(nmse_detailed(h, est, &last).value == 0.0);

    CHECK_THROWS_AS(nmse(ComplexMatrix<double>(ComplexMatrix<double>::Zero(2, 2)), est.topRows(2)), NumericalError);
}
