#include <doctest.h>

#include "rischest/channel.hpp"
#include "rischest/training.hpp"
#include "test_support.hpp"

using namespace rischest;

namespace {

double max_orthonormality_error(const PilotMatrix<double>& p) {
    const ComplexMatrix<double> gram = p.phi.transpose() * p.phi.conjugate();
    return (gram - ComplexMatrix<double>::Identity(p.users(), p.users())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dBm conversion") {
    CHECK(dbm_to_watts(30.0) == 1.0);
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(dbm_to_watts(-114.0) == doctest::Approx(3.9810717055349695e-15).epsilon(1e-12));
    CHECK(dbm_to_watts(-std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("pilots are orthonormal") {
    const PilotMatrix<double> one = generate_pilots<double>(1);
    CHECK(one.phi.rows() == 1);
    CHECK(one.phi(0, 0) == std::complex<double>(1.0, 0.0));

    const PilotMatrix<double> two = generate_pilots<double>(2);
    ComplexMatrix<double> hadamard(2, 2);
    hadamard << 1, 1, 1, -1;
    hadamard /= std::sqrt(2.0);
    CHECK((two.phi - hadamard).cwiseAbs().maxCoeff() < 1e-15);

    for (int m = 1; m <= 64; ++m) {
        const PilotMatrix<double> p = generate_pilots<double>(m);
        CAPTURE(m);
        CHECK(p.length() == m);
        CHECK(max_orthonormality_error(p) <= 1e-12);
    }
    CHECK_THROWS_AS(generate_pilots<double>(0), std::invalid_argument);
}

TEST_CASE("noiseless reception and LS recovery") {
    Rng rng(11);
    const ComplexMatrix<double> h = complex_normal_matrix<double>(6, 4, rng);
    const PilotMatrix<double> pilots = generate_pilots<double>(4);
    const ComplexMatrix<double> zero = ComplexMatrix<double>::Zero(6, 4);

    // P_UL = 1 W: X = H Phi^T
    const ComplexMatrix<double> x = receive(h, pilots, 1.0, zero);
    CHECK((x - h * pilots.phi.transpose()).norm() == 0.0);

    const TrainingConfig noiseless{10.0, -std::numeric_limits<double>::infinity(), 4};
    const ChannelMatrix<double> h_act = ChannelMatrix<double>::full(h);
    const ComplexMatrix<double> x2 = simulate_reception(h_act, pilots, noiseless, rng);
    const ChannelMatrix<double> est = ls_estimate(x2, pilots, noiseless, h_act.row_index);
    CHECK((est.entries - h).norm() / h.norm() <= 1e-10);
}

TEST_CASE("signal part scales with the square root of the power") {
    Rng rng(12);
    const ComplexMatrix<double> h = complex_normal_matrix<double>(5, 3, rng);
    const ComplexMatrix<double> n = complex_normal_matrix<double>(5, 3, rng, 1e-3);
    const PilotMatrix<double> pilots = generate_pilots<double>(3);
    const ComplexMatrix<double> base = receive(h, pilots, 0.25, n) - n;
    const ComplexMatrix<double> quad = receive(h, pilots, 1.0, n) - n;
    CHECK((quad - 2.0 * base).norm() <= 1e-12 * quad.norm());
}

TEST_CASE("noise-only reception has the configured variance") {
    Rng rng(13);
    const TrainingConfig cfg{10.0, -114.0, 8};
    const double sigma2 = cfg.noise_watts();
    const PilotMatrix<double> pilots = generate_pilots<double>(8);
    const ChannelMatrix<double> zero = ChannelMatrix<double>::full(ComplexMatrix<double>::Zero(12500, 8));
    const ComplexMatrix<double> x = simulate_reception(zero, pilots, cfg, rng);  // 1e5 entries
    CHECK(x.cwiseAbs2().mean() == doctest::Approx(sigma2).epsilon(0.05));

    // LS error on pure noise: sigma^2 / P_UL per entry.
    const ChannelMatrix<double> est = ls_estimate(x, pilots, cfg, zero.row_index);
    CHECK(est.entries.cwiseAbs2().mean() == doctest::Approx(sigma2 / cfg.p_ul_watts()).epsilon(0.05));
}

TEST_CASE("LS estimate is unbiased with error variance sigma^2 / P_UL") {
    Rng rng(14);
    const TrainingConfig cfg{10.0, -114.0, 8};
    const double err_var = cfg.noise_watts() / cfg.p_ul_watts();
    const PilotMatrix<double> pilots = generate_pilots<double>(8);
    const ChannelMatrix<double> h =
        ChannelMatrix<double>::full(complex_normal_matrix<double>(4, 8, rng, 1e-10));

    ComplexMatrix<double> mean_err = ComplexMatrix<double>::Zero(4, 8);
    double sq = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const ComplexMatrix<double> x = simulate_reception(h, pilots, cfg, rng);
        const ComplexMatrix<double> err = ls_estimate(x, pilots, cfg, h.row_index).entries - h.entries;
        mean_err += err;
        sq += err.cwiseAbs2().sum();
    }
    mean_err /= double(trials);
    // 3.2e5 error entries
    CHECK(sq / (trials * 32.0) == doctest::Approx(err_var).epsilon(0.05));
    // Standard error of each complex mean entry is sqrt(err_var / trials).
    const double se = std::sqrt(err_var / trials);
    CHECK(mean_err.cwiseAbs().maxCoeff() <= 3.0 * se);
}

TEST_CASE("dimension checks") {
    const PilotMatrix<double> pilots = generate_pilots<double>(3);
    CHECK_THROWS_AS(receive(ComplexMatrix<double>(ComplexMatrix<double>::Zero(4, 2)), pilots, 1.0,
                            ComplexMatrix<double>(ComplexMatrix<double>::Zero(4, 3))),
                    std::invalid_argument);
    CHECK_THROWS_AS(ls_estimate(ComplexMatrix<double>(ComplexMatrix<double>::Zero(4, 2)), pilots, TrainingConfig{}, {1, 2, 3, 4}),
                    std::invalid_argument);
}
