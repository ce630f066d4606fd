#ifndef RISCHEST_CORE_HPP
#define RISCHEST_CORE_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rischest {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using Vector3 = Eigen::Matrix<Real, 3, 1>;

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

/// Raised when a decomposition or a numerical precondition fails.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for configurations that cannot be run (e.g. fewer active elements than users).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The random engine every stochastic routine draws from.
using Rng = std::mt19937_64;

/// Seed for trial `trial_index` of a campaign. Depends only on the pair, so
/// trials can run in any order on any worker.
inline std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(trial_index >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// CN(0, variance): real and imaginary parts each carry variance/2.
template <typename Real, typename Urbg>
std::complex<Real> complex_normal(Urbg& rng, Real variance = Real(1)) {
    std::normal_distribution<Real> normal;
    const Real scale = std::sqrt(variance / Real(2));
    const Real re = normal(rng);
    const Real im = normal(rng);
    return {scale * re, scale * im};
}

/// rows x cols matrix of i.i.d. CN(0, variance) entries, filled column-major.
template <typename Real, typename Urbg>
ComplexMatrix<Real> complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, Urbg& rng,
                                          Real variance = Real(1)) {
    std::normal_distribution<Real> normal;
    const Real scale = std::sqrt(variance / Real(2));
    ComplexMatrix<Real> out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Real re = normal(rng);
            const Real im = normal(rng);
            out(r, c) = {scale * re, scale * im};
        }
    }
    return out;
}

}  // namespace rischest

#endif  // RISCHEST_CORE_HPP
