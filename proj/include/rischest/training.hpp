#ifndef RISCHEST_TRAINING_HPP
#define RISCHEST_TRAINING_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rischest/channel.hpp"
#include "rischest/core.hpp"

namespace rischest {

/// 10^((dbm - 30) / 10). -infinity maps to exactly zero watts (noiseless runs).
inline double dbm_to_watts(double dbm) {
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

/// Orthonormal pilot sequences, tau_p = M rows by M columns; column m is UE m's sequence.
template <typename Real>
struct PilotMatrix {
    ComplexMatrix<Real> phi;

    Eigen::Index length() const { return phi.rows(); }
    Eigen::Index users() const { return phi.cols(); }
};

struct TrainingConfig {
    double p_ul_dbm = 10.0;
    double noise_dbm = -114.0;
    int m_users = 8;

    double p_ul_watts() const { return dbm_to_watts(p_ul_dbm); }
    double noise_watts() const { return dbm_to_watts(noise_dbm); }
};

/// Unitary DFT pilots: phi(t, m) = exp(-j 2 pi t m / M) / sqrt(M).
template <typename Real>
PilotMatrix<Real> generate_pilots(int m_users) {
    if (m_users < 1)
        throw std::invalid_argument("generate_pilots: m_users must be >= 1");
    const Real scale = Real(1) / std::sqrt(Real(m_users));
    PilotMatrix<Real> pilots{ComplexMatrix<Real>(m_users, m_users)};
    for (int t = 0; t < m_users; ++t) {
        for (int m = 0; m < m_users; ++m) {
            // Reduce the phase index first so large M keeps full precision.
            const int k = (t * m) % m_users;
            const Real angle = -Real(2) * std::numbers::pi_v<Real> * Real(k) / Real(m_users);
            pilots.phi(t, m) = std::polar(scale, angle);
        }
    }
    return pilots;
}

/// Stacked reception X = sqrt(P_UL) H_act Phi^T + N for a given noise draw.
template <typename Real>
ComplexMatrix<Real> receive(const ComplexMatrix<Real>& h_act, const PilotMatrix<Real>& pilots, double p_ul_watts,
                            const ComplexMatrix<Real>& noise) {
    if (h_act.cols() != pilots.users())
        throw std::invalid_argument("receive: channel columns must equal pilot count");
    if (noise.rows() != h_act.rows() || noise.cols() != pilots.length())
        throw std::invalid_argument("receive: noise must be L_act x tau_p");
    const Real amplitude = std::sqrt(Real(p_ul_watts));
    return amplitude * h_act * pilots.phi.transpose() + noise;
}

/// Pilot reception at the active elements with fresh CN(0, sigma^2) noise.
template <typename Real, typename Urbg>
ComplexMatrix<Real> simulate_reception(const ChannelMatrix<Real>& h_act, const PilotMatrix<Real>& pilots,
                                       const TrainingConfig& cfg, Urbg& rng) {
    const ComplexMatrix<Real> noise =
        complex_normal_matrix<Real>(h_act.rows(), pilots.length(), rng, Real(cfg.noise_watts()));
    return receive(h_act.entries, pilots, cfg.p_ul_watts(), noise);
}

/// Least-squares sub-channel estimate (1 / sqrt(P_UL)) X Phi^*. Rows keep the
/// element order of `rows`.
template <typename Real>
ChannelMatrix<Real> ls_estimate(const ComplexMatrix<Real>& x, const PilotMatrix<Real>& pilots,
                                const TrainingConfig& cfg, std::vector<int> rows) {
    if (x.cols() != pilots.length())
        throw std::invalid_argument("ls_estimate: received block must have tau_p columns");
    const double p_ul = cfg.p_ul_watts();
    if (!(p_ul > 0))
        throw std::invalid_argument("ls_estimate: uplink power must be positive");
    const Real inv_amplitude = Real(1) / std::sqrt(Real(p_ul));
    return ChannelMatrix<Real>(inv_amplitude * x * pilots.phi.conjugate(), std::move(rows));
}

}  // namespace rischest

#endif  // RISCHEST_TRAINING_HPP
