#ifndef RISCHEST_CHANNEL_HPP
#define RISCHEST_CHANNEL_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <unordered_set>
#include <stdexcept>
#include <vector>

#include "rischest/core.hpp"
#include "rischest/geometry.hpp"

namespace rischest {

/// UE-RIS channel coefficients: one row per RIS element, one column per UE.
/// row_index holds the 1-based global element index of every row.
template <typename Real>
struct ChannelMatrix {
    ComplexMatrix<Real> entries;
    std::vector<int> row_index;

    ChannelMatrix() = default;

    ChannelMatrix(ComplexMatrix<Real> values, std::vector<int> rows)
        : entries(std::move(values)), row_index(std::move(rows)) {
        if (static_cast<Eigen::Index>(row_index.size()) != entries.rows())
            throw std::invalid_argument("ChannelMatrix: row_index size must match row count");
    }

    /// Full-surface channel with rows 1..L in order.
    static ChannelMatrix full(ComplexMatrix<Real> values) {
        std::vector<int> rows(static_cast<std::size_t>(values.rows()));
        std::iota(rows.begin(), rows.end(), 1);
        return ChannelMatrix(std::move(values), std::move(rows));
    }

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index users() const { return entries.cols(); }
};

/// Log-distance path loss: ref_loss_db at 1 m, decaying as distance^-exponent.
struct PathLossParams {
    double ref_loss_db = 30.0;
    double exponent = 2.2;
    double distance_m = 20.0;
};

/// Linear power ratio mu = 10^(-ref_loss_db / 10) * distance^-exponent.
inline double large_scale_coefficient(const PathLossParams& p) {
    if (!(p.distance_m > 0))
        throw std::invalid_argument("large_scale_coefficient: distance must be positive");
    if (!(p.exponent >= 0))
        throw std::invalid_argument("large_scale_coefficient: exponent must be non-negative");
    return std::pow(10.0, -p.ref_loss_db / 10.0) * std::pow(p.distance_m, -p.exponent);
}

/// Coloring transform H = K^{1/2} Z with Z i.i.d. CN(0, 1), L x m_users.
template <typename Real, typename Urbg>
ChannelMatrix<Real> sample_channels(const Matrix<Real>& k_sqrt, int m_users, Urbg& rng) {
    if (m_users < 1)
        throw std::invalid_argument("sample_channels: m_users must be >= 1");
    const ComplexMatrix<Real> z = complex_normal_matrix<Real>(k_sqrt.cols(), m_users, rng);
    return ChannelMatrix<Real>::full(k_sqrt.template cast<std::complex<Real>>() * z);
}

template <typename Real, typename Urbg>
ChannelMatrix<Real> sample_channels(const CorrelationModel<Real>& model, int m_users, Urbg& rng) {
    return sample_channels(model.k_sqrt, m_users, rng);
}

/// Rows of h at the given 1-based global indices, in the given order.
template <typename Real>
ChannelMatrix<Real> extract_rows(const ChannelMatrix<Real>& h, std::span<const int> indices) {
    std::unordered_set<int> seen;
    for (int idx : indices)
        if (!seen.insert(idx).second)
            throw std::invalid_argument("extract_rows: duplicate element index");

    ComplexMatrix<Real> out(static_cast<Eigen::Index>(indices.size()), h.users());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto pos = std::find(h.row_index.begin(), h.row_index.end(), indices[i]);
        if (pos == h.row_index.end()) {
            std::ostringstream msg;
            msg << "extract_rows: element " << indices[i] << " not present in channel";
            throw std::out_of_range(msg.str());
        }
        out.row(static_cast<Eigen::Index>(i)) = h.entries.row(pos - h.row_index.begin());
    }
    return ChannelMatrix<Real>(std::move(out), std::vector<int>(indices.begin(), indices.end()));
}

}  // namespace rischest

#endif  // RISCHEST_CHANNEL_HPP
