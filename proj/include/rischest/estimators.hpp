#ifndef RISCHEST_ESTIMATORS_HPP
#define RISCHEST_ESTIMATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rischest/channel.hpp"
#include "rischest/core.hpp"
#include "rischest/geometry.hpp"

namespace rischest {

enum class PlacementPolicy { random_uniform, uniform_grid };

/// Receive-capable elements, as 1-based global indices in observation order.
struct ActiveSet {
    std::vector<int> indices;
    PlacementPolicy policy = PlacementPolicy::random_uniform;

    int size() const { return static_cast<int>(indices.size()); }

    /// Throws std::invalid_argument unless the set is a duplicate-free,
    /// nonempty subset of 1..total_l.
    void validate(int total_l) const {
        if (indices.empty() || size() > total_l)
            throw std::invalid_argument("ActiveSet: need 1 <= L_act <= L");
        std::vector<char> seen(static_cast<std::size_t>(total_l) + 1, 0);
        for (int idx : indices) {
            if (idx < 1 || idx > total_l)
                throw std::invalid_argument("ActiveSet: index " + std::to_string(idx) + " outside [1, L]");
            if (seen[static_cast<std::size_t>(idx)]++)
                throw std::invalid_argument("ActiveSet: duplicate index " + std::to_string(idx));
        }
    }

    /// 0-based lookup table: position of each element in `indices`, or -1.
    std::vector<int> positions(int total_l) const {
        std::vector<int> pos(static_cast<std::size_t>(total_l), -1);
        for (int i = 0; i < size(); ++i)
            pos[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)] - 1)] = i;
        return pos;
    }
};

/// Random placement samples without replacement (ascending order); the grid
/// policy takes 1 + floor(k L / L_act) for k = 0..L_act-1.
template <typename Urbg>
ActiveSet select_active(int total_l, int l_act, PlacementPolicy policy, Urbg& rng) {
    if (l_act < 1 || l_act > total_l) {
        std::ostringstream msg;
        msg << "select_active: L_act = " << l_act << " must lie in [1, " << total_l << "]";
        throw std::invalid_argument(msg.str());
    }
    ActiveSet act;
    act.policy = policy;
    act.indices.reserve(static_cast<std::size_t>(l_act));
    if (policy == PlacementPolicy::uniform_grid) {
        for (int k = 0; k < l_act; ++k)
            act.indices.push_back(1 + static_cast<int>(static_cast<std::int64_t>(k) * total_l / l_act));
    } else {
        std::vector<int> all(static_cast<std::size_t>(total_l));
        std::iota(all.begin(), all.end(), 1);
        std::sample(all.begin(), all.end(), std::back_inserter(act.indices), l_act, rng);
    }
    return act;
}

/// Counters describing one estimator invocation.
struct EstimateReport {
    std::size_t degenerate_rows = 0;  // passive rows whose weighted combination vanished
    std::size_t dropped_atoms = 0;    // OMP atoms rejected for a rank-deficient refit
    std::uint64_t multiply_accumulates = 0;
    std::uint64_t inner_products = 0;
};

template <typename Real>
struct Estimate {
    ChannelMatrix<Real> channel;
    EstimateReport report;
};

// ---------------------------------------------------------------------------
// Correlation-weighted linear combination

/// Combination recipe for one passive element.
template <typename Real>
struct PassiveRowPlan {
    int element = 0;                  // 1-based global index of the passive element
    std::vector<int> local_rows;      // 0-based rows of the active sub-channel, best first
    std::vector<int> global_indices;  // matching 1-based RIS indices
    std::vector<Real> weights;        // sign(r) * exp(alpha |r|)
};

template <typename Real>
struct SelectionPlan {
    int total_l = 0;
    int m_users = 0;
    Real alpha = Real(5);
    std::vector<PassiveRowPlan<Real>> rows;  // ascending element order
};

/// sign(r) exp(alpha |r|), with sign(0) = 0.
template <typename Real>
Real exponential_weight(Real correlation, Real alpha) {
    if (correlation == Real(0))
        return Real(0);
    const Real magnitude = std::exp(alpha * std::abs(correlation));
    return correlation > Real(0) ? magnitude : -magnitude;
}

/// For every passive element, rank the active elements by |R(l, psi)|
/// (ties to the smaller global index) and keep the best m_users of them.
/// Depends on R and the placement only, so one plan serves every trial that
/// shares them.
template <typename Real>
SelectionPlan<Real> plan_selection(const Matrix<Real>& r, const ActiveSet& act, int m_users, Real alpha) {
    const int total_l = static_cast<int>(r.rows());
    if (r.cols() != r.rows())
        throw std::invalid_argument("plan_selection: correlation must be square");
    act.validate(total_l);
    if (m_users < 1)
        throw std::invalid_argument("plan_selection: m_users must be >= 1");
    if (act.size() < m_users) {
        std::ostringstream msg;
        msg << "plan_selection: L_act = " << act.size() << " is smaller than M = " << m_users;
        throw ConfigError(msg.str());
    }

    SelectionPlan<Real> plan;
    plan.total_l = total_l;
    plan.m_users = m_users;
    plan.alpha = alpha;
    plan.rows.reserve(static_cast<std::size_t>(total_l - act.size()));

    const std::vector<int> position = act.positions(total_l);
    std::vector<int> order(static_cast<std::size_t>(act.size()));
    for (int ell = 0; ell < total_l; ++ell) {
        if (position[static_cast<std::size_t>(ell)] >= 0)
            continue;
        std::iota(order.begin(), order.end(), 0);
        auto stronger = [&](int lhs, int rhs) {
            const int gl = act.indices[static_cast<std::size_t>(lhs)];
            const int gr = act.indices[static_cast<std::size_t>(rhs)];
            const Real cl = std::abs(r(ell, gl - 1));
            const Real cr = std::abs(r(ell, gr - 1));
            return cl != cr ? cl > cr : gl < gr;
        };
        std::partial_sort(order.begin(), order.begin() + m_users, order.end(), stronger);

        PassiveRowPlan<Real> row;
        row.element = ell + 1;
        for (int m = 0; m < m_users; ++m) {
            const int local = order[static_cast<std::size_t>(m)];
            const int global = act.indices[static_cast<std::size_t>(local)];
            row.local_rows.push_back(local);
            row.global_indices.push_back(global);
            row.weights.push_back(exponential_weight(r(ell, global - 1), alpha));
        }
        plan.rows.push_back(std::move(row));
    }
    return plan;
}

/// Full L x M estimate from the active sub-channel. Active rows are copied;
/// each passive row is the weighted combination of its planned rows rescaled
/// to the mean norm of those rows. A vanishing combination yields a zero row
/// and is counted in report.degenerate_rows.
template <typename Real>
Estimate<Real> estimate_proposed(const ChannelMatrix<Real>& h_tilde_act, const SelectionPlan<Real>& plan,
                                 const ActiveSet& act, int total_l) {
    if (plan.total_l != total_l)
        throw std::invalid_argument("estimate_proposed: plan built for a different L");
    if (h_tilde_act.rows() != act.size())
        throw std::invalid_argument("estimate_proposed: sub-channel rows must equal L_act");
    if (static_cast<int>(plan.rows.size()) != total_l - act.size())
        throw std::invalid_argument("estimate_proposed: plan does not match the active set");

    const Eigen::Index users = h_tilde_act.users();
    ComplexMatrix<Real> out = ComplexMatrix<Real>::Zero(total_l, users);
    for (int i = 0; i < act.size(); ++i)
        out.row(act.indices[static_cast<std::size_t>(i)] - 1) = h_tilde_act.entries.row(i);

    EstimateReport report;
    ComplexVector<Real> combined(users);
    for (const PassiveRowPlan<Real>& row : plan.rows) {
        combined.setZero();
        Real norm_sum = Real(0);
        for (std::size_t m = 0; m < row.local_rows.size(); ++m) {
            const auto source = h_tilde_act.entries.row(row.local_rows[m]);
            combined += row.weights[m] * source.transpose();
            norm_sum += source.norm();
        }
        const auto picked = static_cast<std::uint64_t>(row.local_rows.size());
        report.multiply_accumulates += 2 * picked * static_cast<std::uint64_t>(users) + static_cast<std::uint64_t>(users);

        const Real combined_norm = combined.norm();
        if (combined_norm == Real(0)) {
            ++report.degenerate_rows;
            continue;
        }
        const Real target_norm = norm_sum / Real(row.local_rows.size());
        out.row(row.element - 1) = (target_norm / combined_norm) * combined.transpose();
    }
    return {ChannelMatrix<Real>::full(std::move(out)), report};
}

// ---------------------------------------------------------------------------
// Random-coefficient baseline

enum class RandomBaselineRows {
    all,      // every row, active ones included, is a random combination
    passive,  // active rows copy the LS estimate
};

/// Each estimated row combines M distinct, uniformly drawn active rows with
/// i.i.d. CN(0, 1) coefficients.
template <typename Real, typename Urbg>
Estimate<Real> estimate_random_baseline(const ChannelMatrix<Real>& h_tilde_act, const ActiveSet& act, int total_l,
                                        Urbg& rng, RandomBaselineRows rows = RandomBaselineRows::all) {
    act.validate(total_l);
    const Eigen::Index users = h_tilde_act.users();
    const int m_users = static_cast<int>(users);
    if (h_tilde_act.rows() != act.size())
        throw std::invalid_argument("estimate_random_baseline: sub-channel rows must equal L_act");
    if (act.size() < m_users)
        throw ConfigError("estimate_random_baseline: L_act must be >= M");

    const std::vector<int> position = act.positions(total_l);
    std::vector<int> pool(static_cast<std::size_t>(act.size()));
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(m_users));

    ComplexMatrix<Real> out(total_l, users);
    EstimateReport report;
    for (int ell = 0; ell < total_l; ++ell) {
        const int local = position[static_cast<std::size_t>(ell)];
        if (rows == RandomBaselineRows::passive && local >= 0) {
            out.row(ell) = h_tilde_act.entries.row(local);
            continue;
        }
        picked.clear();
        std::sample(pool.begin(), pool.end(), std::back_inserter(picked), m_users, rng);
        out.row(ell).setZero();
        for (int source : picked)
            out.row(ell) += complex_normal<Real>(rng) * h_tilde_act.entries.row(source);
        report.multiply_accumulates += static_cast<std::uint64_t>(m_users) * static_cast<std::uint64_t>(users);
    }
    return {ChannelMatrix<Real>::full(std::move(out)), report};
}

// ---------------------------------------------------------------------------
// Compressed-sensing baseline

/// UPA steering dictionary over uniform sine-space grids.
///
/// Grid point (q, s) has direction sines u_q = -1 + 2q / n_az along the
/// horizontal axis and v_s = -1 + 2s / n_el along the vertical axis; its
/// column sits at index s * n_az + q and holds
///   exp(j 2 pi / lambda * (y_a u_q + z_a v_s)) / sqrt(L)
/// for element a at (0, y_a, z_a). Broadside is (q, s) = (n_az / 2, n_el / 2).
template <typename Real>
ComplexMatrix<Real> build_upa_dictionary(const RisGeometry<Real>& geom, int n_az, int n_el) {
    if (n_az < 1 || n_el < 1)
        throw std::invalid_argument("build_upa_dictionary: grid sizes must be >= 1");
    const int total_l = geom.element_count();
    const Real wavenumber = Real(2) * std::numbers::pi_v<Real> / geom.lambda();
    const Real scale = Real(1) / std::sqrt(Real(total_l));

    ComplexMatrix<Real> dict(total_l, static_cast<Eigen::Index>(n_az) * n_el);
    for (int s = 0; s < n_el; ++s) {
        const Real v = Real(-1) + Real(2 * s) / Real(n_el);
        for (int q = 0; q < n_az; ++q) {
            const Real u = Real(-1) + Real(2 * q) / Real(n_az);
            const Eigen::Index col = static_cast<Eigen::Index>(s) * n_az + q;
            for (int a = 0; a < total_l; ++a) {
                const Vector3<Real> pos = element_position(a + 1, geom);
                dict(a, col) = std::polar(scale, wavenumber * (pos.y() * u + pos.z() * v));
            }
        }
    }
    return dict;
}

inline constexpr double kOmpRankThreshold = 1e-10;

/// Orthogonal matching pursuit per UE column.
///
/// The observation of UE m is column m of the sub-channel; atoms are the
/// dictionary rows at the active elements. Each step picks the unused atom
/// with the largest |a^H residual| and refits every chosen atom by least
/// squares. An atom that makes the refit rank deficient is discarded and the
/// next best one tried. The estimate is the full dictionary times the fitted
/// gains, so every element (active or not) comes from the sparse model.
template <typename Real>
Estimate<Real> estimate_omp_baseline(const ChannelMatrix<Real>& h_tilde_act, const ActiveSet& act,
                                     const ComplexMatrix<Real>& dict, int sparsity) {
    const int total_l = static_cast<int>(dict.rows());
    act.validate(total_l);
    if (h_tilde_act.rows() != act.size())
        throw std::invalid_argument("estimate_omp_baseline: sub-channel rows must equal L_act");
    if (sparsity < 1 || sparsity > act.size()) {
        std::ostringstream msg;
        msg << "estimate_omp_baseline: sparsity " << sparsity << " must lie in [1, L_act = " << act.size() << "]";
        throw ConfigError(msg.str());
    }

    const Eigen::Index atoms = dict.cols();
    const Eigen::Index l_act = act.size();
    ComplexMatrix<Real> observed(l_act, atoms);
    for (Eigen::Index i = 0; i < l_act; ++i)
        observed.row(i) = dict.row(act.indices[static_cast<std::size_t>(i)] - 1);

    EstimateReport report;
    ComplexMatrix<Real> out(total_l, h_tilde_act.users());
    std::vector<char> unavailable(static_cast<std::size_t>(atoms));
    std::vector<Eigen::Index> chosen;
    for (Eigen::Index user = 0; user < h_tilde_act.users(); ++user) {
        const ComplexVector<Real> y = h_tilde_act.entries.col(user);
        ComplexVector<Real> residual = y;
        ComplexVector<Real> gains;
        std::fill(unavailable.begin(), unavailable.end(), 0);
        chosen.clear();

        for (int step = 0; step < sparsity; ++step) {
            const ComplexVector<Real> corr = observed.adjoint() * residual;
            report.inner_products += static_cast<std::uint64_t>(atoms);
            report.multiply_accumulates += static_cast<std::uint64_t>(atoms * l_act);

            bool accepted = false;
            while (!accepted) {
                Eigen::Index best = -1;
                Real best_mag = Real(-1);
                for (Eigen::Index k = 0; k < atoms; ++k) {
                    if (!unavailable[static_cast<std::size_t>(k)] && std::abs(corr(k)) > best_mag) {
                        best_mag = std::abs(corr(k));
                        best = k;
                    }
                }
                if (best < 0)
                    break;
                unavailable[static_cast<std::size_t>(best)] = 1;
                chosen.push_back(best);

                ComplexMatrix<Real> basis(l_act, static_cast<Eigen::Index>(chosen.size()));
                for (std::size_t c = 0; c < chosen.size(); ++c)
                    basis.col(static_cast<Eigen::Index>(c)) = observed.col(chosen[c]);
                Eigen::ColPivHouseholderQR<ComplexMatrix<Real>> qr(basis);
                qr.setThreshold(Real(kOmpRankThreshold));
                if (qr.rank() < basis.cols()) {
                    chosen.pop_back();
                    ++report.dropped_atoms;
                    continue;
                }
                gains = qr.solve(y);
                residual = y - basis * gains;
                accepted = true;
            }
            if (!accepted)
                break;
        }

        ComplexVector<Real> column = ComplexVector<Real>::Zero(total_l);
        for (std::size_t c = 0; c < chosen.size(); ++c)
            column += gains(static_cast<Eigen::Index>(c)) * dict.col(chosen[c]);
        out.col(user) = column;
    }
    return {ChannelMatrix<Real>::full(std::move(out)), report};
}

}  // namespace rischest

#endif  // RISCHEST_ESTIMATORS_HPP
