#ifndef RISCHEST_ANALYSIS_HPP
#define RISCHEST_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rischest/core.hpp"
#include "rischest/estimators.hpp"
#include "rischest/geometry.hpp"

namespace rischest {

/// Default relative rank tolerance: 1e3 * max(rows, cols) * machine epsilon.
template <typename Real>
Real default_rank_tolerance(Eigen::Index rows, Eigen::Index cols) {
    return Real(1e3) * Real(std::max(rows, cols)) * std::numeric_limits<Real>::epsilon();
}

/// Singular values in descending order.
template <typename Derived>
auto singular_values(const Eigen::MatrixBase<Derived>& m) {
    using PlainMatrix = typename Derived::PlainObject;
    Eigen::BDCSVD<PlainMatrix> svd(m.derived());
    if (svd.info() != Eigen::Success)
        throw NumericalError("singular_values: SVD failed");
    return svd.singularValues().eval();
}

/// Number of singular values above rel_tol * sigma_max. A non-positive
/// rel_tol selects default_rank_tolerance.
template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = 0.0) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (m.size() == 0)
        throw std::invalid_argument("numerical_rank: matrix must be nonempty");
    const auto sv = singular_values(m);
    const Real tol = rel_tol > 0 ? Real(rel_tol) : default_rank_tolerance<Real>(m.rows(), m.cols());
    const Real sigma_max = sv(0);
    if (!(sigma_max > 0))
        return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        rank += sv(i) > tol * sigma_max ? 1 : 0;
    return rank;
}

struct RankSample {
    int l_act = 0;
    int total_l = 0;
    int rank = 0;
    std::vector<double> singular_values;  // descending
};

/// One (L_act, geometry) configuration of the rank experiment.
template <typename Real>
struct RankConfig {
    int l_act = 0;
    RisGeometry<Real> geometry;
};

/// Empirical rank distribution of K_act^{1/2} for one configuration.
struct RankDistribution {
    int l_act = 0;
    int total_l = 0;
    std::vector<RankSample> samples;

    /// P(rank <= k) for k = 0..l_act.
    std::vector<double> cdf() const {
        std::vector<double> out(static_cast<std::size_t>(l_act) + 1, 0.0);
        for (const RankSample& s : samples)
            for (int k = s.rank; k <= l_act; ++k)
                out[static_cast<std::size_t>(k)] += 1.0;
        for (double& v : out)
            v /= samples.empty() ? 1.0 : static_cast<double>(samples.size());
        return out;
    }

    double full_rank_fraction() const {
        if (samples.empty())
            return 0.0;
        const auto full = std::count_if(samples.begin(), samples.end(), [&](const RankSample& s) { return s.rank == l_act; });
        return static_cast<double>(full) / static_cast<double>(samples.size());
    }
};

/// Rank of rows of K^{1/2} picked by a placement, K = R (unit area times mu).
template <typename Real>
RankSample active_rank(const Matrix<Real>& k_sqrt, const ActiveSet& act, double rel_tol = 0.0) {
    Matrix<Real> rows(act.size(), k_sqrt.cols());
    for (int i = 0; i < act.size(); ++i)
        rows.row(i) = k_sqrt.row(act.indices[static_cast<std::size_t>(i)] - 1);
    RankSample sample;
    sample.l_act = act.size();
    sample.total_l = static_cast<int>(k_sqrt.rows());
    sample.rank = numerical_rank(rows, rel_tol);
    const auto sv = singular_values(rows);
    sample.singular_values.assign(sv.data(), sv.data() + sv.size());
    return sample;
}

/// For each configuration, the rank of K_act^{1/2} over `placements`
/// uniformly random placements, with A * mu fixed to 1 so K = R.
template <typename Real, typename Urbg>
std::vector<RankDistribution> rank_cdf_experiment(const std::vector<RankConfig<Real>>& grid, int placements, Urbg& rng,
                                                  double rel_tol = 0.0) {
    if (placements < 1)
        throw std::invalid_argument("rank_cdf_experiment: placements must be >= 1");
    std::vector<RankDistribution> out;
    for (const RankConfig<Real>& cfg : grid) {
        const int total_l = cfg.geometry.element_count();
        if (cfg.l_act < 1 || cfg.l_act > total_l)
            throw std::invalid_argument("rank_cdf_experiment: need 1 <= L_act <= L");
        const CorrelationModel<Real> model = build_covariance(build_correlation(cfg.geometry), Real(1), Real(1));
        RankDistribution dist;
        dist.l_act = cfg.l_act;
        dist.total_l = total_l;
        for (int t = 0; t < placements; ++t) {
            const ActiveSet act = select_active(total_l, cfg.l_act, PlacementPolicy::random_uniform, rng);
            dist.samples.push_back(active_rank(model.k_sqrt, act, rel_tol));
        }
        out.push_back(std::move(dist));
    }
    return out;
}

struct NmseValue {
    double value = 0.0;
    std::size_t zero_norm_rows = 0;  // rows of the true channel skipped for zero norm
};

/// Mean over rows of |H(l,:) - Hhat(l,:)|^2 / |H(l,:)|^2, restricted to
/// `rows` (0-based) when given. Zero-norm true rows are skipped and counted.
template <typename DerivedA, typename DerivedB>
NmseValue nmse_detailed(const Eigen::MatrixBase<DerivedA>& truth, const Eigen::MatrixBase<DerivedB>& estimate,
                        const std::vector<Eigen::Index>* rows = nullptr) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
        throw std::invalid_argument("nmse: dimension mismatch");
    NmseValue result;
    double sum = 0.0;
    std::size_t used = 0;
    auto accumulate = [&](Eigen::Index r) {
        const double denom = static_cast<double>(truth.row(r).squaredNorm());
        if (denom == 0.0) {
            ++result.zero_norm_rows;
            return;
        }
        sum += static_cast<double>((truth.row(r) - estimate.row(r)).squaredNorm()) / denom;
        ++used;
    };
    if (rows) {
        for (Eigen::Index r : *rows)
            accumulate(r);
    } else {
        for (Eigen::Index r = 0; r < truth.rows(); ++r)
            accumulate(r);
    }
    if (used == 0)
        throw NumericalError("nmse: every true row has zero norm");
    result.value = sum / static_cast<double>(used);
    return result;
}

template <typename DerivedA, typename DerivedB>
double nmse(const Eigen::MatrixBase<DerivedA>& truth, const Eigen::MatrixBase<DerivedB>& estimate) {
    return nmse_detailed(truth, estimate).value;
}

}  // namespace rischest

#endif  // RISCHEST_ANALYSIS_HPP
