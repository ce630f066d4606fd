#ifndef RISCHEST_HARNESS_HPP
#define RISCHEST_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rischest/channel.hpp"
#include "rischest/estimators.hpp"

namespace rischest {

enum class Experiment { nmse_vs_active, nmse_vs_power, rank_cdf };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view text);

/// One entry of the rank experiment grid: L_act active elements on an
/// l_h x l_v surface. Written as "L_act:l_hxl_v" in config files.
struct RankGridEntry {
    int l_act = 0;
    int l_h = 0;
    int l_v = 0;

    bool operator==(const RankGridEntry&) const = default;
};

/// Everything a campaign needs. Defaults reproduce the reference scenario:
/// 16 x 16 surface at lambda / 8 spacing, 3.5 GHz, 8 UEs 20 m away,
/// -114 dBm noise and alpha = 5.
struct ExperimentConfig {
    Experiment experiment = Experiment::nmse_vs_active;
    std::string name;  // file prefix; empty means the experiment id

    int l_h = 16;
    int l_v = 16;
    double d_h_frac = 0.125;  // element width in wavelengths
    double d_v_frac = 0.125;
    double carrier_ghz = 3.5;
    int m_users = 8;
    PathLossParams path_loss{};
    double noise_dbm = -114.0;  // -inf for a noiseless run

    double alpha = 5.0;
    std::vector<int> omp_sparsity{10, 20};
    int dict_az = 0;  // 0 selects 2 * l_h
    int dict_el = 0;  // 0 selects 2 * l_v
    PlacementPolicy placement = PlacementPolicy::random_uniform;
    RandomBaselineRows random_rows = RandomBaselineRows::all;

    std::vector<int> l_act_list{8, 16, 32, 64};
    double p_ul_dbm = 10.0;  // fixed power of the active-element sweep
    std::vector<double> p_ul_dbm_list{0.0, 10.0, 20.0, 30.0};
    int l_act = 16;  // fixed count of the power sweep
    std::vector<RankGridEntry> rank_grid{{8, 8, 8}, {16, 16, 16}, {32, 16, 16}, {16, 32, 32}, {128, 16, 16}, {192, 16, 16}};
    double rank_rel_tol = 0.0;  // 0 selects the default tolerance

    int trials = 500;
    std::uint64_t master_seed = 1;
    std::string output_dir = "results";
    int workers = 1;

    int total_elements() const { return l_h * l_v; }
    double wavelength() const;
    int resolved_dict_az() const { return dict_az > 0 ? dict_az : 2 * l_h; }
    int resolved_dict_el() const { return dict_el > 0 ? dict_el : 2 * l_v; }
    std::string resolved_name() const;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
};

/// Reads a flat `key = value` file (# or ; comments, lists comma separated).
/// Unknown keys are rejected. Missing keys keep their defaults.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolved configuration in the same format parse_config accepts.
std::string to_config_text(const ExperimentConfig& cfg);

struct TrialRow {
    std::string experiment;
    std::string estimator;
    int l_act = 0;
    double p_ul_dbm = 0.0;
    int l_total = 0;
    int m_users = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double value = 0.0;  // NMSE, or rank for the rank experiment
    std::string flags;   // ';'-separated, empty when clean
    bool failed = false;
    double sweep_value = 0.0;
};

struct AggregateRow {
    std::string experiment;
    std::string estimator;
    double sweep_value = 0.0;
    double mean = 0.0;
    double std_err = 0.0;
    int n_trials = 0;
};

struct CdfRow {
    std::string configuration;  // e.g. rank_16x16
    int l_act = 0;
    int l_total = 0;
    int rank = 0;
    double cdf = 0.0;
};

struct CampaignResult {
    std::string name;
    Experiment experiment = Experiment::nmse_vs_active;
    std::vector<TrialRow> trials;
    std::vector<AggregateRow> aggregates;
    std::vector<CdfRow> cdf;
    std::string metadata;

    /// Aggregate row for (estimator, sweep value), or nullptr.
    const AggregateRow* find(std::string_view estimator, double sweep_value) const;
};

/// Mean and standard error per (estimator, sweep value) over non-failed
/// trials, in order of first appearance.
std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& trials);

CampaignResult run_nmse_vs_active(const ExperimentConfig& cfg);
CampaignResult run_nmse_vs_power(const ExperimentConfig& cfg);
CampaignResult run_rank_cdf(const ExperimentConfig& cfg);
CampaignResult run_experiment(const ExperimentConfig& cfg);

/// Writes <name>_trials.csv, <name>_agg.csv and <name>_meta.txt (plus
/// <name>_cdf.csv for the rank experiment) into `dir`.
void write_csv(const CampaignResult& result, const std::filesystem::path& dir);

std::string trials_csv(const CampaignResult& result);
std::string aggregates_csv(const CampaignResult& result);
std::string cdf_csv(const CampaignResult& result);

std::string_view version_label();

}  // namespace rischest

#endif  // RISCHEST_HARNESS_HPP
