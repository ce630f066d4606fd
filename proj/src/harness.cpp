#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "rischest/analysis.hpp"
#include "rischest/channel.hpp"
#include "rischest/geometry.hpp"
#include "rischest/harness.hpp"
#include "rischest/training.hpp"

#ifndef RISCHEST_VERSION
#define RISCHEST_VERSION "0.0.0"
#endif

namespace rischest {

namespace {

std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v < 0 ? "-inf" : "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void add_flag(std::string& flags, const std::string& flag) {
    if (!flags.empty())
        flags += ';';
    flags += flag;
}

/// Error text safe for a CSV field.
std::string error_flag(const std::exception& e) {
    std::string text = std::string("error:") + e.what();
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '"' || c == ';')
            c = ' ';
    return text;
}

/// Runs work(i) for i in [0, count) on `workers` threads. Each index writes
/// only its own slot, so the merged result does not depend on scheduling.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& work) {
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                work(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

/// State shared read-only by every trial of an NMSE campaign.
struct NmseScenario {
    const ExperimentConfig& cfg;
    RisGeometry<double> geometry;
    CorrelationModel<double> model;
    PilotMatrix<double> pilots;
    ComplexMatrix<double> dictionary;
    std::string experiment_id;

    explicit NmseScenario(const ExperimentConfig& c)
        : cfg(c),
          geometry(RisGeometry<double>::from_wavelength_fractions(c.l_h, c.l_v, c.d_h_frac, c.d_v_frac, c.wavelength())),
          model(make_correlation_model(geometry, large_scale_coefficient(c.path_loss))),
          pilots(generate_pilots<double>(c.m_users)),
          experiment_id(to_string(c.experiment)) {
        if (!c.omp_sparsity.empty())
            dictionary = build_upa_dictionary(geometry, c.resolved_dict_az(), c.resolved_dict_el());
    }

    std::vector<std::string> estimator_names() const {
        std::vector<std::string> names{"proposed", "random_coeff"};
        for (int p : cfg.omp_sparsity)
            names.push_back("omp_p" + std::to_string(p));
        return names;
    }

    /// One Monte-Carlo trial: fresh placement, channel, noise and baseline
    /// randomness, all drawn from the trial's own seed.
    std::vector<TrialRow> run_trial(int l_act, double p_ul_dbm, double sweep_value, int trial,
                                    std::uint64_t global_index) const {
        const std::uint64_t seed = derive_trial_seed(cfg.master_seed, global_index);
        const int total_l = geometry.element_count();
        std::vector<TrialRow> rows;
        for (const std::string& name : estimator_names()) {
            TrialRow row;
            row.experiment = experiment_id;
            row.estimator = name;
            row.l_act = l_act;
            row.p_ul_dbm = p_ul_dbm;
            row.l_total = total_l;
            row.m_users = cfg.m_users;
            row.trial = trial;
            row.seed = seed;
            row.sweep_value = sweep_value;
            rows.push_back(std::move(row));
        }
        auto fail_all = [&](const std::exception& e) {
            for (TrialRow& r : rows) {
                r.failed = true;
                r.value = std::nan("");
                add_flag(r.flags, error_flag(e));
            }
        };

        Rng rng(seed);
        ChannelMatrix<double> truth;
        ChannelMatrix<double> h_tilde;
        ActiveSet act;
        try {
            act = select_active(total_l, l_act, cfg.placement, rng);
            truth = sample_channels(model, cfg.m_users, rng);
            const ChannelMatrix<double> h_act = extract_rows(truth, act.indices);
            const TrainingConfig training{p_ul_dbm, cfg.noise_dbm, cfg.m_users};
            const ComplexMatrix<double> x = simulate_reception(h_act, pilots, training, rng);
            h_tilde = ls_estimate(x, pilots, training, act.indices);
        } catch (const std::exception& e) {
            fail_all(e);
            return rows;
        }

        auto score = [&](TrialRow& row, const std::function<Estimate<double>()>& estimator) {
            try {
                const Estimate<double> est = estimator();
                const NmseValue err = nmse_detailed(truth.entries, est.channel.entries);
                row.value = err.value;
                if (err.zero_norm_rows)
                    add_flag(row.flags, "zero_norm_rows=" + std::to_string(err.zero_norm_rows));
                if (est.report.degenerate_rows)
                    add_flag(row.flags, "degenerate_rows=" + std::to_string(est.report.degenerate_rows));
                if (est.report.dropped_atoms)
                    add_flag(row.flags, "dropped_atoms=" + std::to_string(est.report.dropped_atoms));
            } catch (const std::exception& e) {
                row.failed = true;
                row.value = std::nan("");
                add_flag(row.flags, error_flag(e));
            }
        };

        score(rows[0], [&] {
            const SelectionPlan<double> plan = plan_selection(model.r, act, cfg.m_users, cfg.alpha);
            return estimate_proposed(h_tilde, plan, act, total_l);
        });
        score(rows[1], [&] { return estimate_random_baseline(h_tilde, act, total_l, rng, cfg.random_rows); });
        for (std::size_t i = 0; i < cfg.omp_sparsity.size(); ++i) {
            const int p = cfg.omp_sparsity[i];
            score(rows[2 + i], [&] { return estimate_omp_baseline(h_tilde, act, dictionary, p); });
        }
        return rows;
    }
};

struct SweepPoint {
    int l_act;
    double p_ul_dbm;
    double sweep_value;
};

CampaignResult run_nmse_sweep(const ExperimentConfig& cfg, const std::vector<SweepPoint>& points) {
    cfg.validate();
    const NmseScenario scenario(cfg);
    const auto per_point = static_cast<std::size_t>(cfg.trials);
    std::vector<std::vector<TrialRow>> slots(points.size() * per_point);
    parallel_for(slots.size(), cfg.workers, [&](std::size_t index) {
        const SweepPoint& pt = points[index / per_point];
        slots[index] = scenario.run_trial(pt.l_act, pt.p_ul_dbm, pt.sweep_value, static_cast<int>(index % per_point),
                                          static_cast<std::uint64_t>(index));
    });

    CampaignResult result;
    result.name = cfg.resolved_name();
    result.experiment = cfg.experiment;
    for (auto& slot : slots)
        for (auto& row : slot)
            result.trials.push_back(std::move(row));
    result.aggregates = aggregate(result.trials);
    std::ostringstream meta;
    meta << to_config_text(cfg) << "# version = " << version_label() << '\n'
         << "# esprit_music = not implemented (no reproducible algorithm description available)\n";
    result.metadata = meta.str();
    return result;
}

}  // namespace

std::string_view version_label() {
    return RISCHEST_VERSION;
}

const AggregateRow* CampaignResult::find(std::string_view estimator, double sweep_value) const {
    for (const AggregateRow& row : aggregates)
        if (row.estimator == estimator && row.sweep_value == sweep_value)
            return &row;
    return nullptr;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& trials) {
    struct Accumulator {
        std::size_t order;
        std::string experiment;
        std::vector<double> values;
    };
    std::map<std::pair<std::string, double>, Accumulator> groups;
    for (const TrialRow& row : trials) {
        auto key = std::make_pair(row.estimator, row.sweep_value);
        auto [it, inserted] = groups.try_emplace(key, Accumulator{groups.size(), row.experiment, {}});
        if (!row.failed)
            it->second.values.push_back(row.value);
    }

    std::vector<AggregateRow> out(groups.size());
    for (const auto& [key, acc] : groups) {
        AggregateRow row;
        row.experiment = acc.experiment;
        row.estimator = key.first;
        row.sweep_value = key.second;
        row.n_trials = static_cast<int>(acc.values.size());
        if (!acc.values.empty()) {
            double sum = 0.0;
            for (double v : acc.values)
                sum += v;
            row.mean = sum / static_cast<double>(acc.values.size());
            if (acc.values.size() > 1) {
                double ss = 0.0;
                for (double v : acc.values)
                    ss += (v - row.mean) * (v - row.mean);
                const double n = static_cast<double>(acc.values.size());
                row.std_err = std::sqrt(ss / (n - 1.0) / n);
            }
        } else {
            row.mean = std::nan("");
            row.std_err = std::nan("");
        }
        out[acc.order] = row;
    }
    return out;
}

CampaignResult run_nmse_vs_active(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.experiment = Experiment::nmse_vs_active;
    std::vector<SweepPoint> points;
    for (int l_act : c.l_act_list)
        points.push_back({l_act, c.p_ul_dbm, static_cast<double>(l_act)});
    return run_nmse_sweep(c, points);
}

CampaignResult run_nmse_vs_power(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.experiment = Experiment::nmse_vs_power;
    std::vector<SweepPoint> points;
    for (double p : c.p_ul_dbm_list)
        points.push_back({c.l_act, p, p});
    return run_nmse_sweep(c, points);
}

CampaignResult run_rank_cdf(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.experiment = Experiment::rank_cdf;
    c.validate();

    struct Surface {
        std::string label;
        RankGridEntry entry;
        Matrix<double> k_sqrt;
    };
    std::vector<Surface> surfaces;
    for (const RankGridEntry& e : c.rank_grid) {
        const auto geom =
            RisGeometry<double>::from_wavelength_fractions(e.l_h, e.l_v, c.d_h_frac, c.d_v_frac, c.wavelength());
        // Unit area times mu, so K = R.
        const CorrelationModel<double> model = build_covariance(build_correlation(geom), 1.0, 1.0);
        surfaces.push_back({"rank_" + std::to_string(e.l_h) + "x" + std::to_string(e.l_v), e, model.k_sqrt});
    }

    const auto per_point = static_cast<std::size_t>(c.trials);
    std::vector<TrialRow> rows(surfaces.size() * per_point);
    const std::string experiment_id(to_string(c.experiment));
    parallel_for(rows.size(), c.workers, [&](std::size_t index) {
        const Surface& s = surfaces[index / per_point];
        TrialRow& row = rows[index];
        row.experiment = experiment_id;
        row.estimator = s.label;
        row.l_act = s.entry.l_act;
        row.p_ul_dbm = c.p_ul_dbm;
        row.l_total = s.entry.l_h * s.entry.l_v;
        row.m_users = c.m_users;
        row.trial = static_cast<int>(index % per_point);
        row.seed = derive_trial_seed(c.master_seed, index);
        row.sweep_value = s.entry.l_act;
        try {
            Rng rng(row.seed);
            const ActiveSet act = select_active(row.l_total, row.l_act, PlacementPolicy::random_uniform, rng);
            row.value = active_rank(s.k_sqrt, act, c.rank_rel_tol).rank;
        } catch (const std::exception& e) {
            row.failed = true;
            row.value = std::nan("");
            add_flag(row.flags, error_flag(e));
        }
    });

    CampaignResult result;
    result.name = c.resolved_name();
    result.experiment = c.experiment;
    result.trials = std::move(rows);
    result.aggregates = aggregate(result.trials);

    for (std::size_t s = 0; s < surfaces.size(); ++s) {
        RankDistribution dist;
        dist.l_act = surfaces[s].entry.l_act;
        dist.total_l = surfaces[s].entry.l_h * surfaces[s].entry.l_v;
        for (std::size_t t = 0; t < per_point; ++t) {
            const TrialRow& row = result.trials[s * per_point + t];
            if (!row.failed)
                dist.samples.push_back({row.l_act, row.l_total, static_cast<int>(row.value), {}});
        }
        const std::vector<double> cdf = dist.cdf();
        for (std::size_t k = 0; k < cdf.size(); ++k)
            result.cdf.push_back({surfaces[s].label, dist.l_act, dist.total_l, static_cast<int>(k), cdf[k]});
    }

    std::ostringstream meta;
    meta << to_config_text(c) << "# version = " << version_label() << '\n';
    result.metadata = meta.str();
    return result;
}

CampaignResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case Experiment::nmse_vs_active:
            return run_nmse_vs_active(cfg);
        case Experiment::nmse_vs_power:
            return run_nmse_vs_power(cfg);
        case Experiment::rank_cdf:
            return run_rank_cdf(cfg);
    }
    throw ConfigError("unknown experiment");
}

std::string trials_csv(const CampaignResult& result) {
    std::ostringstream os;
    const char* value_column = result.experiment == Experiment::rank_cdf ? "rank" : "nmse";
    os << "experiment,estimator,l_act,p_ul_dbm,l_total,m_users,trial,seed," << value_column << ",flags\n";
    for (const TrialRow& r : result.trials) {
        os << r.experiment << ',' << r.estimator << ',' << r.l_act << ',' << format_number(r.p_ul_dbm) << ','
           << r.l_total << ',' << r.m_users << ',' << r.trial << ',' << r.seed << ',' << format_number(r.value) << ','
           << r.flags << '\n';
    }
    return os.str();
}

std::string aggregates_csv(const CampaignResult& result) {
    std::ostringstream os;
    os << "experiment,estimator,sweep_value,mean,std_err,n_trials\n";
    for (const AggregateRow& r : result.aggregates) {
        os << r.experiment << ',' << r.estimator << ',' << format_number(r.sweep_value) << ',' << format_number(r.mean)
           << ',' << format_number(r.std_err) << ',' << r.n_trials << '\n';
    }
    return os.str();
}

std::string cdf_csv(const CampaignResult& result) {
    std::ostringstream os;
    os << "configuration,l_act,l_total,rank,cdf\n";
    for (const CdfRow& r : result.cdf)
        os << r.configuration << ',' << r.l_act << ',' << r.l_total << ',' << r.rank << ',' << format_number(r.cdf)
           << '\n';
    return os.str();
}

void write_csv(const CampaignResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("write_csv: cannot create directory '" + dir.string() + "': " + ec.message());

    auto write = [&](const std::string& suffix, const std::string& body) {
        const std::filesystem::path path = dir / (result.name + suffix);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_csv: cannot open '" + path.string() + "' for writing");
        out << body;
        out.flush();
        if (!out)
            throw std::runtime_error("write_csv: write to '" + path.string() + "' failed");
    };
    write("_trials.csv", trials_csv(result));
    write("_agg.csv", aggregates_csv(result));
    write("_meta.txt", result.metadata);
    if (result.experiment == Experiment::rank_cdf)
        write("_cdf.csv", cdf_csv(result));
}

}  // namespace rischest
