#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rischest/core.hpp"
#include "rischest/harness.hpp"

namespace rischest {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "experiment", "name", "l_h", "l_v", "d_h_over_lambda", "d_v_over_lambda", "carrier_ghz", "m_users",
        "ref_loss_db", "path_loss_exponent", "distance_m", "noise_dbm", "alpha", "omp_sparsity", "dict_az",
        "dict_el", "placement", "random_baseline_rows", "l_act_list", "p_ul_dbm", "p_ul_dbm_list", "l_act",
        "rank_grid", "rank_rel_tol", "trials", "master_seed", "output_dir", "workers"};
    return keys;
}

ConfigError bad_value(const std::string& key, const std::string& value, const char* expected) {
    return ConfigError("config: key '" + key + "' has value '" + value + "', expected " + expected);
}

double to_double(const std::string& key, const std::string& value) {
    const std::string v = boost::trim_copy(value);
    if (v == "-inf")
        return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(out))
            throw bad_value(key, value, "a finite number");
        return out;
    } catch (const std::logic_error&) {
        throw bad_value(key, value, "a number");
    }
}

long long to_integer(const std::string& key, const std::string& value) {
    const std::string v = boost::trim_copy(value);
    try {
        std::size_t used = 0;
        const long long out = std::stoll(v, &used);
        if (used != v.size())
            throw bad_value(key, value, "an integer");
        return out;
    } catch (const std::logic_error&) {
        throw bad_value(key, value, "an integer");
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    boost::split(parts, value, boost::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty())
            out.push_back(p);
    }
    return out;
}

RankGridEntry to_rank_entry(const std::string& key, const std::string& text) {
    // L_act:l_hxl_v
    std::vector<std::string> outer;
    boost::split(outer, text, boost::is_any_of(":"));
    if (outer.size() != 2)
        throw bad_value(key, text, "entries of the form L_act:l_hxl_v");
    std::vector<std::string> dims;
    boost::split(dims, outer[1], boost::is_any_of("x"));
    if (dims.size() != 2)
        throw bad_value(key, text, "entries of the form L_act:l_hxl_v");
    return {static_cast<int>(to_integer(key, outer[0])), static_cast<int>(to_integer(key, dims[0])),
            static_cast<int>(to_integer(key, dims[1]))};
}

std::string format_double(double v) {
    if (std::isinf(v))
        return v < 0 ? "-inf" : "inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ", ";
        out += fmt(items[i]);
    }
    return out;
}

}  // namespace

std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::nmse_vs_active:
            return "nmse-vs-active";
        case Experiment::nmse_vs_power:
            return "nmse-vs-power";
        case Experiment::rank_cdf:
            return "rank-cdf";
    }
    return "unknown";
}

Experiment parse_experiment(std::string_view text) {
    if (text == "nmse-vs-active")
        return Experiment::nmse_vs_active;
    if (text == "nmse-vs-power")
        return Experiment::nmse_vs_power;
    if (text == "rank-cdf")
        return Experiment::rank_cdf;
    throw ConfigError("unknown experiment '" + std::string(text) +
                      "', expected nmse-vs-active, nmse-vs-power or rank-cdf");
}

double ExperimentConfig::wavelength() const {
    return kSpeedOfLight / (carrier_ghz * 1e9);
}

std::string ExperimentConfig::resolved_name() const {
    if (!name.empty())
        return name;
    std::string id(to_string(experiment));
    std::replace(id.begin(), id.end(), '-', '_');
    return id;
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError("config: " + what);
    };
    require(l_h >= 1 && l_v >= 1, "l_h and l_v must be >= 1");
    require(d_h_frac > 0 && d_v_frac > 0, "element spacing must be positive");
    require(carrier_ghz > 0, "carrier_ghz must be positive");
    require(m_users >= 1, "m_users must be >= 1");
    require(path_loss.distance_m > 0, "distance_m must be positive");
    require(path_loss.exponent >= 0, "path_loss_exponent must be >= 0");
    require(!std::isnan(noise_dbm) && noise_dbm < std::numeric_limits<double>::infinity(), "noise_dbm must be finite or -inf");
    require(std::isfinite(alpha), "alpha must be finite");
    require(dict_az >= 0 && dict_el >= 0, "dictionary sizes must be >= 0 (0 = automatic)");
    for (int p : omp_sparsity)
        require(p >= 1, "omp_sparsity entries must be >= 1");
    require(trials >= 1, "trials must be >= 1");
    require(workers >= 1, "workers must be >= 1");
    require(!output_dir.empty(), "output_dir must not be empty");

    const int total = total_elements();
    switch (experiment) {
        case Experiment::nmse_vs_active:
            require(!l_act_list.empty(), "l_act_list must not be empty");
            for (int n : l_act_list)
                require(n >= m_users && n <= total, "every l_act_list entry must lie in [m_users, l_h * l_v]");
            require(std::isfinite(p_ul_dbm), "p_ul_dbm must be finite");
            break;
        case Experiment::nmse_vs_power:
            require(!p_ul_dbm_list.empty(), "p_ul_dbm_list must not be empty");
            for (double p : p_ul_dbm_list)
                require(std::isfinite(p), "p_ul_dbm_list entries must be finite");
            require(l_act >= m_users && l_act <= total, "l_act must lie in [m_users, l_h * l_v]");
            break;
        case Experiment::rank_cdf:
            require(!rank_grid.empty(), "rank_grid must not be empty");
            for (const RankGridEntry& e : rank_grid)
                require(e.l_h >= 1 && e.l_v >= 1 && e.l_act >= 1 && e.l_act <= e.l_h * e.l_v,
                        "rank_grid entries need 1 <= L_act <= l_h * l_v");
            require(rank_rel_tol >= 0, "rank_rel_tol must be >= 0");
            break;
    }
}

ExperimentConfig parse_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    ExperimentConfig cfg;
    for (const auto& [key, node] : tree) {
        if (!node.empty())
            throw ConfigError("config: sections are not supported ('" + key + "')");
        if (!known_keys().count(key))
            throw ConfigError("config: unknown key '" + key + "'");
        const std::string value = boost::trim_copy(node.data());
        auto integer = [&] { return static_cast<int>(to_integer(key, value)); };
        auto number = [&] { return to_double(key, value); };

        if (key == "experiment") {
            cfg.experiment = parse_experiment(value);
        } else if (key == "name") {
            cfg.name = value;
        } else if (key == "l_h") {
            cfg.l_h = integer();
        } else if (key == "l_v") {
            cfg.l_v = integer();
        } else if (key == "d_h_over_lambda") {
            cfg.d_h_frac = number();
        } else if (key == "d_v_over_lambda") {
            cfg.d_v_frac = number();
        } else if (key == "carrier_ghz") {
            cfg.carrier_ghz = number();
        } else if (key == "m_users") {
            cfg.m_users = integer();
        } else if (key == "ref_loss_db") {
            cfg.path_loss.ref_loss_db = number();
        } else if (key == "path_loss_exponent") {
            cfg.path_loss.exponent = number();
        } else if (key == "distance_m") {
            cfg.path_loss.distance_m = number();
        } else if (key == "noise_dbm") {
            cfg.noise_dbm = number();
        } else if (key == "alpha") {
            cfg.alpha = number();
        } else if (key == "omp_sparsity") {
            cfg.omp_sparsity.clear();
            for (const auto& item : split_list(value))
                cfg.omp_sparsity.push_back(static_cast<int>(to_integer(key, item)));
        } else if (key == "dict_az") {
            cfg.dict_az = integer();
        } else if (key == "dict_el") {
            cfg.dict_el = integer();
        } else if (key == "placement") {
            if (value == "random")
                cfg.placement = PlacementPolicy::random_uniform;
            else if (value == "grid")
                cfg.placement = PlacementPolicy::uniform_grid;
            else
                throw bad_value(key, value, "random or grid");
        } else if (key == "random_baseline_rows") {
            if (value == "all")
                cfg.random_rows = RandomBaselineRows::all;
            else if (value == "passive")
                cfg.random_rows = RandomBaselineRows::passive;
            else
                throw bad_value(key, value, "all or passive");
        } else if (key == "l_act_list") {
            cfg.l_act_list.clear();
            for (const auto& item : split_list(value))
                cfg.l_act_list.push_back(static_cast<int>(to_integer(key, item)));
        } else if (key == "p_ul_dbm") {
            cfg.p_ul_dbm = number();
        } else if (key == "p_ul_dbm_list") {
            cfg.p_ul_dbm_list.clear();
            for (const auto& item : split_list(value))
                cfg.p_ul_dbm_list.push_back(to_double(key, item));
        } else if (key == "l_act") {
            cfg.l_act = integer();
        } else if (key == "rank_grid") {
            cfg.rank_grid.clear();
            for (const auto& item : split_list(value))
                cfg.rank_grid.push_back(to_rank_entry(key, item));
        } else if (key == "rank_rel_tol") {
            cfg.rank_rel_tol = number();
        } else if (key == "trials") {
            cfg.trials = integer();
        } else if (key == "master_seed") {
            const long long seed = to_integer(key, value);
            if (seed < 0)
                throw bad_value(key, value, "a non-negative integer");
            cfg.master_seed = static_cast<std::uint64_t>(seed);
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "workers") {
            cfg.workers = integer();
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    return parse_config(in);
}

std::string to_config_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    auto ints = [](const std::vector<int>& v) { return join(v, [](int x) { return std::to_string(x); }); };
    os << "experiment = " << to_string(cfg.experiment) << '\n'
       << "name = " << cfg.resolved_name() << '\n'
       << "l_h = " << cfg.l_h << '\n'
       << "l_v = " << cfg.l_v << '\n'
       << "d_h_over_lambda = " << format_double(cfg.d_h_frac) << '\n'
       << "d_v_over_lambda = " << format_double(cfg.d_v_frac) << '\n'
       << "carrier_ghz = " << format_double(cfg.carrier_ghz) << '\n'
       << "m_users = " << cfg.m_users << '\n'
       << "ref_loss_db = " << format_double(cfg.path_loss.ref_loss_db) << '\n'
       << "path_loss_exponent = " << format_double(cfg.path_loss.exponent) << '\n'
       << "distance_m = " << format_double(cfg.path_loss.distance_m) << '\n'
       << "noise_dbm = " << format_double(cfg.noise_dbm) << '\n'
       << "alpha = " << format_double(cfg.alpha) << '\n'
       << "omp_sparsity = " << ints(cfg.omp_sparsity) << '\n'
       << "dict_az = " << cfg.resolved_dict_az() << '\n'
       << "dict_el = " << cfg.resolved_dict_el() << '\n'
       << "placement = " << (cfg.placement == PlacementPolicy::uniform_grid ? "grid" : "random") << '\n'
       << "random_baseline_rows = " << (cfg.random_rows == RandomBaselineRows::passive ? "passive" : "all") << '\n'
       << "l_act_list = " << ints(cfg.l_act_list) << '\n'
       << "p_ul_dbm = " << format_double(cfg.p_ul_dbm) << '\n'
       << "p_ul_dbm_list = " << join(cfg.p_ul_dbm_list, format_double) << '\n'
       << "l_act = " << cfg.l_act << '\n'
       << "rank_grid = "
       << join(cfg.rank_grid,
               [](const RankGridEntry& e) {
                   return std::to_string(e.l_act) + ":" + std::to_string(e.l_h) + "x" + std::to_string(e.l_v);
               })
       << '\n'
       << "rank_rel_tol = " << format_double(cfg.rank_rel_tol) << '\n'
       << "trials = " << cfg.trials << '\n'
       << "master_seed = " << cfg.master_seed << '\n'
       << "output_dir = " << cfg.output_dir << '\n'
       << "workers = " << cfg.workers << '\n';
    return os.str();
}

}  // namespace rischest
