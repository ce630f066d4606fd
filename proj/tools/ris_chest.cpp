// Command-line front end: run a campaign or check a configuration file.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rischest/harness.hpp"

namespace {

int run(const std::string& config_path, const std::string& experiment, std::optional<std::uint64_t> seed,
        std::optional<int> workers, std::optional<int> trials, std::optional<std::string> out_dir) {
    rischest::ExperimentConfig cfg = rischest::load_config(config_path);
    cfg.experiment = rischest::parse_experiment(experiment);
    if (seed)
        cfg.master_seed = *seed;
    if (workers)
        cfg.workers = *workers;
    if (trials)
        cfg.trials = *trials;
    if (out_dir)
        cfg.output_dir = *out_dir;
    cfg.validate();

    const auto start = std::chrono::steady_clock::now();
    const rischest::CampaignResult result = rischest::run_experiment(cfg);
    rischest::write_csv(result, cfg.output_dir);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    std::cout << "experiment " << rischest::to_string(cfg.experiment) << ": " << result.trials.size()
              << " trial rows in " << elapsed.count() << " s\n";
    for (const auto& row : result.aggregates) {
        std::cout << "  " << row.estimator << " @ " << row.sweep_value << ": mean " << row.mean << " (se "
                  << row.std_err << ", n " << row.n_trials << ")\n";
    }
    std::cout << "wrote " << cfg.output_dir << "/" << result.name
              << (result.cdf.empty() ? "_{trials,agg}.csv\n" : "_{trials,agg,cdf}.csv\n");
    return 0;
}

int validate(const std::string& config_path) {
    rischest::ExperimentConfig cfg = rischest::load_config(config_path);
    cfg.validate();
    std::cout << "ok: " << config_path << '\n' << rischest::to_config_text(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlated RIS channel estimation Monte-Carlo toolkit"};
    app.set_version_flag("--version", std::string(rischest::version_label()));
    app.require_subcommand(1);

    std::string config_path;
    std::string experiment;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> trials;
    std::optional<std::string> out_dir;

    CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment campaign and write CSV results");
    run_cmd->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--experiment", experiment, "Experiment to run")
        ->required()
        ->check(CLI::IsMember({"nmse-vs-active", "nmse-vs-power", "rank-cdf"}));
    run_cmd->add_option("--seed", seed, "Master seed (overrides config)");
    run_cmd->add_option("--workers", workers, "Worker threads (overrides config)");
    run_cmd->add_option("--trials", trials, "Trials per sweep point (overrides config)");
    run_cmd->add_option("--out", out_dir, "Output directory (overrides config)");

    std::string validate_path;
    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a configuration file without running it");
    validate_cmd->add_option("--config", validate_path, "Configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd)
            return run(config_path, experiment, seed, workers, trials, out_dir);
        return validate(validate_path);
    } catch (const std::exception& e) {
        std::cerr << "ris-chest: " << e.what() << '\n';
        return 1;
    }
}
