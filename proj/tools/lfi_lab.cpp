#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "lfi/bench.hpp"
#include "lfi/errors.hpp"

namespace {

std::vector<long> parse_budgets(const std::string& list) {
    std::vector<long> budgets;
    std::stringstream ss(list);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) budgets.push_back(std::stol(token));
    }
    return budgets;
}

std::vector<std::string> parse_tokens(const std::string& list) {
    std::vector<std::string> tokens;
    std::stringstream ss(list);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) tokens.push_back(token);
    }
    return tokens;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"likelihood-free inference experiment harness"};
    app.require_subcommand(1);

    lfi::ExperimentConfig config;
    std::string budgets_arg;
    std::string strategies_arg;

    auto* run = app.add_subcommand("run", "run a registered experiment");
    run->add_option("experiment", config.experiment, "experiment name")
        ->required()
        ->check(CLI::IsMember(lfi::known_experiments()));
    run->add_option("--n", budgets_arg, "simulation budget or comma-separated sweep");
    run->add_option("--trials", config.trials, "trials per (strategy, budget) cell");
    run->add_option("--seed", config.seed, "master seed");
    run->add_option("--strategies", strategies_arg, "comma-separated strategy tokens");
    run->add_option("--out", config.out_dir, "output directory for summary.json / trials.jsonl");
    run->add_flag("--dump-particles", config.dump_particles,
                  "write particles/*.csv for the first trial of each cell");
    run->add_option("--fbar", config.fbar_mode, "targeted-density f_bar source")
        ->check(CLI::IsMember({"oracle", "pilot"}));
    run->add_option("--threads", config.threads, "worker threads (0 = hardware)");

    std::string oracle_experiment;
    auto* oracle = app.add_subcommand("oracle", "print exact ground-truth values");
    oracle->add_option("experiment", oracle_experiment, "experiment name")
        ->required()
        ->check(CLI::IsMember(lfi::known_experiments()));

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            config.budgets = parse_budgets(budgets_arg);
            config.strategies = parse_tokens(strategies_arg);
            const lfi::TrialSummary summary = lfi::run_experiment(config);
            std::cout << lfi::summary_to_json(summary, config).dump(2) << std::endl;
        } else {
            std::cout << lfi::oracle_report(oracle_experiment).dump(2) << std::endl;
        }
    } catch (const lfi::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
