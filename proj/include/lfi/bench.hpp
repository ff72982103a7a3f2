#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lfi {

/// One registered experiment run: budgets x strategies x trials.
struct ExperimentConfig {
    std::string experiment;
    std::vector<long> budgets;            // empty = experiment default
    long trials = 0;                      // 0 = experiment default
    std::uint64_t seed = 1;
    std::vector<std::string> strategies;  // empty = experiment default
    std::string out_dir;                  // empty = no artifacts written
    bool dump_particles = false;
    std::string fbar_mode = "oracle";     // "oracle" | "pilot"
    int threads = 0;                      // 0 = hardware concurrency
};

/// One trial's machine-readable outcome (one JSON line).
struct TrialRecord {
    long trial = 0;
    std::string strategy;
    long n = 0;
    bool degenerate = false;
    std::optional<double> estimate;
    std::optional<double> sq_err;
    std::optional<double> ess;
    std::optional<double> kl;
    std::optional<double> kl_quadratic;
    double acceptance_rate = 0.0;
    std::map<std::string, double> extra;
};

/// Aggregates for one (strategy, budget) cell. Degenerate trials are
/// excluded from moment statistics and reported in `degenerate`.
struct CellSummary {
    long trials = 0;
    long degenerate = 0;
    std::optional<double> mean_mse;
    std::optional<double> mse_q25;
    std::optional<double> mse_q75;
    std::optional<double> se_mse;
    std::optional<double> mean_ess;
    std::optional<double> mean_kl;
    std::optional<double> mean_kl_quadratic;
    double mean_acceptance_rate = 0.0;
    std::map<std::string, double> extra_means;
};

struct TrialSummary {
    std::map<std::string, std::map<long, CellSummary>> cells;
    std::string experiment;
    std::uint64_t seed = 0;
};

/// Nearest-rank percentile with rank = min(floor(p n) + 1, n).
double nearest_rank_percentile(std::vector<double> values, double p);

/// Reduce one cell's records; requires at least one record.
CellSummary summarize(const std::vector<TrialRecord>& records);

/// Deterministic work pool: fn(i) for i in [0, count), results independent
/// of the thread count.
void parallel_for(long count, int threads, const std::function<void(long)>& fn);

const std::vector<std::string>& known_experiments();

/// Run a registered experiment; writes summary.json / trials.jsonl (and
/// optional particle CSVs) when out_dir is set.
TrialSummary run_experiment(const ExperimentConfig& config);

/// Exact ground-truth values for an experiment (closed forms and
/// quadrature oracles).
nlohmann::json oracle_report(const std::string& experiment);

nlohmann::json summary_to_json(const TrialSummary& summary, const ExperimentConfig& config);
nlohmann::json trial_record_to_json(const TrialRecord& record);

}  // namespace lfi
