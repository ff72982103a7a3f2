#include "lfi/bench.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "lfi/allocation.hpp"
#include "lfi/builtin.hpp"
#include "lfi/samplers.hpp"
#include "lfi/scores.hpp"
#include "lfi/smc.hpp"

namespace lfi {

namespace {

using nlohmann::json;

json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

/// Experiment defaults and the per-trial worker. The worker fills `dump`
/// with the trial's particles when it is non-null (--dump-particles).
using TrialWorker = std::function<TrialRecord(long trial, RngStream&, WeightedParticles* dump)>;

struct ExperimentPlan {
    std::vector<std::string> default_strategies;
    std::vector<long> default_budgets;
    long default_trials = 1000;
    // prepare(strategy, n) runs once per cell before the trial loop and
    // returns the worker used for every trial in that cell.
    std::function<TrialWorker(const std::string&, long)> prepare;
    // experiments with a richer dump format (smc) write it themselves
    std::function<void(const std::string& strategy, long n, RngStream rng, std::ostream& out)>
        custom_dump;
};

// ---------------------------------------------------------------------------
// two-param / discrete-gaussian helpers

double counts_ess(const DiscreteProblem& problem, const CountTable& counts) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < problem.size(); ++i) {
        if (counts.n[i] == 0) continue;
        const double w = problem.prior()[i] / counts.n[i];
        s += counts.n_star[i] * w;
        s2 += counts.n_star[i] * w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

Eigen::VectorXd strategy_proportions(const DiscreteProblem& problem, const std::string& token,
                                     const TargetFunction& f) {
    if (token.rfind("split:", 0) == 0) {
        if (problem.size() != 2) throw Error("split strategies need a two-point problem");
        const double c1 = std::stod(token.substr(6));
        if (c1 <= 0.0 || c1 >= 1.0) throw Error("split fraction must lie in (0, 1)");
        Eigen::VectorXd props(2);
        props << c1, 1.0 - c1;
        return props;
    }
    return optimal_proportions(problem, AllocationKind::from_token(token, f));
}

TrialRecord discrete_trial(const DiscreteProblem& problem, const TargetFunction& f, double truth,
                           const Eigen::VectorXd& exact, const AllocationPlan& plan, RngStream& rng,
                           bool with_variance_estimate = false,
                           WeightedParticles* dump = nullptr) {
    TrialRecord rec;
    const CountTable counts = simulate_counts(problem, plan, rng);
    if (dump != nullptr) *dump = particles_from_counts(problem, counts);
    rec.acceptance_rate =
        static_cast<double>(counts.n_star.sum()) / static_cast<double>(plan.budget);
    const double ess = counts_ess(problem, counts);
    if (ess > 0.0) rec.ess = ess;
    try {
        const Eigen::VectorXd q_hat = mle_posterior(counts, problem);
        const double estimate = evaluate_on_grid(problem, f).dot(q_hat);
        rec.estimate = estimate;
        rec.sq_err = squared_error(estimate, truth);
        rec.kl = kl_divergence(q_hat, exact);
        rec.kl_quadratic = phi_quadratic_approx(q_hat, exact, 1.0);
        if (with_variance_estimate) {
            const VarianceEstimate var = estimate_variance(counts, problem, f);
            if (!var.degenerate) rec.extra["variance_estimate"] = var.value;
        }
    } catch (const DegenerateEstimateError&) {
        rec.degenerate = true;
    }
    return rec;
}

ExperimentPlan two_param_plan(const ExperimentConfig&) {
    ExperimentPlan plan;
    plan.default_strategies = {"prior", "ibs", "ess-opt", "unnorm-opt", "mse-opt"};
    plan.default_budgets = {1000};
    plan.default_trials = 10000;
    plan.prepare = [](const std::string& strategy, long n) {
        auto problem = std::make_shared<DiscreteProblem>(builtin::two_param());
        const TargetFunction f = targets::indicator_value(problem->values()[0]);
        const double truth = posterior_expectation(*problem, f);
        const Eigen::VectorXd exact = exact_posterior(*problem);
        const AllocationPlan alloc = integerize(strategy_proportions(*problem, strategy, f), n);
        return [problem, f, truth, exact, alloc](long, RngStream& rng, WeightedParticles* dump) {
            return discrete_trial(*problem, f, truth, exact, alloc, rng, false, dump);
        };
    };
    return plan;
}

ExperimentPlan discrete_gaussian_plan(const ExperimentConfig&) {
    ExperimentPlan plan;
    for (const char* target : {"mean", "m2", "ci95"}) {
        for (const char* kind : {"prior", "posterior", "ess-opt", "unnorm-opt", "mse-opt"}) {
            plan.default_strategies.push_back(std::string(kind) + ":" + target);
        }
    }
    plan.default_budgets = {4096};
    plan.default_trials = 1000;
    plan.prepare = [](const std::string& strategy, long n) {
        auto problem = std::make_shared<DiscreteProblem>(builtin::discrete_gaussian());
        const auto colon = strategy.find(':');
        if (colon == std::string::npos) throw Error("discrete-gaussian strategies are kind:target");
        const std::string kind = strategy.substr(0, colon);
        const std::string target = strategy.substr(colon + 1);
        TargetFunction f;
        if (target == "mean") {
            f = targets::coordinate();
        } else if (target == "m2") {
            f = targets::second_moment();
        } else if (target == "ci95") {
            f = targets::indicator_abs_below(2.0);
        } else {
            throw Error("unknown target '" + target + "'");
        }
        const double truth = posterior_expectation(*problem, f);
        const Eigen::VectorXd exact = exact_posterior(*problem);
        const long k = problem->size();
        if (n <= k) throw Error("discrete-gaussian needs n > 101");
        // one simulation per parameter first, remainder by the strategy
        AllocationPlan alloc = integerize(strategy_proportions(*problem, kind, f), n - k);
        alloc.counts.array() += 1;
        alloc.budget = n;
        return [problem, f, truth, exact, alloc](long, RngStream& rng, WeightedParticles* dump) {
            return discrete_trial(*problem, f, truth, exact, alloc, rng, false, dump);
        };
    };
    return plan;
}

ExperimentPlan adaptive_plan(const ExperimentConfig&) {
    ExperimentPlan plan;
    plan.default_strategies = {"prior", "posterior-adaptive", "mse-adaptive", "mse-oracle"};
    plan.default_budgets = {320, 1280, 4096, 16384};
    plan.default_trials = 1000;
    plan.prepare = [](const std::string& strategy, long n) {
        auto problem = std::make_shared<DiscreteProblem>(builtin::ten_point());
        const TargetFunction f = targets::coordinate();
        const double truth = posterior_expectation(*problem, f);
        const Eigen::VectorXd exact = exact_posterior(*problem);
        const int rounds = 16;
        const double floor_term = 1.0 / std::sqrt(static_cast<double>(n));

        const auto floored_plan = [&](Eigen::VectorXd props) {
            Eigen::ArrayXd raw = props.array() + floor_term;
            raw /= raw.sum();
            return integerize(raw.matrix(), n);
        };

        if (strategy == "prior" || strategy == "mse-oracle") {
            const AllocationPlan alloc =
                strategy == "prior"
                    ? floored_plan(problem->prior())
                    : floored_plan(optimal_proportions(*problem, AllocationKind::mse_optimal(f)));
            return TrialWorker(
                [problem, f, truth, exact, alloc](long, RngStream& rng, WeightedParticles* dump) {
                    return discrete_trial(*problem, f, truth, exact, alloc, rng, true, dump);
                });
        }
        const AdaptiveTarget target = strategy == "posterior-adaptive"
                                          ? AdaptiveTarget::PosteriorProportions
                                          : AdaptiveTarget::MseOptimal;
        if (strategy != "posterior-adaptive" && strategy != "mse-adaptive") {
            throw Error("unknown adaptive strategy '" + strategy + "'");
        }
        return TrialWorker(
            [problem, f, truth, target, rounds, n](long, RngStream& rng, WeightedParticles* dump) {
                TrialRecord rec;
                const AdaptiveResult result = adaptive_allocate(*problem, f, n, rounds, rng, target);
                if (dump != nullptr) *dump = particles_from_counts(*problem, result.counts);
                rec.acceptance_rate = static_cast<double>(result.counts.n_star.sum()) /
                                      static_cast<double>(n);
                const double ess = counts_ess(*problem, result.counts);
                if (ess > 0.0) rec.ess = ess;
                if (result.counts.n_star.sum() == 0) {
                    rec.degenerate = true;
                    return rec;
                }
                rec.estimate = result.estimate;
                rec.sq_err = squared_error(result.estimate, truth);
                if (!result.degenerate) rec.extra["variance_estimate"] = result.variance_estimate;
                return rec;
            });
    };
    return plan;
}

// ---------------------------------------------------------------------------
// continuous experiments

struct ContinuousSetup {
    std::shared_ptr<const ContinuousProblem> problem;
    std::shared_ptr<const ImportanceDensity> density;  // null for plain rejection
    TargetFunction f;
    double truth = 0.0;
    bool pilot_fbar = false;
};

TrialRecord continuous_trial(const ContinuousSetup& setup, long n, RngStream& rng,
                             WeightedParticles* out_particles = nullptr) {
    TrialRecord rec;
    const Problem problem{*setup.problem};
    WeightedParticles particles;
    if (setup.pilot_fbar) {
        // spend 10% of the budget on a pilot rejection estimate of f_bar
        const long pilot_n = std::max<long>(1, n / 10);
        const WeightedParticles pilot = rejection_sampling(problem, pilot_n, rng);
        double f_bar;
        try {
            f_bar = weighted_expectation(pilot, setup.f);
        } catch (const ZeroTotalWeightError&) {
            rec.degenerate = true;
            return rec;
        }
        ImportanceDensity q = targeted_density(problem, setup.f, f_bar);
        particles = importance_sampling(problem, q, n - pilot_n, rng);
        rec.extra["pilot_fbar"] = f_bar;
    } else if (setup.density) {
        particles = importance_sampling(problem, *setup.density, n, rng);
    } else {
        particles = rejection_sampling(problem, n, rng);
    }

    rec.acceptance_rate = static_cast<double>(particles.accepted_count()) /
                          static_cast<double>(particles.size());
    if (setup.problem->model_count() > 1) {
        long on_first_model = 0;
        for (const auto& e : particles) on_first_model += e.theta.model == 0 ? 1 : 0;
        rec.extra["sim_mass_m1"] =
            static_cast<double>(on_first_model) / static_cast<double>(particles.size());
    }
    try {
        const double estimate = weighted_expectation(particles, setup.f);
        rec.estimate = estimate;
        rec.sq_err = squared_error(estimate, setup.truth);
        rec.ess = effective_sample_size(particles);
    } catch (const ZeroTotalWeightError&) {
        rec.degenerate = true;
    }
    if (out_particles != nullptr) *out_particles = std::move(particles);
    return rec;
}

ContinuousSetup make_continuous_setup(std::shared_ptr<const ContinuousProblem> problem,
                                      const TargetFunction& f, const std::string& strategy,
                                      const std::string& fbar_mode) {
    ContinuousSetup setup;
    setup.problem = std::move(problem);
    setup.f = f;
    setup.truth = posterior_expectation(*setup.problem, f);
    const Problem generic{*setup.problem};
    if (strategy == "prior") {
        // plain rejection sampling
    } else if (strategy == "posterior") {
        setup.density = std::make_shared<ImportanceDensity>(posterior_density(generic));
    } else if (strategy == "ess-opt") {
        setup.density = std::make_shared<ImportanceDensity>(ess_optimal_density(generic));
    } else if (strategy == "targeted") {
        if (fbar_mode == "pilot") {
            setup.pilot_fbar = true;
        } else {
            setup.density = std::make_shared<ImportanceDensity>(
                targeted_density(generic, f, setup.truth));
        }
    } else if (strategy == "strat-density") {
        setup.density = std::make_shared<ImportanceDensity>(
            stratified_targeted_density(generic, f, setup.truth));
    } else {
        throw Error("unknown sampling strategy '" + strategy + "'");
    }
    return setup;
}

ExperimentPlan continuous_plan(const ExperimentConfig& config) {
    ExperimentPlan plan;
    plan.default_strategies = {"prior", "posterior", "ess-opt", "targeted"};
    plan.default_budgets = {200, 800, 3200};
    plan.default_trials = 1000;
    const std::string fbar_mode = config.fbar_mode;
    plan.prepare = [fbar_mode](const std::string& strategy, long n) {
        auto problem = std::make_shared<const ContinuousProblem>(builtin::laplace_line());
        const ContinuousSetup setup =
            make_continuous_setup(problem, targets::coordinate(), strategy, fbar_mode);
        return [setup, n](long, RngStream& rng, WeightedParticles* dump) {
            return continuous_trial(setup, n, rng, dump);
        };
    };
    return plan;
}

ExperimentPlan model_selection_plan(const ExperimentConfig& config) {
    ExperimentPlan plan;
    plan.default_strategies = {"prior", "posterior", "ess-opt", "targeted"};
    plan.default_budgets = {800, 3200};
    plan.default_trials = 1000;
    const std::string fbar_mode = config.fbar_mode;
    plan.prepare = [fbar_mode](const std::string& strategy, long n) {
        auto problem = std::make_shared<const ContinuousProblem>(builtin::two_model());
        const ContinuousSetup setup = make_continuous_setup(
            problem, targets::indicator_model(0, "1[M=1]"), strategy, fbar_mode);
        return [setup, n](long, RngStream& rng, WeightedParticles* dump) {
            return continuous_trial(setup, n, rng, dump);
        };
    };
    return plan;
}

ExperimentPlan kde_plan(const ExperimentConfig& config) {
    ExperimentPlan plan;
    plan.default_strategies = {"stratified-targeted", "posterior", "strat-density",
                               "prior",               "ess-opt",   "targeted"};
    plan.default_budgets = {1000};
    plan.default_trials = 1000;
    const std::string fbar_mode = config.fbar_mode;
    plan.prepare = [fbar_mode](const std::string& strategy, long n) {
        auto problem = std::make_shared<const ContinuousProblem>(builtin::unit_ramp());
        const TargetFunction f = targets::indicator_below(0.5);
        const double truth = posterior_expectation(*problem, f);
        const double bandwidth = 1.0 / std::sqrt(static_cast<double>(n));

        if (strategy == "stratified-targeted") {
            const Problem generic{*problem};
            auto base = std::make_shared<ImportanceDensity>(
                stratified_targeted_density(generic, f, truth));
            return TrialWorker(
                [problem, f, truth, base, n, bandwidth](long, RngStream& rng,
                                                        WeightedParticles* dump) {
                    TrialRecord rec;
                    try {
                        const StratifiedResult result =
                            stratified_sampling(*problem, *base, n, rng, f);
                        if (dump != nullptr) *dump = result.particles;
                        rec.estimate = result.estimate;
                        rec.sq_err = squared_error(result.estimate, truth);
                        rec.ess = effective_sample_size(result.particles);
                        rec.acceptance_rate =
                            static_cast<double>(result.particles.accepted_count()) /
                            static_cast<double>(result.particles.size());
                        const double kernel_est = kernel_posterior_expectation(
                            result.particles, *problem, f, bandwidth, 20);
                        rec.extra["estimate_kernel"] = kernel_est;
                        rec.extra["sq_err_kernel"] = squared_error(kernel_est, truth);
                    } catch (const ZeroTotalWeightError&) {
                        rec.degenerate = true;
                    }
                    return rec;
                });
        }

        const ContinuousSetup setup = make_continuous_setup(problem, f, strategy, fbar_mode);
        return TrialWorker(
            [setup, problem, f, truth, n, bandwidth](long, RngStream& rng,
                                                     WeightedParticles* dump) {
                WeightedParticles particles;
                TrialRecord rec = continuous_trial(setup, n, rng, &particles);
                if (dump != nullptr) *dump = particles;
                if (rec.degenerate) return rec;
                // paired kernel-regression estimate from the same particles
                KernelDiagnostics diag;
                const double kernel_est =
                    kernel_posterior_expectation(particles, *problem, f, bandwidth, 20, &diag);
                rec.extra["estimate_kernel"] = kernel_est;
                rec.extra["sq_err_kernel"] = squared_error(kernel_est, truth);
                if (diag.underflow_nodes > 0) {
                    rec.extra["kernel_underflow_nodes"] = diag.underflow_nodes;
                }
                return rec;
            });
    };
    return plan;
}

// ---------------------------------------------------------------------------
// smc experiment

SmcConfig smc_config_for(const std::string& strategy, long n) {
    SmcConfig smc;
    smc.total_budget = n;
    if (strategy == "rejection") {
        smc.epsilon_schedule = {1.0};
    } else if (strategy == "mvn-slow") {
        smc.epsilon_schedule = SmcConfig::slow_schedule();
        smc.kernel = SmcConfig::Kernel::LocalMvn;
    } else if (strategy == "mvn-fast") {
        smc.epsilon_schedule = SmcConfig::fast_schedule();
        smc.kernel = SmcConfig::Kernel::LocalMvn;
    } else if (strategy == "box-slow") {
        smc.epsilon_schedule = SmcConfig::slow_schedule();
        smc.kernel = SmcConfig::Kernel::UniformBox;
    } else if (strategy == "box-fast") {
        smc.epsilon_schedule = SmcConfig::fast_schedule();
        smc.kernel = SmcConfig::Kernel::UniformBox;
    } else {
        throw Error("unknown smc strategy '" + strategy + "'");
    }
    return smc;
}

ExperimentPlan smc_plan(const ExperimentConfig& config) {
    ExperimentPlan plan;
    plan.default_strategies = {"rejection", "mvn-slow", "mvn-fast", "box-slow", "box-fast"};
    plan.default_budgets = {34000};
    plan.default_trials = 100;
    std::string cache = config.out_dir.empty() ? std::string("abc_reference_cache.json")
                                               : config.out_dir + "/abc_reference_cache.json";
    plan.custom_dump = [](const std::string& strategy, long n, RngStream rng, std::ostream& out) {
        const EllipsoidProblem problem;
        const SmcRun run = run_smc(problem, smc_config_for(strategy, n), rng);
        write_smc_csv(out, run);
    };
    plan.prepare = [cache](const std::string& strategy, long n) {
        SmcConfig smc = smc_config_for(strategy, n);
        const double eps_final = smc.epsilon_schedule.back();
        const EllipsoidPosterior truth = ellipsoid_true_posterior();
        const Eigen::Matrix2d abc_cov = abc_covariance_reference(eps_final, cache);

        return TrialWorker(
            [smc, truth, abc_cov](long, RngStream& rng, WeightedParticles*) {
                const EllipsoidProblem problem;
                TrialRecord rec;
                const SmcRun run = run_smc(problem, smc, rng);
                rec.acceptance_rate =
                    run.rounds.empty()
                        ? 0.0
                        : static_cast<double>(run.rounds.back().n_acc) /
                              static_cast<double>(std::max<long>(1, run.rounds.back().n_sims));
                rec.extra["total_sims"] = static_cast<double>(run.total_sims);
                for (std::size_t k = 0; k < run.rounds.size(); ++k) {
                    rec.extra["acc_rate_r" + std::to_string(k + 1)] =
                        static_cast<double>(run.rounds[k].n_acc) /
                        static_cast<double>(std::max<long>(1, run.rounds[k].n_sims));
                }
                const PosteriorMoments fin = final_round_moments(run);
                const PosteriorMoments all = all_rounds_moments(run);
                if (!fin.valid || run.stopped_early) {
                    rec.degenerate = true;
                    return rec;
                }
                rec.ess = final_round_ess(run);
                rec.extra["ess_all"] = all_rounds_ess(run);
                rec.sq_err = (fin.mean - truth.mean).squaredNorm();
                rec.estimate = fin.mean[0];
                rec.extra["mean_sq_err_all"] = (all.mean - truth.mean).squaredNorm();
                rec.extra["cov_true_sq_err_final"] =
                    (fin.covariance - truth.covariance).squaredNorm();
                rec.extra["cov_true_sq_err_all"] =
                    (all.covariance - truth.covariance).squaredNorm();
                rec.extra["cov_abc_sq_err_final"] = (fin.covariance - abc_cov).squaredNorm();
                rec.extra["cov_abc_sq_err_all"] = (all.covariance - abc_cov).squaredNorm();
                return rec;
            });
    };
    return plan;
}

ExperimentPlan make_plan(const ExperimentConfig& config) {
    if (config.experiment == "two-param") return two_param_plan(config);
    if (config.experiment == "discrete-gaussian") return discrete_gaussian_plan(config);
    if (config.experiment == "adaptive") return adaptive_plan(config);
    if (config.experiment == "continuous") return continuous_plan(config);
    if (config.experiment == "kde") return kde_plan(config);
    if (config.experiment == "model-selection") return model_selection_plan(config);
    if (config.experiment == "smc") return smc_plan(config);
    throw Error("unknown experiment '" + config.experiment + "'; known: two-param, "
                "discrete-gaussian, adaptive, continuous, kde, model-selection, smc");
}

}  // namespace

double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) throw Error("nearest_rank_percentile: empty sample");
    std::sort(values.begin(), values.end());
    const long n = static_cast<long>(values.size());
    const long rank = std::min<long>(static_cast<long>(std::floor(p * n)) + 1, n);
    return values[static_cast<std::size_t>(rank - 1)];
}

CellSummary summarize(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw Error("summarize: needs at least one record");
    CellSummary cell;
    cell.trials = static_cast<long>(records.size());

    std::vector<double> errs, esses, kls, klqs;
    std::map<std::string, std::pair<double, long>> extras;
    double acc = 0.0;
    for (const auto& rec : records) {
        if (rec.degenerate) {
            ++cell.degenerate;
            continue;
        }
        if (rec.sq_err) errs.push_back(*rec.sq_err);
        if (rec.ess) esses.push_back(*rec.ess);
        if (rec.kl && std::isfinite(*rec.kl)) kls.push_back(*rec.kl);
        if (rec.kl_quadratic && std::isfinite(*rec.kl_quadratic)) klqs.push_back(*rec.kl_quadratic);
        acc += rec.acceptance_rate;
        for (const auto& [key, value] : rec.extra) {
            auto& slot = extras[key];
            slot.first += value;
            slot.second += 1;
        }
    }
    const long kept = cell.trials - cell.degenerate;
    if (kept > 0) cell.mean_acceptance_rate = acc / static_cast<double>(kept);
    if (!errs.empty()) {
        double mean = 0.0;
        for (double e : errs) mean += e;
        mean /= static_cast<double>(errs.size());
        cell.mean_mse = mean;
        double var = 0.0;
        for (double e : errs) var += (e - mean) * (e - mean);
        if (errs.size() > 1) {
            var /= static_cast<double>(errs.size() - 1);
            cell.se_mse = std::sqrt(var / static_cast<double>(errs.size()));
        } else {
            cell.se_mse = 0.0;
        }
        cell.mse_q25 = nearest_rank_percentile(errs, 0.25);
        cell.mse_q75 = nearest_rank_percentile(errs, 0.75);
    }
    const auto mean_of = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    if (!esses.empty()) cell.mean_ess = mean_of(esses);
    if (!kls.empty()) cell.mean_kl = mean_of(kls);
    if (!klqs.empty()) cell.mean_kl_quadratic = mean_of(klqs);
    for (const auto& [key, slot] : extras) {
        if (slot.second > 0) cell.extra_means[key] = slot.first / static_cast<double>(slot.second);
    }
    return cell;
}

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (threads == 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> names = {
        "two-param", "discrete-gaussian", "adaptive", "continuous", "kde", "model-selection",
        "smc"};
    return names;
}

json trial_record_to_json(const TrialRecord& rec) {
    json j;
    j["trial"] = rec.trial;
    j["strategy"] = rec.strategy;
    j["n"] = rec.n;
    j["degenerate"] = rec.degenerate;
    j["acceptance_rate"] = rec.acceptance_rate;
    if (rec.estimate) j["estimate"] = number_or_inf(*rec.estimate);
    if (rec.sq_err) j["sq_err"] = number_or_inf(*rec.sq_err);
    if (rec.ess) j["ess"] = number_or_inf(*rec.ess);
    if (rec.kl) j["kl"] = number_or_inf(*rec.kl);
    if (rec.kl_quadratic) j["kl_quadratic"] = number_or_inf(*rec.kl_quadratic);
    for (const auto& [key, value] : rec.extra) j[key] = number_or_inf(value);
    return j;
}

namespace {

json cell_to_json(const CellSummary& cell) {
    json j;
    j["trials"] = cell.trials;
    j["degenerate_trials"] = cell.degenerate;
    j["mean_acceptance_rate"] = cell.mean_acceptance_rate;
    if (cell.mean_mse) j["mean_mse"] = number_or_inf(*cell.mean_mse);
    if (cell.mse_q25) j["mse_q25"] = number_or_inf(*cell.mse_q25);
    if (cell.mse_q75) j["mse_q75"] = number_or_inf(*cell.mse_q75);
    if (cell.se_mse) j["se_mse"] = number_or_inf(*cell.se_mse);
    if (cell.mean_ess) j["mean_ess"] = number_or_inf(*cell.mean_ess);
    if (cell.mean_kl) j["mean_kl"] = number_or_inf(*cell.mean_kl);
    if (cell.mean_kl_quadratic) j["mean_kl_quadratic"] = number_or_inf(*cell.mean_kl_quadratic);
    for (const auto& [key, value] : cell.extra_means) j["mean_" + key] = number_or_inf(value);
    return j;
}

}  // namespace

json summary_to_json(const TrialSummary& summary, const ExperimentConfig& config) {
    json j;
    j["schema_version"] = 1;
    j["experiment"] = summary.experiment;
    j["seed"] = summary.seed;
    j["config"] = {{"trials", config.trials},
                   {"budgets", config.budgets},
                   {"strategies", config.strategies},
                   {"fbar_mode", config.fbar_mode}};
    j["metadata"] = {
        {"percentile_convention", "nearest rank, rank = floor(p*n) + 1"},
        {"standard_error_caveat",
         "naive standard errors; variability of ratio summaries is likely underestimated"}};
    json cells = json::object();
    for (const auto& [strategy, by_n] : summary.cells) {
        json per_n = json::object();
        for (const auto& [n, cell] : by_n) per_n[std::to_string(n)] = cell_to_json(cell);
        cells[strategy] = per_n;
    }
    j["cells"] = cells;
    return j;
}

TrialSummary run_experiment(const ExperimentConfig& raw_config) {
    ExperimentConfig config = raw_config;
    ExperimentPlan plan = make_plan(config);
    if (config.strategies.empty()) config.strategies = plan.default_strategies;
    if (config.budgets.empty()) config.budgets = plan.default_budgets;
    if (config.trials <= 0) config.trials = plan.default_trials;
    for (long n : config.budgets) {
        if (n < 1) throw Error("run_experiment: budgets must be positive");
    }

    TrialSummary summary;
    summary.experiment = config.experiment;
    summary.seed = config.seed;

    std::vector<TrialRecord> all_records;
    all_records.reserve(config.strategies.size() * config.budgets.size() *
                        static_cast<std::size_t>(config.trials));

    for (std::size_t si = 0; si < config.strategies.size(); ++si) {
        const std::string& strategy = config.strategies[si];
        for (std::size_t ni = 0; ni < config.budgets.size(); ++ni) {
            const long n = config.budgets[ni];
            const auto worker = plan.prepare(strategy, n);
            std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
            // substream key folds the budget index in with the strategy so
            // every cell sees independent randomness
            const std::uint64_t strategy_key = si * 1000003ull + ni;
            parallel_for(config.trials, config.threads, [&](long t) {
                RngStream rng = derive_stream(config.seed, config.experiment,
                                              static_cast<std::uint64_t>(t), strategy_key);
                TrialRecord rec = worker(t, rng, nullptr);
                rec.trial = t;
                rec.strategy = strategy;
                rec.n = n;
                records[static_cast<std::size_t>(t)] = std::move(rec);
            });
            summary.cells[strategy][n] = summarize(records);
            for (auto& rec : records) all_records.push_back(std::move(rec));

            if (config.dump_particles && !config.out_dir.empty()) {
                namespace fs = std::filesystem;
                fs::create_directories(config.out_dir + "/particles");
                std::string name = strategy;
                for (auto& c : name) {
                    if (c == ':' || c == '/') c = '_';
                }
                std::ofstream csv(config.out_dir + "/particles/" + name + "_n" +
                                  std::to_string(n) + ".csv");
                RngStream rng = derive_stream(config.seed, config.experiment, 0, strategy_key);
                if (plan.custom_dump) {
                    plan.custom_dump(strategy, n, rng, csv);
                } else {
                    WeightedParticles particles;
                    worker(0, rng, &particles);
                    write_particles_csv(csv, particles);
                }
            }
        }
    }

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        {
            std::ofstream trials_out(config.out_dir + "/trials.jsonl");
            for (const auto& rec : all_records) {
                trials_out << trial_record_to_json(rec).dump() << '\n';
            }
        }
        {
            std::ofstream summary_out(config.out_dir + "/summary.json");
            summary_out << summary_to_json(summary, config).dump(2) << '\n';
        }
    }
    return summary;
}

json oracle_report(const std::string& experiment) {
    json j;
    j["experiment"] = experiment;
    if (experiment == "two-param") {
        const DiscreteProblem problem = builtin::two_param();
        const TargetFunction f = targets::indicator_value(problem.values()[0]);
        const Eigen::VectorXd exact = exact_posterior(problem);
        j["exact_posterior"] = {exact[0], exact[1]};
        j["f_bar"] = posterior_expectation(problem, f);
        j["evidence"] = problem.evidence();
        json per_kind = json::object();
        const Eigen::VectorXd rejection = Eigen::VectorXd::Constant(2, 0.5);
        const double var_rejection = delta_method_variance_coefficient(problem, f, rejection);
        for (const std::string token : {"mse-opt", "ess-opt", "unnorm-opt", "ibs", "prior",
                                        "posterior", "uniform"}) {
            const Eigen::VectorXd props =
                optimal_proportions(problem, AllocationKind::from_token(token, f));
            const double var = delta_method_variance_coefficient(problem, f, props);
            per_kind[token] = {{"proportions", {props[0], props[1]}},
                               {"variance_times_n", var},
                               {"efficiency_vs_rejection", var_rejection / var}};
        }
        j["rejection_variance_times_n"] = var_rejection;
        j["allocations"] = per_kind;
    } else if (experiment == "discrete-gaussian") {
        const DiscreteProblem problem = builtin::discrete_gaussian();
        j["posterior_mean"] = posterior_expectation(problem, targets::coordinate());
        j["posterior_second_moment"] = posterior_expectation(problem, targets::second_moment());
        j["posterior_ci95_mass"] =
            posterior_expectation(problem, targets::indicator_abs_below(2.0));
    } else if (experiment == "adaptive") {
        const DiscreteProblem problem = builtin::ten_point();
        const TargetFunction f = targets::coordinate();
        j["f_bar"] = posterior_expectation(problem, f);
        j["evidence"] = problem.evidence();
        const Eigen::VectorXd opt = optimal_proportions(problem, AllocationKind::mse_optimal(f));
        j["optimal_variance_times_n"] = delta_method_variance_coefficient(problem, f, opt);
        j["prior_variance_times_n"] =
            delta_method_variance_coefficient(problem, f, problem.prior());
    } else if (experiment == "continuous") {
        const ContinuousProblem problem = builtin::laplace_line();
        const TargetFunction f = targets::coordinate();
        j["evidence"] = evidence(problem);
        j["f_bar"] = posterior_expectation(problem, f);
        const Problem generic{problem};
        json per_density = json::object();
        for (const std::string token : {"prior", "posterior", "ess-opt", "targeted"}) {
            ImportanceDensity q =
                token == "prior" ? prior_density(generic)
                : token == "posterior" ? posterior_density(generic)
                : token == "ess-opt" ? ess_optimal_density(generic)
                                      : targeted_density(generic, f, posterior_expectation(problem, f));
            const VarianceResult var = independent_sampling_variance(problem, q, f, 1);
            per_density[token] = {{"variance_times_n", number_or_inf(var.value)},
                                  {"converged", var.converged}};
        }
        j["independent_sampling_variance_times_n"] = per_density;
    } else if (experiment == "kde") {
        const ContinuousProblem problem = builtin::unit_ramp();
        const TargetFunction f = targets::indicator_below(0.5);
        j["evidence"] = evidence(problem);
        j["truth"] = posterior_expectation(problem, f);
    } else if (experiment == "model-selection") {
        const ContinuousProblem problem = builtin::two_model();
        const TargetFunction f = targets::indicator_model(0, "1[M=1]");
        const double truth = posterior_expectation(problem, f);
        j["evidence"] = evidence(problem);
        j["posterior_model1"] = truth;
        const Problem generic{problem};
        const auto mass_m1 = [](const ImportanceDensity& q) { return q.grid().model_mass(0); };
        j["sim_mass_m1_ess_opt"] = mass_m1(ess_optimal_density(generic));
        j["sim_mass_m1_targeted"] = mass_m1(targeted_density(generic, f, truth));
    } else if (experiment == "smc") {
        const EllipsoidPosterior post = ellipsoid_true_posterior();
        j["posterior_mean"] = {post.mean[0], post.mean[1]};
        j["posterior_covariance"] = {{post.covariance(0, 0), post.covariance(0, 1)},
                                     {post.covariance(1, 0), post.covariance(1, 1)}};
        j["normalizer"] = post.normalizer;
    } else {
        throw Error("unknown experiment '" + experiment + "'");
    }
    return j;
}

}  // namespace lfi
