#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "lfi/estimators.hpp"
#include "lfi/problems.hpp"

namespace lfi {

/// Integer simulation counts per discrete parameter, summing to the budget.
struct AllocationPlan {
    Eigen::VectorXi counts;
    long budget = 0;
};

/// Strategy for distributing simulations across a discrete grid.
struct AllocationKind {
    enum class Type {
        MseOptimal,             // n_i ~ pi_i sqrt(p_i (1-p_i)) |f_i - f_bar|
        EssOptimal,             // n_i ~ pi_i sqrt(p_i)
        UnnormalizedMseOptimal, // n_i ~ pi_i sqrt(p_i (1-p_i))
        InverseBinomial,        // n_i ~ 1 / p_i
        Prior,                  // n_i ~ pi_i
        Posterior,              // n_i ~ p(theta_i | x*)
        Uniform,                // n_i ~ 1/k
    };

    Type type = Type::Prior;
    std::optional<TargetFunction> target;  // required for MseOptimal

    static AllocationKind mse_optimal(TargetFunction f) {
        return {Type::MseOptimal, std::move(f)};
    }
    static AllocationKind of(Type t) { return {t, std::nullopt}; }

    /// CLI tokens: mse-opt, ess-opt, unnorm-opt, ibs, prior, posterior, uniform.
    static AllocationKind from_token(const std::string& token,
                                     std::optional<TargetFunction> f = std::nullopt);
    std::string token() const;
};

/// Asymptotic variance of the plug-in expectation estimate for a given plan:
///   p(x*)^{-2} sum_i pi_i^2 p_i (1 - p_i) (f_i - f_bar)^2 / n_i.
/// Returns +infinity when a term with positive coefficient has n_i = 0.
double delta_method_variance(const DiscreteProblem& problem, const TargetFunction& f,
                             const AllocationPlan& plan);

/// Same formula with real-valued proportions c_i = n_i / N; returns the
/// coefficient of 1/N (i.e. variance times N).
double delta_method_variance_coefficient(const DiscreteProblem& problem, const TargetFunction& f,
                                         const Eigen::VectorXd& proportions);

/// Closed-form optimal proportions for each allocation kind; nonnegative,
/// summing to one.
Eigen::VectorXd optimal_proportions(const DiscreteProblem& problem, const AllocationKind& kind);

/// Largest-remainder rounding of proportions to integer counts summing to N;
/// ties break toward the lowest index. When min_count > 0, every parameter
/// with positive proportion receives at least min_count simulations.
AllocationPlan integerize(const Eigen::VectorXd& proportions, long budget, int min_count = 0);

/// Run the plan against the simulation oracle: n_i* ~ Binomial(n_i, p_i*).
CountTable simulate_counts(const DiscreteProblem& problem, const AllocationPlan& plan,
                           RngStream& rng);

struct VarianceEstimate {
    double value = 0.0;
    bool degenerate = false;  // plug-in posterior concentrated on a single atom
};

/// Delta-method variance with p_i* and f_bar replaced by their plug-in
/// estimates from the observed counts.
VarianceEstimate estimate_variance(const CountTable& counts, const DiscreteProblem& problem,
                                   const TargetFunction& f);

struct AdaptiveResult {
    double estimate = 0.0;
    CountTable counts;
    double variance_estimate = 0.0;
    bool degenerate = false;  // no acceptances anywhere
};

/// Per-round re-estimated proportions: the MSE-optimal rule, or the plug-in
/// posterior (the adapt-to-the-posterior baseline).
enum class AdaptiveTarget { MseOptimal, PosteriorProportions };

/// Multi-round allocator: round 1 follows the prior; each later round
/// re-estimates the target proportions from all past simulations, adds a
/// 1/sqrt(N) floor to the relative proportions, and assigns the round's
/// simulations to close the gap to the cumulative target (never
/// un-assigning; deficits are redistributed proportionally).
AdaptiveResult adaptive_allocate(const DiscreteProblem& problem, const TargetFunction& f,
                                 long budget, int rounds, RngStream& rng,
                                 AdaptiveTarget target = AdaptiveTarget::MseOptimal);

}  // namespace lfi
