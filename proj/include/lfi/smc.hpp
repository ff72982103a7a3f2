#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "lfi/problems.hpp"

namespace lfi {

/// Two-parameter problem with uniform prior on [-50, 50]^2 and continuous
/// data y ~ Normal(m(theta), 1), m(theta) = (theta1 - 2 theta2)^2 +
/// (theta2 - 4)^2; the discrepancy is |y| and y* = 0. The exact posterior
/// is available in closed form.
class EllipsoidProblem {
public:
    static constexpr double kLower = -50.0;
    static constexpr double kUpper = 50.0;

    double discrepancy_mean(const Eigen::Vector2d& theta) const {
        const double u1 = theta[0] - 2.0 * theta[1];
        const double u2 = theta[1] - 4.0;
        return u1 * u1 + u2 * u2;
    }

    /// |y| with y ~ Normal(m(theta), 1).
    double simulate_discrepancy(const Eigen::Vector2d& theta, RngStream& rng) const {
        return std::abs(rng.normal(discrepancy_mean(theta), 1.0));
    }

    /// P(|y| < eps | theta) = Phi(eps - m) - Phi(-eps - m).
    double acceptance_probability(const Eigen::Vector2d& theta, double eps) const;

    bool contains(const Eigen::Vector2d& theta) const {
        return theta[0] >= kLower && theta[0] <= kUpper && theta[1] >= kLower && theta[1] <= kUpper;
    }

    Eigen::Vector2d sample_prior(RngStream& rng) const {
        return {rng.uniform(kLower, kUpper), rng.uniform(kLower, kUpper)};
    }

    double prior_density() const { return 1.0 / ((kUpper - kLower) * (kUpper - kLower)); }
};

struct SmcConfig {
    enum class Kernel { LocalMvn, UniformBox };

    std::vector<double> epsilon_schedule;  // strictly decreasing
    Kernel kernel = Kernel::LocalMvn;
    double mvn_scale = 2.0;        // kernel covariance = scale * weighted cov of accepted
    double box_scale = 0.5;        // box width = scale * component-wise range of accepted
    long total_budget = 34000;
    std::optional<long> per_round_acceptances;  // if set, run each round to this many acceptances
    // Otherwise the budget is split across rounds, with round 1 (rejection
    // from the broad prior, by far the lowest acceptance rate) taking
    // first_round_fraction of it and the rest shared equally.
    double first_round_fraction = 0.5;

    static std::vector<double> slow_schedule() { return {30, 16, 6, 5, 4, 3, 2, 1}; }
    static std::vector<double> fast_schedule() { return {30, 5, 1}; }
};

struct SmcParticle {
    Eigen::Vector2d theta;
    double weight = 0.0;       // p(theta) / q_k(theta)
    double discrepancy = 0.0;  // |y|
};

struct SmcRound {
    double epsilon = 0.0;
    long n_sims = 0;
    long n_acc = 0;
    std::vector<SmcParticle> accepted;
};

struct SmcRun {
    std::vector<SmcRound> rounds;
    long total_sims = 0;
    bool stopped_early = false;  // a round produced zero acceptances
};

/// Kernel state of one round's proposal mixture, exposed for testing.
struct ProposalMixture {
    SmcConfig::Kernel kernel = SmcConfig::Kernel::LocalMvn;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();  // LocalMvn
    Eigen::Vector2d box_width = Eigen::Vector2d::Ones();       // UniformBox
    std::vector<Eigen::Vector2d> support_points;
    std::vector<double> weights;  // normalized

    double density(const Eigen::Vector2d& theta) const;
    Eigen::Vector2d sample(RngStream& rng) const;
};

ProposalMixture build_proposal(const std::vector<SmcParticle>& previous, const SmcConfig& config);

/// Multi-round ABC with the configured kernel and schedule. Round 1 is
/// rejection sampling from the prior; later rounds resample-and-perturb the
/// previous round's particles, with proposals outside the prior redrawn.
SmcRun run_smc(const EllipsoidProblem& problem, const SmcConfig& config, RngStream& rng);

/// Weighted mean of a function over one round's particles at threshold eps.
std::optional<double> round_estimate(const SmcRound& round, double eps,
                                     const std::function<double(const Eigen::Vector2d&)>& f);

/// Combine every round's estimate at the final threshold, each weighted by
/// that round's effective sample size at the final threshold. Rounds with no
/// qualifying particles contribute nothing.
std::optional<double> all_rounds_estimate(const SmcRun& run,
                                          const std::function<double(const Eigen::Vector2d&)>& f);

/// ESS of the final round's particles / of all qualifying particles across
/// rounds with combined weights alpha_k p/q_k.
double final_round_ess(const SmcRun& run);
double all_rounds_ess(const SmcRun& run);

/// Weighted mean/covariance over qualifying particles; all-rounds variant
/// uses the alpha_k-combined weights.
struct PosteriorMoments {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    bool valid = false;
};
PosteriorMoments final_round_moments(const SmcRun& run);
PosteriorMoments all_rounds_moments(const SmcRun& run);

struct EllipsoidPosterior {
    Eigen::Vector2d mean;
    Eigen::Matrix2d covariance;
    double normalizer = 0.0;
};

/// Closed-form posterior: mean (8, 4), covariance (2 pi)^{-1/2} [[5,2],[2,1]],
/// normalizer sqrt(pi^3 / 2).
EllipsoidPosterior ellipsoid_true_posterior();

/// Covariance of the eps-tolerance ABC posterior by seeded importance
/// sampling with 10^7 prior draws, cached on disk keyed by eps. An empty
/// cache path disables caching.
Eigen::Matrix2d abc_covariance_reference(double eps,
                                         const std::string& cache_path = "abc_reference_cache.json",
                                         long draws = 10000000);

/// Per-round particle dump: theta1,theta2,weight,discrepancy,round.
void write_smc_csv(std::ostream& out, const SmcRun& run);

}  // namespace lfi
