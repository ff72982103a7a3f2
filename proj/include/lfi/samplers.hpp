#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

#include "lfi/allocation.hpp"
#include "lfi/estimators.hpp"
#include "lfi/grid_density.hpp"
#include "lfi/problems.hpp"

namespace lfi {

/// Distribution over simulation parameters: a pmf over a discrete grid or a
/// grid-tabulated continuous density with an inverse-CDF sampler. Weighting
/// always uses the same (normalized) density the sampler draws from.
class ImportanceDensity {
public:
    static ImportanceDensity discrete(const DiscreteProblem& problem, Eigen::VectorXd pmf,
                                      std::string label);
    static ImportanceDensity continuous(GridDensity grid,
                                        std::function<double(const Parameter&)> unnormalized,
                                        std::string label);

    bool is_discrete() const { return grid_ == nullptr; }
    const std::string& label() const { return label_; }

    /// Normalized density (pmf value for the discrete case).
    double density(const Parameter& p) const;
    /// Unnormalized analytic form (shape checks, variance integrands).
    double unnormalized(const Parameter& p) const;

    Parameter sample(RngStream& rng) const;
    /// Discrete case: grid index of a draw.
    int sample_index(RngStream& rng) const;

    const GridDensity& grid() const;
    const Eigen::VectorXd& pmf() const { return pmf_; }

private:
    ImportanceDensity() = default;

    std::shared_ptr<const GridDensity> grid_;
    std::function<double(const Parameter&)> unnormalized_;
    Eigen::VectorXd pmf_;      // discrete case, normalized
    Eigen::VectorXd cdf_;      // discrete case
    Eigen::VectorXd values_;   // discrete case, grid coordinates
    std::string label_;
};

/// theta_i ~ prior i.i.d.; weight 1 if accepted, 0 otherwise. Zero
/// acceptances is a legitimate outcome, not an error.
WeightedParticles rejection_sampling(const Problem& problem, long n, RngStream& rng);

/// theta_i ~ q i.i.d.; accepted particles carry weight p(theta_i)/q(theta_i).
WeightedParticles importance_sampling(const Problem& problem, const ImportanceDensity& q, long n,
                                      RngStream& rng);

ImportanceDensity prior_density(const Problem& problem);
ImportanceDensity posterior_density(const Problem& problem);

/// q ~ p(theta) sqrt(p(x*|theta)); maximizes the asymptotic effective
/// sample size.
ImportanceDensity ess_optimal_density(const Problem& problem);

/// q ~ p(theta) sqrt(p(x*|theta)) |f(theta) - f_bar|; minimizes the
/// asymptotic MSE under independent sampling. f_bar is supplied by the
/// caller (exact oracle or pilot estimate).
ImportanceDensity targeted_density(const Problem& problem, const TargetFunction& f, double f_bar);

/// q ~ p(theta) sqrt(p(x*|theta)(1 - p(x*|theta))) |f(theta) - f_bar|; the
/// base density whose equal-probability strata make one-draw-per-stratum
/// sampling optimal.
ImportanceDensity stratified_targeted_density(const Problem& problem, const TargetFunction& f,
                                              double f_bar);

struct VarianceResult {
    double value = 0.0;
    bool converged = true;
};

/// Asymptotic variance of the self-normalized estimate under independent
/// sampling from q:
///   (N p(x*)^2)^{-1} int (f - f_bar)^2 p(theta)^2 / q(theta) p(x*|theta) dtheta.
VarianceResult independent_sampling_variance(const ContinuousProblem& problem,
                                             const ImportanceDensity& q, const TargetFunction& f,
                                             long n);

/// K + 1 stratum boundaries of equal probability under a 1-D base density.
struct StrataSpec {
    Eigen::VectorXd boundaries;
    int per_stratum = 1;
};
StrataSpec equal_mass_strata(const ImportanceDensity& base, int strata);

struct StratifiedResult {
    double estimate = 0.0;
    WeightedParticles particles;  // weights p / (K q), for reuse by other estimators
};

/// One draw from each of K = n equal-probability strata of the base density;
/// returns the stratified ratio estimate sum_k R_k / sum_k S_k.
StratifiedResult stratified_sampling(const ContinuousProblem& problem, const ImportanceDensity& base,
                                     long n, RngStream& rng, const TargetFunction& f);

/// Stratified-variance approximation, for diagnostics only (the
/// simplification behind it is informal).
double stratified_variance_diagnostic(const ContinuousProblem& problem,
                                      const ImportanceDensity& base, const TargetFunction& f, long n);

}  // namespace lfi
