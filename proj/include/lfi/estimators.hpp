#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "lfi/problems.hpp"

namespace lfi {

/// One simulation record: parameter, importance weight, provenance.
struct ParticleEntry {
    Parameter theta;
    double weight = 0.0;
    int round = 0;
    bool accepted = false;
};

/// Sequence of (parameter, weight) pairs with provenance metadata.
/// Rejected entries always carry weight zero.
class WeightedParticles {
public:
    WeightedParticles() = default;

    void reserve(std::size_t n) { entries_.reserve(n); }

    void add(Parameter theta, double weight, bool accepted, int round = 0) {
        if (!accepted) weight = 0.0;
        if (!std::isfinite(weight) || weight < 0.0) {
            throw Error("WeightedParticles: weights must be finite and nonnegative");
        }
        entries_.push_back({std::move(theta), weight, round, accepted});
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const ParticleEntry& operator[](std::size_t i) const { return entries_[i]; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    Eigen::VectorXd weights() const;
    double total_weight() const;
    long accepted_count() const;

private:
    std::vector<ParticleEntry> entries_;
};

/// Per-parameter simulation counts n_i and acceptance counts n_i*.
struct CountTable {
    Eigen::VectorXi n;
    Eigen::VectorXi n_star;

    long total() const { return n.cast<long>().sum(); }
    void validate() const;
};

/// Self-normalized importance estimate sum w f / sum w.
/// Throws ZeroTotalWeightError when every weight is zero; the caller decides
/// whether to skip the trial or substitute a fallback.
double weighted_expectation(const WeightedParticles& particles, const TargetFunction& f);

/// Empirical posterior mass per grid value of a discrete problem.
Eigen::VectorXd weighted_posterior(const WeightedParticles& particles, const DiscreteProblem& problem);

/// Plug-in posterior from maximum likelihood estimates p_i* ~ n_i*/n_i.
Eigen::VectorXd mle_posterior(const CountTable& counts, const DiscreteProblem& problem);

/// Particles equivalent to a deterministic count table: n_i* accepted entries
/// at theta_i with weight pi_i / n_i each (plus the rejected remainder).
WeightedParticles particles_from_counts(const DiscreteProblem& problem, const CountTable& counts);

struct KernelDiagnostics {
    int underflow_nodes = 0;  // quadrature nodes where the kernel mass vanished
};

/// Nadaraya-Watson likelihood estimate integrated against the prior:
///   p_hat(x*|t) = sum_i a_i K_h(t - theta_i) / sum_i K_h(t - theta_i)
/// with a_i the acceptance indicator and Gaussian kernel K, followed by
/// Gauss-Kronrod quadrature of int f p_hat p / int p_hat p over the support.
/// 1-D single-model problems only.
double kernel_posterior_expectation(const WeightedParticles& particles,
                                    const ContinuousProblem& problem, const TargetFunction& f,
                                    double bandwidth, int quad_order = 20,
                                    KernelDiagnostics* diagnostics = nullptr);

/// CSV with columns theta[,theta2][,model],weight,round,accepted.
void write_particles_csv(std::ostream& out, const WeightedParticles& particles);
WeightedParticles read_particles_csv(std::istream& in);

}  // namespace lfi
