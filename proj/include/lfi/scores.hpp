#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <optional>

#include "lfi/estimators.hpp"
#include "lfi/problems.hpp"

namespace lfi {

/// All quantitative scores computed for one trial. Fields that cannot be
/// computed (degenerate trial) are left empty rather than guessed.
struct ScoreReport {
    std::optional<double> mse;
    double acceptance_rate = 0.0;
    std::optional<double> ess;
    std::optional<double> kl;            // discrete problems only
    std::optional<double> kl_quadratic;  // discrete problems only
    int n_trials = 1;
    bool degenerate = false;
};

double squared_error(double estimate, double truth);
double squared_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

/// (sum w)^2 / sum w^2; throws ZeroTotalWeightError on all-zero weights.
double effective_sample_size(const Eigen::VectorXd& weights);
double effective_sample_size(const WeightedParticles& particles);

/// KL(q_hat | q) = sum q_hat_i log(q_hat_i / q_i), with 0 log 0 = 0 and
/// +infinity where q_hat puts mass outside the support of q.
double kl_divergence(const Eigen::VectorXd& q_hat, const Eigen::VectorXd& q);

/// Quadratic expansion of a phi-divergence around q_hat = q:
/// (phi''(1)/2) sum (q_hat_i - q_i)^2 / q_i.
double phi_quadratic_approx(const Eigen::VectorXd& q_hat, const Eigen::VectorXd& q,
                            double phi_second_deriv_at_1 = 1.0);

/// Fill a ScoreReport from one trial's particles. Estimator failures are
/// reported as flagged (empty) fields, never exceptions.
ScoreReport score_battery(const WeightedParticles& particles, const Problem& problem,
                          const TargetFunction& f, double truth);

/// Serialization; infinities become the JSON string "inf".
nlohmann::json score_report_to_json(const ScoreReport& report);

}  // namespace lfi
