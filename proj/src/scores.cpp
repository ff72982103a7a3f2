#include "lfi/scores.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

namespace lfi {

double squared_error(double estimate, double truth) {
    const double d = estimate - truth;
    return d * d;
}

double squared_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size()) throw Error("squared_error: dimension mismatch");
    return (estimate - truth).squaredNorm();
}

double effective_sample_size(const Eigen::VectorXd& weights) {
    if ((weights.array() < 0.0).any()) throw Error("effective_sample_size: negative weight");
    const double total = weights.sum();
    if (total <= 0.0) throw ZeroTotalWeightError("effective_sample_size: all weights are zero");
    return total * total / weights.squaredNorm();
}

double effective_sample_size(const WeightedParticles& particles) {
    double total = 0.0;
    double total_sq = 0.0;
    for (const auto& e : particles) {
        total += e.weight;
        total_sq += e.weight * e.weight;
    }
    if (total <= 0.0) throw ZeroTotalWeightError("effective_sample_size: all weights are zero");
    return total * total / total_sq;
}

namespace {

void check_distribution_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw Error("divergence: length mismatch");
    if (std::abs(a.sum() - 1.0) > 1e-9 || std::abs(b.sum() - 1.0) > 1e-9) {
        throw Error("divergence: inputs must sum to 1 within 1e-9");
    }
    if ((a.array() < 0.0).any() || (b.array() < 0.0).any()) {
        throw Error("divergence: negative probabilities");
    }
}

}  // namespace

double kl_divergence(const Eigen::VectorXd& q_hat, const Eigen::VectorXd& q) {
    check_distribution_pair(q_hat, q);
    double kl = 0.0;
    for (long i = 0; i < q.size(); ++i) {
        if (q_hat[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += q_hat[i] * std::log(q_hat[i] / q[i]);
    }
    return kl;
}

double phi_quadratic_approx(const Eigen::VectorXd& q_hat, const Eigen::VectorXd& q,
                            double phi_second_deriv_at_1) {
    check_distribution_pair(q_hat, q);
    double sum = 0.0;
    for (long i = 0; i < q.size(); ++i) {
        const double d = q_hat[i] - q[i];
        if (q[i] == 0.0) {
            if (d != 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        sum += d * d / q[i];
    }
    return 0.5 * phi_second_deriv_at_1 * sum;
}

ScoreReport score_battery(const WeightedParticles& particles, const Problem& problem,
                          const TargetFunction& f, double truth) {
    ScoreReport report;
    report.acceptance_rate =
        particles.empty() ? 0.0
                          : static_cast<double>(particles.accepted_count()) /
                                static_cast<double>(particles.size());
    try {
        report.mse = squared_error(weighted_expectation(particles, f), truth);
        report.ess = effective_sample_size(particles);
    } catch (const ZeroTotalWeightError&) {
        report.degenerate = true;
    }
    if (const auto* discrete = std::get_if<DiscreteProblem>(&problem)) {
        try {
            const Eigen::VectorXd q_hat = weighted_posterior(particles, *discrete);
            const Eigen::VectorXd q = exact_posterior(*discrete);
            report.kl = kl_divergence(q_hat, q);
            report.kl_quadratic = phi_quadratic_approx(q_hat, q, 1.0);
        } catch (const ZeroTotalWeightError&) {
            report.degenerate = true;
        }
    }
    return report;
}

namespace {

nlohmann::json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

nlohmann::json score_report_to_json(const ScoreReport& report) {
    nlohmann::json j;
    j["acceptance_rate"] = report.acceptance_rate;
    j["n_trials"] = report.n_trials;
    j["degenerate"] = report.degenerate;
    if (report.mse) j["mse"] = number_or_inf(*report.mse);
    if (report.ess) j["ess"] = number_or_inf(*report.ess);
    if (report.kl) j["kl"] = number_or_inf(*report.kl);
    if (report.kl_quadratic) j["kl_quadratic"] = number_or_inf(*report.kl_quadratic);
    return j;
}

}  // namespace lfi
