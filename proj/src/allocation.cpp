#include "lfi/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lfi {

AllocationKind AllocationKind::from_token(const std::string& token,
                                          std::optional<TargetFunction> f) {
    if (token == "mse-opt") {
        if (!f) throw Error("allocation kind mse-opt requires a target function");
        return mse_optimal(std::move(*f));
    }
    if (token == "ess-opt") return of(Type::EssOptimal);
    if (token == "unnorm-opt") return of(Type::UnnormalizedMseOptimal);
    if (token == "ibs") return of(Type::InverseBinomial);
    if (token == "prior") return of(Type::Prior);
    if (token == "posterior") return of(Type::Posterior);
    if (token == "uniform") return of(Type::Uniform);
    throw Error("unknown allocation kind token '" + token + "'");
}

std::string AllocationKind::token() const {
    switch (type) {
        case Type::MseOptimal: return "mse-opt";
        case Type::EssOptimal: return "ess-opt";
        case Type::UnnormalizedMseOptimal: return "unnorm-opt";
        case Type::InverseBinomial: return "ibs";
        case Type::Prior: return "prior";
        case Type::Posterior: return "posterior";
        case Type::Uniform: return "uniform";
    }
    return "?";
}

namespace {

// Per-parameter numerators pi_i^2 p_i (1-p_i) (f_i - f_bar)^2 of the
// asymptotic variance, before dividing by n_i and p(x*)^2.
Eigen::ArrayXd variance_coefficients(const DiscreteProblem& problem, const Eigen::VectorXd& f_values,
                                     double f_bar) {
    const Eigen::ArrayXd prior = problem.prior().array();
    const Eigen::ArrayXd like = problem.likelihood().array();
    return prior.square() * like * (1.0 - like) * (f_values.array() - f_bar).square();
}

}  // namespace

double delta_method_variance_coefficient(const DiscreteProblem& problem, const TargetFunction& f,
                                         const Eigen::VectorXd& proportions) {
    if (proportions.size() != problem.size()) throw Error("delta_method_variance: size mismatch");
    const Eigen::VectorXd f_values = evaluate_on_grid(problem, f);
    const double f_bar = f_values.dot(exact_posterior(problem));
    const Eigen::ArrayXd coeff = variance_coefficients(problem, f_values, f_bar);
    double sum = 0.0;
    for (int i = 0; i < problem.size(); ++i) {
        if (coeff[i] == 0.0) continue;
        if (proportions[i] <= 0.0) return std::numeric_limits<double>::infinity();
        sum += coeff[i] / proportions[i];
    }
    const double z = problem.evidence();
    return sum / (z * z);
}

double delta_method_variance(const DiscreteProblem& problem, const TargetFunction& f,
                             const AllocationPlan& plan) {
    if (plan.counts.size() != problem.size()) throw Error("delta_method_variance: size mismatch");
    return delta_method_variance_coefficient(
        problem, f, plan.counts.cast<double>() / static_cast<double>(plan.budget)) /
        static_cast<double>(plan.budget);
}

Eigen::VectorXd optimal_proportions(const DiscreteProblem& problem, const AllocationKind& kind) {
    const Eigen::ArrayXd prior = problem.prior().array();
    const Eigen::ArrayXd like = problem.likelihood().array();
    Eigen::ArrayXd raw;
    switch (kind.type) {
        case AllocationKind::Type::MseOptimal: {
            if (!kind.target) throw Error("optimal_proportions: MseOptimal needs a target function");
            const Eigen::VectorXd f_values = evaluate_on_grid(problem, *kind.target);
            const double f_bar = f_values.dot(exact_posterior(problem));
            raw = prior * (like * (1.0 - like)).sqrt() * (f_values.array() - f_bar).abs();
            if (raw.sum() <= 0.0) {
                throw DegenerateTargetError(
                    "optimal_proportions: target is constant on the support; all proportions vanish");
            }
            break;
        }
        case AllocationKind::Type::EssOptimal:
            raw = prior * like.sqrt();
            break;
        case AllocationKind::Type::UnnormalizedMseOptimal:
            raw = prior * (like * (1.0 - like)).sqrt();
            break;
        case AllocationKind::Type::InverseBinomial:
            if ((like <= 0.0).any()) {
                throw Error("optimal_proportions: inverse binomial undefined with zero likelihoods");
            }
            raw = 1.0 / like;
            break;
        case AllocationKind::Type::Prior:
            raw = prior;
            break;
        case AllocationKind::Type::Posterior:
            raw = exact_posterior(problem).array();
            break;
        case AllocationKind::Type::Uniform:
            raw = Eigen::ArrayXd::Constant(problem.size(), 1.0);
            break;
    }
    const double total = raw.sum();
    if (total <= 0.0) throw DegenerateTargetError("optimal_proportions: proportions vanish");
    return (raw / total).matrix();
}

AllocationPlan integerize(const Eigen::VectorXd& proportions, long budget, int min_count) {
    const long k = proportions.size();
    if ((proportions.array() < 0.0).any() || std::abs(proportions.sum() - 1.0) > 1e-9) {
        throw Error("integerize: proportions must be nonnegative and sum to 1 within 1e-9");
    }
    long floor_total = 0;
    long positive = 0;
    for (long i = 0; i < k; ++i) {
        if (proportions[i] > 0.0) {
            floor_total += min_count;
            ++positive;
        }
    }
    if (floor_total > budget) {
        throw InfeasibleAllocationError("integerize: budget " + std::to_string(budget) +
                                        " cannot give " + std::to_string(min_count) + " to " +
                                        std::to_string(positive) + " parameters");
    }

    // Largest-remainder rounding on the budget left after floors.
    const long free_budget = budget - floor_total;
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    std::vector<std::pair<double, long>> remainders;
    remainders.reserve(static_cast<std::size_t>(k));
    long assigned = 0;
    for (long i = 0; i < k; ++i) {
        const double ideal = proportions[i] * static_cast<double>(free_budget);
        const long base = static_cast<long>(std::floor(ideal));
        counts[i] = static_cast<int>(base);
        assigned += base;
        remainders.emplace_back(ideal - static_cast<double>(base), i);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // ties to the lowest index
    });
    for (long r = 0; r < free_budget - assigned; ++r) {
        counts[remainders[static_cast<std::size_t>(r)].second] += 1;
    }
    if (min_count > 0) {
        for (long i = 0; i < k; ++i) {
            if (proportions[i] > 0.0) counts[i] += min_count;
        }
    }
    return {counts, budget};
}

CountTable simulate_counts(const DiscreteProblem& problem, const AllocationPlan& plan,
                           RngStream& rng) {
    if (plan.counts.size() != problem.size()) throw Error("simulate_counts: size mismatch");
    CountTable table;
    table.n = plan.counts;
    table.n_star = Eigen::VectorXi::Zero(problem.size());
    for (int i = 0; i < problem.size(); ++i) {
        const double p = problem.likelihood()[i];
        int hits = 0;
        for (int j = 0; j < plan.counts[i]; ++j) hits += rng.bernoulli(p) ? 1 : 0;
        table.n_star[i] = hits;
    }
    return table;
}

VarianceEstimate estimate_variance(const CountTable& counts, const DiscreteProblem& problem,
                                   const TargetFunction& f) {
    counts.validate();
    if (counts.n.size() != problem.size()) throw Error("estimate_variance: size mismatch");
    if ((counts.n.array() < 1).any()) {
        throw UndefinedLikelihoodError("estimate_variance: every parameter needs n_i >= 1");
    }
    const Eigen::ArrayXd p_hat = counts.n_star.cast<double>().array() / counts.n.cast<double>().array();
    const Eigen::ArrayXd prior = problem.prior().array();
    const double z_hat = (prior * p_hat).sum();

    VarianceEstimate out;
    if (z_hat <= 0.0) {
        out.degenerate = true;
        return out;
    }
    const Eigen::VectorXd f_values = evaluate_on_grid(problem, f);
    const double f_bar_hat = (f_values.array() * prior * p_hat).sum() / z_hat;
    double sum = 0.0;
    for (int i = 0; i < problem.size(); ++i) {
        const double dev = f_values[i] - f_bar_hat;
        const double coeff = prior[i] * prior[i] * p_hat[i] * (1.0 - p_hat[i]) * dev * dev;
        sum += coeff / static_cast<double>(counts.n[i]);
    }
    out.value = sum / (z_hat * z_hat);
    out.degenerate = (p_hat > 0.0).count() <= 1;
    return out;
}

namespace {

// Close the gap between performed counts and the cumulative target,
// assigning exactly `round_budget` new simulations; parameters already over
// target get nothing and their deficit goes proportionally to the rest.
Eigen::VectorXi assign_round(const Eigen::VectorXd& target_props, const Eigen::VectorXi& done,
                             long cumulative_target, long round_budget) {
    const long k = done.size();
    Eigen::VectorXd gap(k);
    double gap_total = 0.0;
    for (long i = 0; i < k; ++i) {
        const double desired = target_props[i] * static_cast<double>(cumulative_target);
        gap[i] = std::max(0.0, desired - static_cast<double>(done[i]));
        gap_total += gap[i];
    }
    if (gap_total <= 0.0) {
        return integerize(target_props, round_budget).counts;
    }
    return integerize(gap / gap_total, round_budget).counts;
}

}  // namespace

AdaptiveResult adaptive_allocate(const DiscreteProblem& problem, const TargetFunction& f,
                                 long budget, int rounds, RngStream& rng, AdaptiveTarget target) {
    const int k = problem.size();
    if (rounds < 2) throw Error("adaptive_allocate: needs at least two rounds");
    if (budget < static_cast<long>(rounds) * k) {
        throw Error("adaptive_allocate: budget must be at least rounds * k");
    }

    const double floor_term = 1.0 / std::sqrt(static_cast<double>(budget));
    const Eigen::VectorXd f_values = evaluate_on_grid(problem, f);
    const Eigen::ArrayXd prior = problem.prior().array();

    CountTable table;
    table.n = Eigen::VectorXi::Zero(k);
    table.n_star = Eigen::VectorXi::Zero(k);

    const auto run_round = [&](const Eigen::VectorXi& counts) {
        for (int i = 0; i < k; ++i) {
            const double p = problem.likelihood()[i];
            int hits = 0;
            for (int j = 0; j < counts[i]; ++j) hits += rng.bernoulli(p) ? 1 : 0;
            table.n[i] += counts[i];
            table.n_star[i] += hits;
        }
    };

    for (int m = 1; m <= rounds; ++m) {
        const long cumulative_target = budget * m / rounds;
        const long round_budget = cumulative_target - table.n.cast<long>().sum();
        if (round_budget <= 0) continue;

        Eigen::VectorXd props;
        if (m == 1) {
            props = problem.prior();
        } else {
            // Estimated MSE-optimal proportions from all past simulations,
            // with the 1/sqrt(N) floor added to the relative proportions.
            const Eigen::ArrayXd p_hat =
                table.n_star.cast<double>().array() /
                table.n.cast<double>().array().max(1.0);
            const double z_hat = (prior * p_hat).sum();
            Eigen::ArrayXd raw;
            if (z_hat > 0.0) {
                if (target == AdaptiveTarget::PosteriorProportions) {
                    raw = prior * p_hat / z_hat;
                } else {
                    const double f_bar_hat = (f_values.array() * prior * p_hat).sum() / z_hat;
                    raw = prior * (p_hat * (1.0 - p_hat)).sqrt() *
                          (f_values.array() - f_bar_hat).abs();
                }
            } else {
                raw = Eigen::ArrayXd::Zero(k);  // nothing accepted yet; fall back to the prior
            }
            if (raw.sum() > 0.0) {
                raw /= raw.sum();
            } else {
                raw = prior;
            }
            raw += floor_term;
            props = (raw / raw.sum()).matrix();
        }
        run_round(assign_round(props, table.n, cumulative_target, round_budget));
    }

    AdaptiveResult out;
    out.counts = table;
    if (table.n_star.sum() == 0) {
        out.degenerate = true;
        return out;
    }
    const Eigen::VectorXd posterior_hat = mle_posterior(table, problem);
    out.estimate = f_values.dot(posterior_hat);
    const VarianceEstimate var = estimate_variance(table, problem, f);
    out.variance_estimate = var.value;
    out.degenerate = var.degenerate;
    return out;
}

}  // namespace lfi
