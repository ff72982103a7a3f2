#include "lfi/smc.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lfi {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

double EllipsoidProblem::acceptance_probability(const Eigen::Vector2d& theta, double eps) const {
    const double m = discrepancy_mean(theta);
    return normal_cdf(eps - m) - normal_cdf(-eps - m);
}

double ProposalMixture::density(const Eigen::Vector2d& theta) const {
    double mix = 0.0;
    if (kernel == SmcConfig::Kernel::LocalMvn) {
        const Eigen::Matrix2d inv = covariance.inverse();
        const double norm = 1.0 / (kTwoPi * std::sqrt(covariance.determinant()));
        for (std::size_t j = 0; j < support_points.size(); ++j) {
            const Eigen::Vector2d d = theta - support_points[j];
            mix += weights[j] * norm * std::exp(-0.5 * d.dot(inv * d));
        }
    } else {
        const double norm = 1.0 / (box_width[0] * box_width[1]);
        for (std::size_t j = 0; j < support_points.size(); ++j) {
            const Eigen::Vector2d d = (theta - support_points[j]).cwiseAbs();
            if (d[0] <= 0.5 * box_width[0] && d[1] <= 0.5 * box_width[1]) mix += weights[j] * norm;
        }
    }
    return mix;
}

Eigen::Vector2d ProposalMixture::sample(RngStream& rng) const {
    double u = rng.uniform01();
    std::size_t j = 0;
    while (j + 1 < weights.size() && u >= weights[j]) {
        u -= weights[j];
        ++j;
    }
    const Eigen::Vector2d& center = support_points[j];
    if (kernel == SmcConfig::Kernel::LocalMvn) {
        const Eigen::LLT<Eigen::Matrix2d> llt(covariance);
        const Eigen::Vector2d z{rng.normal(), rng.normal()};
        return center + llt.matrixL() * z;
    }
    return {center[0] + box_width[0] * (rng.uniform01() - 0.5),
            center[1] + box_width[1] * (rng.uniform01() - 0.5)};
}

ProposalMixture build_proposal(const std::vector<SmcParticle>& previous, const SmcConfig& config) {
    if (previous.empty()) throw Error("build_proposal: previous round has no accepted particles");
    ProposalMixture mix;
    mix.kernel = config.kernel;
    double total = 0.0;
    for (const auto& p : previous) total += p.weight;
    if (total <= 0.0) throw ZeroTotalWeightError("build_proposal: previous round weights are zero");

    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : previous) mean += p.weight * p.theta;
    mean /= total;

    mix.support_points.reserve(previous.size());
    mix.weights.reserve(previous.size());
    for (const auto& p : previous) {
        mix.support_points.push_back(p.theta);
        mix.weights.push_back(p.weight / total);
    }

    if (config.kernel == SmcConfig::Kernel::LocalMvn) {
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        for (const auto& p : previous) {
            const Eigen::Vector2d d = p.theta - mean;
            cov += p.weight * d * d.transpose();
        }
        cov *= config.mvn_scale / total;
        // keep the kernel usable when a round collapses to few particles
        const double ridge = std::max(1e-8, 1e-8 * cov.trace());
        cov += ridge * Eigen::Matrix2d::Identity();
        mix.covariance = cov;
    } else {
        Eigen::Vector2d lo = previous.front().theta;
        Eigen::Vector2d hi = previous.front().theta;
        for (const auto& p : previous) {
            lo = lo.cwiseMin(p.theta);
            hi = hi.cwiseMax(p.theta);
        }
        mix.box_width = ((hi - lo) * config.box_scale).cwiseMax(1e-6);
    }
    return mix;
}

SmcRun run_smc(const EllipsoidProblem& problem, const SmcConfig& config, RngStream& rng) {
    const int n_rounds = static_cast<int>(config.epsilon_schedule.size());
    if (n_rounds < 1) throw Error("run_smc: empty epsilon schedule");
    for (int k = 1; k < n_rounds; ++k) {
        if (!(config.epsilon_schedule[k] < config.epsilon_schedule[k - 1])) {
            throw Error("run_smc: epsilon schedule must be strictly decreasing");
        }
    }
    if (config.total_budget < 1) throw Error("run_smc: budget must be positive");

    SmcRun run;
    long remaining = config.total_budget;
    const double prior_pdf = problem.prior_density();

    for (int k = 0; k < n_rounds && remaining > 0; ++k) {
        SmcRound round;
        round.epsilon = config.epsilon_schedule[k];

        ProposalMixture proposal;
        const bool from_prior = (k == 0);
        if (!from_prior) proposal = build_proposal(run.rounds.back().accepted, config);

        long budget_this_round;
        if (config.per_round_acceptances) {
            budget_this_round = remaining;
        } else if (k == 0 && n_rounds > 1) {
            const double frac = std::min(0.95, std::max(0.05, config.first_round_fraction));
            budget_this_round = static_cast<long>(static_cast<double>(remaining) * frac);
            budget_this_round = std::max<long>(1, std::min(remaining, budget_this_round));
        } else {
            const long rounds_left = n_rounds - k;
            budget_this_round = std::min(remaining, remaining / rounds_left +
                                                        (remaining % rounds_left != 0 ? 1 : 0));
        }

        while (budget_this_round > 0) {
            Eigen::Vector2d theta;
            if (from_prior) {
                theta = problem.sample_prior(rng);
            } else {
                int attempts = 0;
                do {
                    theta = proposal.sample(rng);
                    if (++attempts > 1000) {
                        throw Error("run_smc: could not propose inside the prior support");
                    }
                } while (!problem.contains(theta));
            }
            const double discrepancy = problem.simulate_discrepancy(theta, rng);
            ++round.n_sims;
            --budget_this_round;
            --remaining;
            if (discrepancy < round.epsilon) {
                ++round.n_acc;
                const double weight = from_prior ? 1.0 : prior_pdf / proposal.density(theta);
                round.accepted.push_back({theta, weight, discrepancy});
            }
            if (config.per_round_acceptances && round.n_acc >= *config.per_round_acceptances) break;
        }

        run.total_sims += round.n_sims;
        const bool empty_round = round.accepted.empty();
        run.rounds.push_back(std::move(round));
        if (empty_round) {
            run.stopped_early = true;  // nothing to propose from
            break;
        }
    }
    return run;
}

namespace {

// weights of the particles in `round` that qualify at threshold eps
std::vector<double> qualifying_weights(const SmcRound& round, double eps) {
    std::vector<double> w;
    w.reserve(round.accepted.size());
    for (const auto& p : round.accepted) {
        if (p.discrepancy < eps) w.push_back(p.weight);
    }
    return w;
}

double ess_of(const std::vector<double>& w) {
    double s = 0.0, s2 = 0.0;
    for (double v : w) {
        s += v;
        s2 += v * v;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

}  // namespace

std::optional<double> round_estimate(const SmcRound& round, double eps,
                                     const std::function<double(const Eigen::Vector2d&)>& f) {
    double num = 0.0, den = 0.0;
    for (const auto& p : round.accepted) {
        if (p.discrepancy >= eps) continue;
        num += p.weight * f(p.theta);
        den += p.weight;
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

std::optional<double> all_rounds_estimate(const SmcRun& run,
                                          const std::function<double(const Eigen::Vector2d&)>& f) {
    if (run.rounds.empty()) return std::nullopt;
    const double eps_final = run.rounds.back().epsilon;
    double num = 0.0, den = 0.0;
    for (const auto& round : run.rounds) {
        const auto est = round_estimate(round, eps_final, f);
        if (!est) continue;  // alpha_k = 0
        const double alpha = ess_of(qualifying_weights(round, eps_final));
        num += alpha * *est;
        den += alpha;
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

double final_round_ess(const SmcRun& run) {
    if (run.rounds.empty()) return 0.0;
    const auto& last = run.rounds.back();
    return ess_of(qualifying_weights(last, last.epsilon));
}

double all_rounds_ess(const SmcRun& run) {
    if (run.rounds.empty()) return 0.0;
    const double eps_final = run.rounds.back().epsilon;
    // combined weights alpha_k p/q_k over all qualifying particles
    double s = 0.0, s2 = 0.0;
    for (const auto& round : run.rounds) {
        const double alpha = ess_of(qualifying_weights(round, eps_final));
        if (alpha <= 0.0) continue;
        // normalize within the round so alpha_k measures the round's share
        double round_total = 0.0;
        for (const auto& p : round.accepted) {
            if (p.discrepancy < eps_final) round_total += p.weight;
        }
        for (const auto& p : round.accepted) {
            if (p.discrepancy >= eps_final) continue;
            const double w = alpha * p.weight / round_total;
            s += w;
            s2 += w * w;
        }
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

namespace {

PosteriorMoments moments_from(const std::vector<std::pair<Eigen::Vector2d, double>>& weighted) {
    PosteriorMoments out;
    double total = 0.0;
    for (const auto& [theta, w] : weighted) total += w;
    if (total <= 0.0) return out;
    for (const auto& [theta, w] : weighted) out.mean += w * theta;
    out.mean /= total;
    for (const auto& [theta, w] : weighted) {
        const Eigen::Vector2d d = theta - out.mean;
        out.covariance += w * d * d.transpose();
    }
    out.covariance /= total;
    out.valid = true;
    return out;
}

}  // namespace

PosteriorMoments final_round_moments(const SmcRun& run) {
    if (run.rounds.empty()) return {};
    const auto& last = run.rounds.back();
    std::vector<std::pair<Eigen::Vector2d, double>> weighted;
    for (const auto& p : last.accepted) {
        if (p.discrepancy < last.epsilon) weighted.emplace_back(p.theta, p.weight);
    }
    return moments_from(weighted);
}

PosteriorMoments all_rounds_moments(const SmcRun& run) {
    if (run.rounds.empty()) return {};
    const double eps_final = run.rounds.back().epsilon;
    std::vector<std::pair<Eigen::Vector2d, double>> weighted;
    for (const auto& round : run.rounds) {
        const double alpha = ess_of(qualifying_weights(round, eps_final));
        if (alpha <= 0.0) continue;
        double round_total = 0.0;
        for (const auto& p : round.accepted) {
            if (p.discrepancy < eps_final) round_total += p.weight;
        }
        for (const auto& p : round.accepted) {
            if (p.discrepancy < eps_final) {
                weighted.emplace_back(p.theta, alpha * p.weight / round_total);
            }
        }
    }
    return moments_from(weighted);
}

EllipsoidPosterior ellipsoid_true_posterior() {
    EllipsoidPosterior post;
    post.mean = {8.0, 4.0};
    Eigen::Matrix2d shape;
    shape << 5.0, 2.0, 2.0, 1.0;
    const double pi = std::acos(-1.0);
    post.covariance = shape / std::sqrt(2.0 * pi);
    post.normalizer = std::sqrt(pi * pi * pi / 2.0);
    return post;
}

Eigen::Matrix2d abc_covariance_reference(double eps, const std::string& cache_path, long draws) {
    if (eps <= 0.0) throw Error("abc_covariance_reference: eps must be positive");

    std::ostringstream key_stream;
    key_stream.precision(17);
    key_stream << eps;
    const std::string key = key_stream.str();

    nlohmann::json cache = nlohmann::json::object();
    if (!cache_path.empty()) {
        std::ifstream in(cache_path);
        if (in) {
            try {
                in >> cache;
            } catch (...) {
                cache = nlohmann::json::object();
            }
        }
        if (cache.contains(key) && cache[key].value("draws", 0l) == draws) {
            const auto& c = cache[key]["covariance"];
            Eigen::Matrix2d cov;
            cov << c[0][0].get<double>(), c[0][1].get<double>(), c[1][0].get<double>(),
                c[1][1].get<double>();
            return cov;
        }
    }

    const EllipsoidProblem problem;
    RngStream rng = derive_stream(0xabcc0feeull, "abc-covariance-reference",
                                  static_cast<std::uint64_t>(eps * 4096.0));
    double sw = 0.0;
    Eigen::Vector2d sm = Eigen::Vector2d::Zero();
    Eigen::Matrix2d ss = Eigen::Matrix2d::Zero();
    for (long i = 0; i < draws; ++i) {
        const Eigen::Vector2d theta = problem.sample_prior(rng);
        const double w = problem.acceptance_probability(theta, eps);
        if (w <= 0.0) continue;
        sw += w;
        sm += w * theta;
        ss += w * theta * theta.transpose();
    }
    const Eigen::Vector2d mean = sm / sw;
    const Eigen::Matrix2d cov = ss / sw - mean * mean.transpose();

    if (!cache_path.empty()) {
        cache[key] = {{"draws", draws},
                      {"covariance", {{cov(0, 0), cov(0, 1)}, {cov(1, 0), cov(1, 1)}}},
                      {"mean", {mean[0], mean[1]}}};
        std::ofstream out(cache_path);
        out << cache.dump(2) << '\n';
    }
    return cov;
}

void write_smc_csv(std::ostream& out, const SmcRun& run) {
    out << "theta1,theta2,weight,discrepancy,round\n";
    out.precision(17);
    for (std::size_t k = 0; k < run.rounds.size(); ++k) {
        for (const auto& p : run.rounds[k].accepted) {
            out << p.theta[0] << ',' << p.theta[1] << ',' << p.weight << ',' << p.discrepancy << ','
                << k + 1 << '\n';
        }
    }
}

}  // namespace lfi
