#include "lfi/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lfi/quadrature.hpp"

namespace lfi {

ImportanceDensity ImportanceDensity::discrete(const DiscreteProblem& problem, Eigen::VectorXd pmf,
                                              std::string label) {
    if (pmf.size() != problem.size()) throw Error("ImportanceDensity: pmf size mismatch");
    if ((pmf.array() < 0.0).any()) throw Error("ImportanceDensity: negative pmf entry");
    const double total = pmf.sum();
    if (total <= 0.0) throw DegenerateTargetError("ImportanceDensity: pmf vanishes");

    ImportanceDensity q;
    q.pmf_ = pmf / total;
    q.cdf_.resize(pmf.size());
    double acc = 0.0;
    for (long i = 0; i < pmf.size(); ++i) {
        acc += q.pmf_[i];
        q.cdf_[i] = acc;
    }
    q.values_ = problem.values();
    q.label_ = std::move(label);
    Eigen::VectorXd values = q.values_;
    Eigen::VectorXd mass = q.pmf_;
    q.unnormalized_ = [values, mass](const Parameter& p) {
        for (long i = 0; i < values.size(); ++i) {
            if (p.x() == values[i]) return mass[i];
        }
        return 0.0;
    };
    return q;
}

ImportanceDensity ImportanceDensity::continuous(GridDensity grid,
                                                std::function<double(const Parameter&)> unnormalized,
                                                std::string label) {
    ImportanceDensity q;
    q.grid_ = std::make_shared<GridDensity>(std::move(grid));
    q.unnormalized_ = std::move(unnormalized);
    q.label_ = std::move(label);
    return q;
}

double ImportanceDensity::density(const Parameter& p) const {
    if (is_discrete()) return unnormalized_(p);
    return grid_->density(p);
}

double ImportanceDensity::unnormalized(const Parameter& p) const { return unnormalized_(p); }

Parameter ImportanceDensity::sample(RngStream& rng) const {
    if (is_discrete()) return Parameter(values_[sample_index(rng)]);
    return grid_->sample(rng);
}

int ImportanceDensity::sample_index(RngStream& rng) const {
    if (!is_discrete()) throw Error("ImportanceDensity: sample_index is for discrete densities");
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.data(), cdf_.data() + cdf_.size(), u);
    return static_cast<int>(std::min<long>(it - cdf_.data(), cdf_.size() - 1));
}

const GridDensity& ImportanceDensity::grid() const {
    if (is_discrete()) throw Error("ImportanceDensity: no grid for discrete densities");
    return *grid_;
}

namespace {

WeightedParticles rejection_discrete(const DiscreteProblem& problem, long n, RngStream& rng) {
    const ImportanceDensity prior = ImportanceDensity::discrete(problem, problem.prior(), "prior");
    WeightedParticles particles;
    particles.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const int idx = prior.sample_index(rng);
        const bool accepted = rng.bernoulli(problem.likelihood()[idx]);
        particles.add(problem.parameter(idx), accepted ? 1.0 : 0.0, accepted);
    }
    return particles;
}

WeightedParticles rejection_continuous(const ContinuousProblem& problem, long n, RngStream& rng) {
    WeightedParticles particles;
    particles.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const Parameter theta = problem.sample_prior(rng);
        const bool accepted = rng.bernoulli(problem.likelihood(theta));
        particles.add(theta, accepted ? 1.0 : 0.0, accepted);
    }
    return particles;
}

}  // namespace

WeightedParticles rejection_sampling(const Problem& problem, long n, RngStream& rng) {
    if (n < 1) throw Error("rejection_sampling: n must be positive");
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) return rejection_discrete(*d, n, rng);
    return rejection_continuous(std::get<ContinuousProblem>(problem), n, rng);
}

WeightedParticles importance_sampling(const Problem& problem, const ImportanceDensity& q, long n,
                                      RngStream& rng) {
    if (n < 1) throw Error("importance_sampling: n must be positive");
    WeightedParticles particles;
    particles.reserve(static_cast<std::size_t>(n));
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) {
        for (long i = 0; i < n; ++i) {
            const int idx = q.sample_index(rng);
            if (q.pmf()[idx] <= 0.0) throw Error("importance_sampling: drew from zero-mass atom");
            const bool accepted = rng.bernoulli(d->likelihood()[idx]);
            const double w = d->prior()[idx] / q.pmf()[idx];
            particles.add(d->parameter(idx), accepted ? w : 0.0, accepted);
        }
        return particles;
    }
    const auto& c = std::get<ContinuousProblem>(problem);
    for (long i = 0; i < n; ++i) {
        const Parameter theta = q.sample(rng);
        const double qd = q.density(theta);
        if (qd <= 0.0) throw Error("importance_sampling: sampled point has zero proposal density");
        const bool accepted = rng.bernoulli(c.likelihood(theta));
        const double w = c.prior_density(theta) / qd;
        particles.add(theta, accepted ? w : 0.0, accepted);
    }
    return particles;
}

namespace {

constexpr int kGridPointsPerDim = 4096;

// Tabulate a pointwise target g(theta) as a product-form GridDensity by
// slicing along each axis through an anchor point. Requires g to factorize
// per dimension within each model, which holds for every density this
// module constructs (priors are uniform boxes and the target factors are
// per-coordinate); verified on probe points.
GridDensity build_grid(const ContinuousProblem& problem,
                       const std::function<double(const Parameter&)>& g) {
    std::vector<GridDensity::ModelSpec> specs;
    for (int m = 0; m < problem.model_count(); ++m) {
        const ModelSpace& space = problem.models()[m];
        const int dims = space.dims();
        const auto at = [m, dims](double x, double y) {
            Coords c(dims);
            c[0] = x;
            if (dims == 2) c[1] = y;
            return Parameter(m, c);
        };

        GridDensity::ModelSpec spec;
        if (dims == 1) {
            spec.scale = 1.0;
            spec.dims.push_back({space.lower[0], space.upper[0],
                                 [g, at](double x) { return g(at(x, 0.0)); }});
            specs.push_back(std::move(spec));
            continue;
        }

        // anchor search: coarse scan for the largest |g|
        const int scan = 33;
        double best = 0.0;
        double ax = 0.5 * (space.lower[0] + space.upper[0]);
        double ay = 0.5 * (space.lower[1] + space.upper[1]);
        for (int i = 0; i < scan; ++i) {
            for (int j = 0; j < scan; ++j) {
                const double x = space.lower[0] + (space.upper[0] - space.lower[0]) * (i + 0.5) / scan;
                const double y = space.lower[1] + (space.upper[1] - space.lower[1]) * (j + 0.5) / scan;
                const double v = g(at(x, y));
                if (v > best) {
                    best = v;
                    ax = x;
                    ay = y;
                }
            }
        }
        if (best <= 0.0) {
            // model carries no mass under this density
            spec.scale = 0.0;
            spec.dims.push_back({space.lower[0], space.upper[0], [](double) { return 0.0; }});
            spec.dims.push_back({space.lower[1], space.upper[1], [](double) { return 0.0; }});
            specs.push_back(std::move(spec));
            continue;
        }
        // separability probe
        {
            RngStream probe_rng(0x5eedu + static_cast<unsigned>(m));
            for (int t = 0; t < 16; ++t) {
                const double x = probe_rng.uniform(space.lower[0], space.upper[0]);
                const double y = probe_rng.uniform(space.lower[1], space.upper[1]);
                const double lhs = g(at(x, y)) * best;
                const double rhs = g(at(x, ay)) * g(at(ax, y));
                if (std::abs(lhs - rhs) > 1e-6 * (std::abs(lhs) + std::abs(rhs) + best * best)) {
                    throw Error("grid density: target does not factorize per dimension");
                }
            }
        }
        spec.scale = 1.0 / best;
        spec.dims.push_back({space.lower[0], space.upper[0],
                             [g, at, ay](double x) { return g(at(x, ay)); }});
        spec.dims.push_back({space.lower[1], space.upper[1],
                             [g, at, ax](double y) { return g(at(ax, y)); }});
        specs.push_back(std::move(spec));
    }
    return GridDensity(std::move(specs), kGridPointsPerDim);
}

ImportanceDensity make_continuous_density(const ContinuousProblem& problem,
                                          std::function<double(const Parameter&)> g,
                                          std::string label) {
    GridDensity grid = build_grid(problem, g);
    return ImportanceDensity::continuous(std::move(grid), std::move(g), std::move(label));
}

const ContinuousProblem& as_continuous(const Problem& problem) {
    return std::get<ContinuousProblem>(problem);
}

}  // namespace

ImportanceDensity prior_density(const Problem& problem) {
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) {
        return ImportanceDensity::discrete(*d, d->prior(), "prior");
    }
    const auto& c = as_continuous(problem);
    return make_continuous_density(
        c, [&c](const Parameter& p) { return c.prior_density(p); }, "prior");
}

ImportanceDensity posterior_density(const Problem& problem) {
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) {
        return ImportanceDensity::discrete(*d, exact_posterior(*d), "posterior");
    }
    const auto& c = as_continuous(problem);
    return make_continuous_density(
        c, [&c](const Parameter& p) { return c.prior_density(p) * c.likelihood(p); }, "posterior");
}

ImportanceDensity ess_optimal_density(const Problem& problem) {
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) {
        const Eigen::VectorXd pmf =
            (d->prior().array() * d->likelihood().array().sqrt()).matrix();
        return ImportanceDensity::discrete(*d, pmf, "ess-opt");
    }
    const auto& c = as_continuous(problem);
    return make_continuous_density(
        c, [&c](const Parameter& p) { return c.prior_density(p) * std::sqrt(c.likelihood(p)); },
        "ess-opt");
}

ImportanceDensity targeted_density(const Problem& problem, const TargetFunction& f, double f_bar) {
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) {
        const Eigen::VectorXd f_values = evaluate_on_grid(*d, f);
        const Eigen::VectorXd pmf = (d->prior().array() * d->likelihood().array().sqrt() *
                                     (f_values.array() - f_bar).abs())
                                        .matrix();
        if (pmf.sum() <= 0.0) {
            throw DegenerateTargetError("targeted_density: |f - f_bar| vanishes on the support");
        }
        return ImportanceDensity::discrete(*d, pmf, "targeted");
    }
    const auto& c = as_continuous(problem);
    auto g = [&c, f, f_bar](const Parameter& p) {
        return c.prior_density(p) * std::sqrt(c.likelihood(p)) * std::abs(f(p) - f_bar);
    };
    try {
        return make_continuous_density(c, std::move(g), "targeted");
    } catch (const DegenerateTargetError&) {
        throw DegenerateTargetError("targeted_density: |f - f_bar| vanishes on the support");
    }
}

ImportanceDensity stratified_targeted_density(const Problem& problem, const TargetFunction& f,
                                              double f_bar) {
    if (const auto* d = std::get_if<DiscreteProblem>(&problem)) {
        const Eigen::VectorXd f_values = evaluate_on_grid(*d, f);
        const Eigen::ArrayXd like = d->likelihood().array();
        const Eigen::VectorXd pmf =
            (d->prior().array() * (like * (1.0 - like)).sqrt() * (f_values.array() - f_bar).abs())
                .matrix();
        if (pmf.sum() <= 0.0) {
            throw DegenerateTargetError("stratified_targeted_density: density vanishes");
        }
        return ImportanceDensity::discrete(*d, pmf, "stratified-targeted");
    }
    const auto& c = as_continuous(problem);
    auto g = [&c, f, f_bar](const Parameter& p) {
        const double like = c.likelihood(p);
        return c.prior_density(p) * std::sqrt(like * (1.0 - like)) * std::abs(f(p) - f_bar);
    };
    return make_continuous_density(c, std::move(g), "stratified-targeted");
}

VarianceResult independent_sampling_variance(const ContinuousProblem& problem,
                                             const ImportanceDensity& q, const TargetFunction& f,
                                             long n) {
    const double f_bar = posterior_expectation(problem, f);
    const double z = evidence(problem);
    bool blew_up = false;

    const auto integrand = [&](const Parameter& p) {
        const double dev = f(p) - f_bar;
        const double rho = problem.prior_density(p);
        const double numer = dev * dev * rho * rho * problem.likelihood(p);
        if (numer <= 0.0) return 0.0;
        const double qd = q.density(p);
        if (qd <= 0.0) {
            blew_up = true;
            return 0.0;
        }
        return numer / qd;
    };

    double total = 0.0;
    bool converged = true;
    for (int m = 0; m < problem.model_count(); ++m) {
        const ModelSpace& space = problem.models()[m];
        const auto at = [&](double x, double y) {
            Coords c(space.dims());
            c[0] = x;
            if (space.dims() == 2) c[1] = y;
            return Parameter(m, c);
        };
        quad::Result r;
        if (space.dims() == 1) {
            r = quad::integrate([&](double x) { return integrand(at(x, 0.0)); }, space.lower[0],
                                space.upper[0], 1e-11, 1e-8);
        } else {
            r = quad::integrate_2d([&](double x, double y) { return integrand(at(x, y)); },
                                   space.lower[0], space.upper[0], space.lower[1], space.upper[1],
                                   1e-10, 1e-7);
        }
        total += r.value;
        converged = converged && r.converged;
    }
    if (blew_up) {
        return {std::numeric_limits<double>::infinity(), false};
    }
    return {total / (static_cast<double>(n) * z * z), converged};
}

StrataSpec equal_mass_strata(const ImportanceDensity& base, int strata) {
    if (base.is_discrete() || base.grid().model_count() != 1) {
        throw Error("equal_mass_strata: needs a 1-D continuous base density");
    }
    if (strata < 1) throw Error("equal_mass_strata: needs at least one stratum");
    StrataSpec spec;
    spec.per_stratum = 1;
    spec.boundaries.resize(strata + 1);
    for (int k = 0; k <= strata; ++k) {
        spec.boundaries[k] = base.grid().dim_quantile(0, 0, static_cast<double>(k) / strata);
    }
    return spec;
}

StratifiedResult stratified_sampling(const ContinuousProblem& problem, const ImportanceDensity& base,
                                     long n, RngStream& rng, const TargetFunction& f) {
    if (problem.model_count() != 1 || problem.models()[0].dims() != 1) {
        throw Error("stratified_sampling: 1-D single-model problems only");
    }
    if (base.is_discrete()) throw Error("stratified_sampling: needs a continuous base density");

    StratifiedResult out;
    out.particles.reserve(static_cast<std::size_t>(n));
    const double strata = static_cast<double>(n);
    double numer = 0.0;
    double denom = 0.0;
    for (long k = 0; k < n; ++k) {
        // quantile transform draws from the renormalized restriction q_k;
        // the stratum weight p / q_k uses q_k = K * q on an equal-mass split.
        const double u = (static_cast<double>(k) + rng.uniform01()) / strata;
        const Parameter theta = Parameter(base.grid().dim_quantile(0, 0, u));
        const double qd = base.density(theta);
        const bool accepted = rng.bernoulli(problem.likelihood(theta));
        double w = 0.0;
        if (accepted) {
            if (qd <= 0.0) throw Error("stratified_sampling: accepted draw has zero base density");
            w = problem.prior_density(theta) / (strata * qd);
            numer += f(theta) * w;
            denom += w;
        }
        out.particles.add(theta, w, accepted);
    }
    if (denom <= 0.0) throw ZeroTotalWeightError("stratified_sampling: no accepted mass");
    out.estimate = numer / denom;
    return out;
}

double stratified_variance_diagnostic(const ContinuousProblem& problem,
                                      const ImportanceDensity& base, const TargetFunction& f,
                                      long n) {
    const StrataSpec spec = equal_mass_strata(base, static_cast<int>(n));
    const double f_bar = posterior_expectation(problem, f);
    const double z = evidence(problem);
    const double strata = static_cast<double>(n);

    double total = 0.0;
    for (long k = 0; k < n; ++k) {
        const double lo = spec.boundaries[k];
        const double hi = spec.boundaries[k + 1];
        if (!(hi > lo)) continue;
        // one draw from q_k = K q restricted to the stratum
        const auto m2 = quad::gauss_kronrod_15([&](double x) {
            const Parameter p{x};
            const double qk = strata * base.density(p);
            if (qk <= 0.0) return 0.0;
            const double dev = f(p) - f_bar;
            const double rho = problem.prior_density(p);
            return dev * dev * rho * rho / qk * problem.likelihood(p);
        }, lo, hi);
        const auto m1 = quad::gauss_kronrod_15([&](double x) {
            const Parameter p{x};
            const double dev = f(p) - f_bar;
            return dev * problem.prior_density(p) * problem.likelihood(p);
        }, lo, hi);
        total += m2 - m1 * m1;
    }
    return total / (z * z);
}

}  // namespace lfi
