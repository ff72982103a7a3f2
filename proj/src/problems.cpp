#include "lfi/problems.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <utility>

#include "lfi/quadrature.hpp"

namespace lfi {

namespace targets {

TargetFunction coordinate(int dim, std::string label) {
    return {[dim](const Parameter& p) { return p.x(dim); }, std::move(label)};
}

TargetFunction second_moment(int dim) {
    return {[dim](const Parameter& p) { return p.x(dim) * p.x(dim); }, "theta^2"};
}

TargetFunction constant(double value) {
    return {[value](const Parameter&) { return value; }, "const"};
}

TargetFunction indicator_below(double cut, int dim) {
    return {[cut, dim](const Parameter& p) { return p.x(dim) < cut ? 1.0 : 0.0; },
            "1[theta<" + std::to_string(cut) + "]"};
}

TargetFunction indicator_abs_below(double cut, int dim) {
    return {[cut, dim](const Parameter& p) { return std::abs(p.x(dim)) < cut ? 1.0 : 0.0; },
            "1[|theta|<" + std::to_string(cut) + "]"};
}

TargetFunction indicator_value(double value, int dim) {
    return {[value, dim](const Parameter& p) { return p.x(dim) == value ? 1.0 : 0.0; },
            "1[theta=" + std::to_string(value) + "]"};
}

TargetFunction indicator_model(int model, std::string label) {
    if (label.empty()) label = "1[model=" + std::to_string(model) + "]";
    return {[model](const Parameter& p) { return p.model == model ? 1.0 : 0.0; }, std::move(label)};
}

}  // namespace targets

DiscreteProblem::DiscreteProblem(Eigen::VectorXd values, Eigen::VectorXd prior,
                                 Eigen::VectorXd likelihood)
    : values_(std::move(values)), prior_(std::move(prior)), likelihood_(std::move(likelihood)) {
    const auto k = prior_.size();
    if (k < 1 || values_.size() != k || likelihood_.size() != k) {
        throw Error("discrete problem: values, prior, likelihood must share length k >= 1");
    }
    if ((prior_.array() < 0.0).any() || std::abs(prior_.sum() - 1.0) > 1e-12) {
        throw Error("discrete problem: prior must be nonnegative and sum to 1 within 1e-12");
    }
    if ((likelihood_.array() < 0.0).any() || (likelihood_.array() > 1.0).any()) {
        throw Error("discrete problem: likelihood entries must lie in [0, 1]");
    }
    if ((likelihood_.array() <= 0.0).all()) {
        throw Error("discrete problem: at least one likelihood entry must be positive");
    }
}

Eigen::VectorXd exact_posterior(const DiscreteProblem& problem) {
    const double z = problem.evidence();
    if (z <= 0.0) throw DegenerateProblemError("exact_posterior: evidence sum(prior*likelihood) is zero");
    return (problem.prior().array() * problem.likelihood().array() / z).matrix();
}

Eigen::VectorXd evaluate_on_grid(const DiscreteProblem& problem, const TargetFunction& f) {
    Eigen::VectorXd out(problem.size());
    for (int i = 0; i < problem.size(); ++i) out[i] = f(problem.parameter(i));
    return out;
}

double posterior_expectation(const DiscreteProblem& problem, const TargetFunction& f) {
    return evaluate_on_grid(problem, f).dot(exact_posterior(problem));
}

ContinuousProblem::ContinuousProblem(std::vector<ModelSpace> models, DensityFn prior_density,
                                     SamplerFn prior_sampler, DensityFn likelihood)
    : models_(std::move(models)),
      prior_density_(std::move(prior_density)),
      prior_sampler_(std::move(prior_sampler)),
      likelihood_(std::move(likelihood)) {
    if (models_.empty()) throw Error("continuous problem: needs at least one model space");
    double mass = 0.0;
    for (int m = 0; m < model_count(); ++m) {
        const ModelSpace& space = models_[m];
        if (space.dims() < 1 || space.dims() > 2 || space.upper.size() != space.lower.size()) {
            throw Error("continuous problem: supports are 1-D or 2-D boxes");
        }
        const auto at = [&](double x, double y) {
            Coords c(space.dims());
            c[0] = x;
            if (space.dims() == 2) c[1] = y;
            return Parameter(m, c);
        };
        if (space.dims() == 1) {
            mass += quad::integrate([&](double x) { return prior_density_(at(x, 0)); },
                                    space.lower[0], space.upper[0], 1e-10, 1e-9)
                        .value;
        } else {
            mass += quad::integrate_2d([&](double x, double y) { return prior_density_(at(x, y)); },
                                       space.lower[0], space.upper[0], space.lower[1], space.upper[1],
                                       1e-9, 1e-8)
                        .value;
        }
    }
    if (std::abs(mass - 1.0) > 1e-6) {
        throw Error("continuous problem: prior density integrates to " + std::to_string(mass) +
                    ", expected 1 within 1e-6");
    }
}

ContinuousProblem ContinuousProblem::uniform_prior(std::vector<ModelSpace> models, DensityFn likelihood) {
    double total_weight = 0.0;
    for (const auto& m : models) total_weight += m.weight;

    std::vector<double> density_scale(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        density_scale[m] = models[m].weight / total_weight / models[m].volume();
    }

    auto spaces = models;  // copy captured by the closures
    DensityFn density = [spaces, density_scale](const Parameter& p) {
        const auto& space = spaces[p.model];
        return space.contains(p.coords) ? density_scale[p.model] : 0.0;
    };
    SamplerFn sampler = [spaces, total_weight](RngStream& rng) {
        int m = 0;
        if (spaces.size() > 1) {
            double u = rng.uniform01() * total_weight;
            while (m + 1 < static_cast<int>(spaces.size()) && u >= spaces[m].weight) {
                u -= spaces[m].weight;
                ++m;
            }
        }
        const auto& space = spaces[m];
        Coords c(space.dims());
        for (int d = 0; d < space.dims(); ++d) c[d] = rng.uniform(space.lower[d], space.upper[d]);
        return Parameter(m, c);
    };
    return ContinuousProblem(std::move(models), std::move(density), std::move(sampler),
                             std::move(likelihood));
}

bool ContinuousProblem::contains(const Parameter& p) const {
    if (p.model < 0 || p.model >= model_count()) return false;
    const ModelSpace& space = models_[p.model];
    if (p.coords.size() != space.dims()) return false;
    return space.contains(p.coords);
}

namespace {

// int g(theta) dtheta over one model box, adaptive quadrature.
double model_integral(const ContinuousProblem& problem, int m,
                      const std::function<double(const Parameter&)>& g) {
    const ModelSpace& space = problem.models()[m];
    const auto at = [&](double x, double y) {
        Coords c(space.dims());
        c[0] = x;
        if (space.dims() == 2) c[1] = y;
        return Parameter(m, c);
    };
    if (space.dims() == 1) {
        return quad::integrate([&](double x) { return g(at(x, 0)); }, space.lower[0], space.upper[0],
                               1e-12, 1e-10)
            .value;
    }
    return quad::integrate_2d([&](double x, double y) { return g(at(x, y)); }, space.lower[0],
                              space.upper[0], space.lower[1], space.upper[1], 1e-11, 1e-9)
        .value;
}

}  // namespace

double evidence(const ContinuousProblem& problem) {
    double z = 0.0;
    for (int m = 0; m < problem.model_count(); ++m) {
        z += model_integral(problem, m, [&](const Parameter& p) {
            return problem.prior_density(p) * problem.likelihood(p);
        });
    }
    return z;
}

double posterior_expectation(const ContinuousProblem& problem, const TargetFunction& f) {
    double numer = 0.0;
    double denom = 0.0;
    for (int m = 0; m < problem.model_count(); ++m) {
        numer += model_integral(problem, m, [&](const Parameter& p) {
            return f(p) * problem.prior_density(p) * problem.likelihood(p);
        });
        denom += model_integral(problem, m, [&](const Parameter& p) {
            return problem.prior_density(p) * problem.likelihood(p);
        });
    }
    if (denom <= 0.0) throw DegenerateProblemError("posterior_expectation: zero evidence");
    return numer / denom;
}

SimulationOutcome simulate(const DiscreteProblem& problem, int index, RngStream& rng) {
    if (index < 0 || index >= problem.size()) {
        throw DomainError("simulate: grid index out of range");
    }
    return {problem.parameter(index), rng.bernoulli(problem.likelihood()[index])};
}

SimulationOutcome simulate(const ContinuousProblem& problem, const Parameter& theta, RngStream& rng) {
    if (!problem.contains(theta)) throw DomainError("simulate: parameter outside support");
    const double p = problem.likelihood(theta);
    if (p < 0.0 || p > 1.0) throw Error("simulate: likelihood outside [0, 1]");
    return {theta, rng.bernoulli(p)};
}

namespace {

ContinuousProblem::DensityFn likelihood_from_json(const nlohmann::json& spec) {
    const std::string name = spec.at("name").get<std::string>();
    const double loc = spec.value("loc", 0.0);
    const double scale = spec.value("scale", 1.0);
    if (name == "laplace_likelihood") {
        // exp(-|theta - loc| / scale) over the first coordinate
        return [loc, scale](const Parameter& p) { return std::exp(-std::abs(p.x() - loc) / scale); };
    }
    if (name == "gaussian_likelihood") {
        // exp(-sum_d (theta_d - loc)^2 / (2 scale^2))
        return [loc, scale](const Parameter& p) {
            double s = 0.0;
            for (int d = 0; d < p.coords.size(); ++d) {
                const double z = (p.x(d) - loc) / scale;
                s += z * z;
            }
            return std::exp(-0.5 * s);
        };
    }
    if (name == "identity_likelihood") {
        // p(x*|theta) = theta, clamped into [0, 1]
        return [](const Parameter& p) { return std::min(1.0, std::max(0.0, p.x())); };
    }
    if (name == "uniform") {
        const double level = spec.value("level", 1.0);
        return [level](const Parameter&) { return level; };
    }
    throw Error("problem_from_json: unknown likelihood '" + name + "'");
}

ModelSpace model_space_from_json(const nlohmann::json& spec, double weight) {
    const auto& support = spec.at("support");
    ModelSpace space;
    space.weight = weight;
    space.lower.resize(static_cast<int>(support.size()));
    space.upper.resize(static_cast<int>(support.size()));
    for (std::size_t d = 0; d < support.size(); ++d) {
        space.lower[static_cast<int>(d)] = support[d].at(0).get<double>();
        space.upper[static_cast<int>(d)] = support[d].at(1).get<double>();
    }
    return space;
}

}  // namespace

Problem problem_from_json(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "discrete") {
        const auto values = spec.at("values").get<std::vector<double>>();
        const auto prior = spec.at("prior").get<std::vector<double>>();
        const auto like = spec.at("likelihood").get<std::vector<double>>();
        return DiscreteProblem(Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()),
                               Eigen::Map<const Eigen::VectorXd>(prior.data(), prior.size()),
                               Eigen::Map<const Eigen::VectorXd>(like.data(), like.size()));
    }
    if (kind == "continuous") {
        const std::string prior_kind = spec.value("prior", "uniform");
        if (prior_kind != "uniform") {
            throw Error("problem_from_json: only the uniform built-in prior is supported");
        }
        std::vector<ModelSpace> spaces;
        std::vector<ContinuousProblem::DensityFn> likes;
        if (spec.contains("models")) {
            for (const auto& ms : spec.at("models")) {
                spaces.push_back(model_space_from_json(ms, ms.value("weight", 1.0)));
                likes.push_back(likelihood_from_json(ms.at("likelihood")));
            }
        } else {
            spaces.push_back(model_space_from_json(spec, 1.0));
            likes.push_back(likelihood_from_json(spec.at("likelihood")));
        }
        ContinuousProblem::DensityFn likelihood = [likes](const Parameter& p) {
            return likes[p.model](p);
        };
        return ContinuousProblem::uniform_prior(std::move(spaces), std::move(likelihood));
    }
    throw Error("problem_from_json: unknown kind '" + kind + "'");
}

}  // namespace lfi
