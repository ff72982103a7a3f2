#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "lfi/errors.hpp"
#include "lfi/rng.hpp"

namespace lfi {

/// Parameter coordinates; stack-allocated, at most two continuous dimensions.
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

/// A point in parameter space: an optional finite model index plus
/// continuous coordinates (a single coordinate for discrete grids).
struct Parameter {
    int model = 0;
    Coords coords;

    Parameter() = default;
    explicit Parameter(double x) : coords(1) { coords[0] = x; }
    Parameter(int m, Coords c) : model(m), coords(std::move(c)) {}

    double x(int dim = 0) const { return coords[dim]; }
};

/// Real-valued function of the parameter whose posterior expectation is the
/// estimation target.
struct TargetFunction {
    std::function<double(const Parameter&)> eval;
    std::string label;

    double operator()(const Parameter& p) const { return eval(p); }
};

namespace targets {

TargetFunction coordinate(int dim = 0, std::string label = "theta");
TargetFunction second_moment(int dim = 0);
TargetFunction constant(double value);
TargetFunction indicator_below(double cut, int dim = 0);
TargetFunction indicator_abs_below(double cut, int dim = 0);
TargetFunction indicator_value(double value, int dim = 0);
TargetFunction indicator_model(int model, std::string label = "");

}  // namespace targets

/// Finite parameter grid with prior and true per-parameter acceptance
/// probabilities p_i* = p(x*|theta_i); the simulation oracle for the
/// discrete setting.
class DiscreteProblem {
public:
    DiscreteProblem(Eigen::VectorXd values, Eigen::VectorXd prior, Eigen::VectorXd likelihood);

    int size() const { return static_cast<int>(prior_.size()); }
    const Eigen::VectorXd& values() const { return values_; }
    const Eigen::VectorXd& prior() const { return prior_; }
    const Eigen::VectorXd& likelihood() const { return likelihood_; }

    Parameter parameter(int i) const { return Parameter(values_[i]); }

    /// p(x*) = sum_i pi_i p_i*.
    double evidence() const { return prior_.dot(likelihood_); }

private:
    Eigen::VectorXd values_;
    Eigen::VectorXd prior_;
    Eigen::VectorXd likelihood_;
};

/// Axis-aligned box for one model's continuous coordinates.
struct ModelSpace {
    double weight = 1.0;  // prior probability of the model index
    Coords lower;
    Coords upper;

    int dims() const { return static_cast<int>(lower.size()); }
    double volume() const { return (upper - lower).prod(); }
    bool contains(const Coords& c) const {
        return (c.array() >= lower.array()).all() && (c.array() <= upper.array()).all();
    }
};

/// Prior density/sampler plus pointwise acceptance probability on a 1-D or
/// product parameter space, optionally crossed with a finite model index.
class ContinuousProblem {
public:
    using DensityFn = std::function<double(const Parameter&)>;
    using SamplerFn = std::function<Parameter(RngStream&)>;

    /// General constructor; verifies the prior integrates to 1 within 1e-6.
    ContinuousProblem(std::vector<ModelSpace> models, DensityFn prior_density,
                      SamplerFn prior_sampler, DensityFn likelihood);

    /// Uniform prior over the model boxes, weighted by ModelSpace::weight.
    static ContinuousProblem uniform_prior(std::vector<ModelSpace> models, DensityFn likelihood);

    const std::vector<ModelSpace>& models() const { return models_; }
    int model_count() const { return static_cast<int>(models_.size()); }

    double prior_density(const Parameter& p) const { return prior_density_(p); }
    Parameter sample_prior(RngStream& rng) const { return prior_sampler_(rng); }
    double likelihood(const Parameter& p) const { return likelihood_(p); }
    bool contains(const Parameter& p) const;

private:
    std::vector<ModelSpace> models_;
    DensityFn prior_density_;
    SamplerFn prior_sampler_;
    DensityFn likelihood_;
};

using Problem = std::variant<DiscreteProblem, ContinuousProblem>;

/// One simulation: the parameter used and whether x = x* was observed.
struct SimulationOutcome {
    Parameter theta;
    bool accepted = false;
};

/// Exact posterior p(theta_i|x*) by Bayes' rule; throws DegenerateProblemError
/// when the evidence is zero.
Eigen::VectorXd exact_posterior(const DiscreteProblem& problem);

/// sum_i f(theta_i) p(theta_i|x*).
double posterior_expectation(const DiscreteProblem& problem, const TargetFunction& f);

/// f evaluated at every grid point.
Eigen::VectorXd evaluate_on_grid(const DiscreteProblem& problem, const TargetFunction& f);

/// Quadrature ground truth for continuous problems:
/// int f p p* / int p p* over the support (per-model sums).
double posterior_expectation(const ContinuousProblem& problem, const TargetFunction& f);

/// p(x*) = int p(theta) p(x*|theta) dtheta by quadrature.
double evidence(const ContinuousProblem& problem);

/// Bernoulli(likelihood(theta)) draw.
SimulationOutcome simulate(const DiscreteProblem& problem, int index, RngStream& rng);
SimulationOutcome simulate(const ContinuousProblem& problem, const Parameter& theta, RngStream& rng);

/// Construct a problem from its JSON description (see README for the schema).
Problem problem_from_json(const nlohmann::json& spec);

}  // namespace lfi
