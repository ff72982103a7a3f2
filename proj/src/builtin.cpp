#include "lfi/builtin.hpp"

#include <cmath>

namespace lfi::builtin {

DiscreteProblem two_param() {
    Eigen::VectorXd values(2), prior(2), likelihood(2);
    values << 0.0, 1.0;
    prior << 0.5, 0.5;
    likelihood << 0.3, 0.05;
    return DiscreteProblem(values, prior, likelihood);
}

DiscreteProblem discrete_gaussian() {
    const int k = 101;
    Eigen::VectorXd values = Eigen::VectorXd::LinSpaced(k, -5.0, 5.0);
    Eigen::VectorXd prior = Eigen::VectorXd::Constant(k, 1.0 / k);
    Eigen::VectorXd likelihood = (-0.5 * values.array().square()).exp();
    return DiscreteProblem(values, prior, likelihood);
}

DiscreteProblem ten_point() {
    const int k = 10;
    Eigen::VectorXd values = Eigen::VectorXd::LinSpaced(k, 1.0, 10.0);
    Eigen::VectorXd prior = Eigen::VectorXd::Constant(k, 1.0 / k);
    Eigen::VectorXd likelihood = (-0.5 * (values.array() - 5.5).square()).exp();
    return DiscreteProblem(values, prior, likelihood);
}

ContinuousProblem laplace_line() {
    ModelSpace space;
    space.weight = 1.0;
    space.lower.resize(1);
    space.upper.resize(1);
    space.lower[0] = -40.0;
    space.upper[0] = 60.0;
    return ContinuousProblem::uniform_prior(
        {space}, [](const Parameter& p) { return std::exp(-std::abs(p.x())); });
}

ContinuousProblem unit_ramp() {
    ModelSpace space;
    space.weight = 1.0;
    space.lower.resize(1);
    space.upper.resize(1);
    space.lower[0] = 0.0;
    space.upper[0] = 1.0;
    return ContinuousProblem::uniform_prior({space}, [](const Parameter& p) { return p.x(); });
}

ContinuousProblem two_model() {
    ModelSpace narrow;
    narrow.weight = 0.5;
    narrow.lower.resize(2);
    narrow.upper.resize(2);
    narrow.lower << -10.0, -10.0;
    narrow.upper << 15.0, 15.0;
    ModelSpace wide = narrow;

    return ContinuousProblem::uniform_prior({narrow, wide}, [](const Parameter& p) {
        const double a = p.x(0) * p.x(0);
        if (p.model == 0) return std::exp(-0.5 * a);
        return std::exp(-0.5 * (a + p.x(1) * p.x(1)));
    });
}

}  // namespace lfi::builtin
