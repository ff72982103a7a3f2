#pragma once

#include "lfi/problems.hpp"

namespace lfi::builtin {

/// k = 2 grid, uniform prior, acceptance probabilities (0.3, 0.05).
DiscreteProblem two_param();

/// 101 evenly spaced points on [-5, 5], uniform prior, likelihood
/// exp(-theta^2 / 2).
DiscreteProblem discrete_gaussian();

/// theta in {1, ..., 10}, uniform prior, likelihood exp(-(theta - 5.5)^2 / 2).
DiscreteProblem ten_point();

/// 1-D, uniform prior on [-40, 60], likelihood exp(-|theta|).
ContinuousProblem laplace_line();

/// 1-D, uniform prior on [0, 1], likelihood theta.
ContinuousProblem unit_ramp();

/// Two models of equal prior probability on [-10, 15]^2; model 0 has
/// likelihood exp(-theta1^2/2) and model 1 exp(-(theta1^2 + theta2^2)/2).
ContinuousProblem two_model();

}  // namespace lfi::builtin
