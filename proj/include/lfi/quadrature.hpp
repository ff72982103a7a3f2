#pragma once

#include <functional>

namespace lfi::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    long evaluations = 0;
};

using Fn = std::function<double(double)>;

/// Single-panel Gauss-Kronrod 7-15 rule; *error is |K15 - G7| if given.
double gauss_kronrod_15(const Fn& f, double lo, double hi, double* error = nullptr);

/// Single-panel Gauss-Kronrod 10-21 rule; *error is |K21 - G10| if given.
double gauss_kronrod_21(const Fn& f, double lo, double hi, double* error = nullptr);

/// Adaptive bisection driven by the 10-21 pair. Handles kinks and jump
/// discontinuities in the integrand by local refinement.
Result integrate(const Fn& f, double lo, double hi, double abs_tol = 1e-10,
                 double rel_tol = 1e-9, int max_depth = 48);

/// Non-adaptive composite Gauss-Kronrod with at least `min_nodes` total
/// evaluation points, split into equal panels of the 21-point rule.
double fixed_gauss_kronrod(const Fn& f, double lo, double hi, int min_nodes);

/// Iterated adaptive quadrature over an axis-aligned rectangle.
Result integrate_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi,
                    double y_lo, double y_hi, double abs_tol = 1e-9, double rel_tol = 1e-8);

}  // namespace lfi::quad
