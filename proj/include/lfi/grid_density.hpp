#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "lfi/problems.hpp"

namespace lfi {

/// Product-form density over (model, coords) tabulated on a per-dimension
/// grid, with inverse-CDF sampling. Within each grid cell the pdf is the
/// linear interpolant of the node values, so density() reports exactly the
/// distribution sample() draws from.
class GridDensity {
public:
    struct DimSpec {
        double lo = 0.0;
        double hi = 1.0;
        std::function<double(double)> factor;  // unnormalized 1-D factor, >= 0
    };
    struct ModelSpec {
        double scale = 1.0;  // constant multiplier (model weight etc.)
        std::vector<DimSpec> dims;
    };

    GridDensity(std::vector<ModelSpec> specs, int points_per_dim = 4096);

    /// Normalized joint density at p (piecewise-linear per dimension).
    double density(const Parameter& p) const;

    Parameter sample(RngStream& rng) const;

    int model_count() const { return static_cast<int>(models_.size()); }
    /// Probability of drawing the given model index.
    double model_mass(int m) const { return models_[static_cast<std::size_t>(m)].mass / total_mass_; }

    /// Quantile of the marginal of dimension `dim` of model `m`.
    double dim_quantile(int m, int dim, double u) const;
    /// CDF of the marginal of dimension `dim` of model `m`.
    double dim_cdf(int m, int dim, double x) const;

private:
    struct DimTable {
        Eigen::VectorXd x;    // grid nodes
        Eigen::VectorXd pdf;  // unnormalized node values
        Eigen::VectorXd cdf;  // trapezoid cumulative, cdf[0] = 0
        double mass = 0.0;    // cdf.tail(1)
    };
    struct ModelBlock {
        double scale = 1.0;
        double mass = 0.0;  // scale * prod(dim mass)
        std::vector<DimTable> dims;
    };

    static double sample_dim(const DimTable& table, double u);

    std::vector<ModelBlock> models_;
    double total_mass_ = 0.0;
};

}  // namespace lfi
