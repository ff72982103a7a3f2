#include "lfi/grid_density.hpp"

#include <algorithm>
#include <cmath>

namespace lfi {

GridDensity::GridDensity(std::vector<ModelSpec> specs, int points_per_dim) {
    if (specs.empty()) throw Error("GridDensity: no model blocks");
    if (points_per_dim < 2) throw Error("GridDensity: needs at least two grid points");
    for (const auto& spec : specs) {
        ModelBlock block;
        block.scale = spec.scale;
        block.mass = spec.scale;
        for (const auto& dim : spec.dims) {
            if (!(dim.hi > dim.lo)) throw Error("GridDensity: empty dimension interval");
            DimTable table;
            table.x = Eigen::VectorXd::LinSpaced(points_per_dim, dim.lo, dim.hi);
            table.pdf.resize(points_per_dim);
            for (int i = 0; i < points_per_dim; ++i) {
                const double v = dim.factor(table.x[i]);
                if (!std::isfinite(v)) throw Error("GridDensity: non-finite density value");
                table.pdf[i] = std::max(0.0, v);
            }
            table.cdf.resize(points_per_dim);
            table.cdf[0] = 0.0;
            for (int i = 1; i < points_per_dim; ++i) {
                table.cdf[i] = table.cdf[i - 1] +
                               0.5 * (table.pdf[i] + table.pdf[i - 1]) * (table.x[i] - table.x[i - 1]);
            }
            table.mass = table.cdf[points_per_dim - 1];
            block.mass *= table.mass;
            block.dims.push_back(std::move(table));
        }
        total_mass_ += block.mass;
        models_.push_back(std::move(block));
    }
    if (!(total_mass_ > 0.0)) {
        throw DegenerateTargetError("GridDensity: density vanishes everywhere");
    }
}

double GridDensity::density(const Parameter& p) const {
    if (p.model < 0 || p.model >= model_count()) return 0.0;
    const ModelBlock& block = models_[static_cast<std::size_t>(p.model)];
    if (block.mass <= 0.0) return 0.0;
    double value = block.scale / total_mass_;
    for (std::size_t d = 0; d < block.dims.size(); ++d) {
        const DimTable& table = block.dims[d];
        const double x = p.coords[static_cast<int>(d)];
        const long n = table.x.size();
        if (x < table.x[0] || x > table.x[n - 1]) return 0.0;
        const auto it = std::upper_bound(table.x.data(), table.x.data() + n, x);
        long cell = std::max(1l, std::min(n - 1, it - table.x.data())) - 1;
        const double t = (x - table.x[cell]) / (table.x[cell + 1] - table.x[cell]);
        value *= table.pdf[cell] + t * (table.pdf[cell + 1] - table.pdf[cell]);
    }
    return value;
}

double GridDensity::sample_dim(const DimTable& table, double u) {
    const long n = table.x.size();
    const double target = u * table.mass;
    // locate the cell, then invert the linear pdf within it
    const auto it = std::upper_bound(table.cdf.data(), table.cdf.data() + n, target);
    long cell = std::max(1l, std::min(n - 1, it - table.cdf.data())) - 1;
    // skip zero-mass cells that upper_bound may land on
    while (cell < n - 2 && table.cdf[cell + 1] <= table.cdf[cell]) ++cell;
    const double h = table.x[cell + 1] - table.x[cell];
    const double p0 = table.pdf[cell];
    const double p1 = table.pdf[cell + 1];
    const double cell_mass = table.cdf[cell + 1] - table.cdf[cell];
    if (cell_mass <= 0.0) return table.x[cell];
    const double frac = (target - table.cdf[cell]) / cell_mass;
    double s;
    const double slope = p1 - p0;
    if (std::abs(slope) < 1e-12 * (p0 + p1)) {
        s = frac;
    } else {
        // solve p0 s + slope s^2 / 2 = frac (p0 + p1) / 2 for s in [0, 1]
        const double disc = p0 * p0 + slope * (p0 + p1) * frac;
        s = (std::sqrt(std::max(0.0, disc)) - p0) / slope;
        s = std::min(1.0, std::max(0.0, s));
    }
    return table.x[cell] + s * h;
}

Parameter GridDensity::sample(RngStream& rng) const {
    int m = 0;
    if (models_.size() > 1) {
        double u = rng.uniform01() * total_mass_;
        while (m + 1 < model_count() && u >= models_[static_cast<std::size_t>(m)].mass) {
            u -= models_[static_cast<std::size_t>(m)].mass;
            ++m;
        }
    }
    const ModelBlock& block = models_[static_cast<std::size_t>(m)];
    Coords c(static_cast<int>(block.dims.size()));
    for (std::size_t d = 0; d < block.dims.size(); ++d) {
        c[static_cast<int>(d)] = sample_dim(block.dims[d], rng.uniform01());
    }
    return Parameter(m, c);
}

double GridDensity::dim_quantile(int m, int dim, double u) const {
    const auto& table = models_[static_cast<std::size_t>(m)].dims[static_cast<std::size_t>(dim)];
    return sample_dim(table, std::min(1.0, std::max(0.0, u)));
}

double GridDensity::dim_cdf(int m, int dim, double x) const {
    const auto& table = models_[static_cast<std::size_t>(m)].dims[static_cast<std::size_t>(dim)];
    const long n = table.x.size();
    if (x <= table.x[0]) return 0.0;
    if (x >= table.x[n - 1]) return 1.0;
    const auto it = std::upper_bound(table.x.data(), table.x.data() + n, x);
    const long cell = std::max(1l, std::min(n - 1, it - table.x.data())) - 1;
    const double h = table.x[cell + 1] - table.x[cell];
    const double t = (x - table.x[cell]) / h;
    const double p0 = table.pdf[cell];
    const double p1 = table.pdf[cell + 1];
    const double partial = h * (p0 * t + 0.5 * (p1 - p0) * t * t);
    return (table.cdf[cell] + partial) / table.mass;
}

}  // namespace lfi
