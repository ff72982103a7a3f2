#include "lfi/estimators.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lfi/quadrature.hpp"

namespace lfi {

Eigen::VectorXd WeightedParticles::weights() const {
    Eigen::VectorXd w(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) w[static_cast<long>(i)] = entries_[i].weight;
    return w;
}

double WeightedParticles::total_weight() const {
    double total = 0.0;
    for (const auto& e : entries_) total += e.weight;
    return total;
}

long WeightedParticles::accepted_count() const {
    long n = 0;
    for (const auto& e : entries_) n += e.accepted ? 1 : 0;
    return n;
}

void CountTable::validate() const {
    if (n.size() != n_star.size()) throw Error("CountTable: n and n_star must share length");
    for (long i = 0; i < n.size(); ++i) {
        if (n[i] < 0 || n_star[i] < 0 || n_star[i] > n[i]) {
            throw Error("CountTable: requires 0 <= n_star_i <= n_i");
        }
    }
}

double weighted_expectation(const WeightedParticles& particles, const TargetFunction& f) {
    if (particles.empty()) throw Error("weighted_expectation: no particles");
    double num = 0.0;
    double den = 0.0;
    for (const auto& e : particles) {
        if (e.weight == 0.0) continue;
        num += e.weight * f(e.theta);
        den += e.weight;
    }
    if (den <= 0.0) throw ZeroTotalWeightError("weighted_expectation: total weight is zero");
    return num / den;
}

Eigen::VectorXd weighted_posterior(const WeightedParticles& particles, const DiscreteProblem& problem) {
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(problem.size());
    double total = 0.0;
    for (const auto& e : particles) {
        if (e.weight == 0.0) continue;
        for (int i = 0; i < problem.size(); ++i) {
            if (e.theta.x() == problem.values()[i]) {
                mass[i] += e.weight;
                break;
            }
        }
        total += e.weight;
    }
    if (total <= 0.0) throw ZeroTotalWeightError("weighted_posterior: total weight is zero");
    return mass / total;
}

Eigen::VectorXd mle_posterior(const CountTable& counts, const DiscreteProblem& problem) {
    counts.validate();
    if (counts.n.size() != problem.size()) throw Error("mle_posterior: count table size mismatch");
    if ((counts.n.array() < 1).any()) {
        throw UndefinedLikelihoodError("mle_posterior: every parameter needs n_i >= 1");
    }
    const Eigen::ArrayXd p_hat = counts.n_star.cast<double>().array() / counts.n.cast<double>().array();
    const Eigen::ArrayXd unnorm = problem.prior().array() * p_hat;
    const double z = unnorm.sum();
    if (z <= 0.0) throw DegenerateEstimateError("mle_posterior: zero plug-in evidence");
    return (unnorm / z).matrix();
}

WeightedParticles particles_from_counts(const DiscreteProblem& problem, const CountTable& counts) {
    counts.validate();
    WeightedParticles particles;
    particles.reserve(static_cast<std::size_t>(counts.total()));
    for (int i = 0; i < problem.size(); ++i) {
        const double w = problem.prior()[i] / static_cast<double>(counts.n[i]);
        for (int j = 0; j < counts.n[i]; ++j) {
            const bool accepted = j < counts.n_star[i];
            particles.add(problem.parameter(i), accepted ? w : 0.0, accepted);
        }
    }
    return particles;
}

double kernel_posterior_expectation(const WeightedParticles& particles,
                                    const ContinuousProblem& problem, const TargetFunction& f,
                                    double bandwidth, int quad_order,
                                    KernelDiagnostics* diagnostics) {
    if (problem.model_count() != 1 || problem.models()[0].dims() != 1) {
        throw Error("kernel_posterior_expectation: 1-D single-model problems only");
    }
    if (bandwidth <= 0.0) throw Error("kernel_posterior_expectation: bandwidth must be positive");
    if (particles.size() < 2) throw Error("kernel_posterior_expectation: needs at least two particles");

    std::vector<double> xs;
    std::vector<double> acc;
    xs.reserve(particles.size());
    acc.reserve(particles.size());
    for (const auto& e : particles) {
        xs.push_back(e.theta.x());
        acc.push_back(e.accepted ? 1.0 : 0.0);
    }

    KernelDiagnostics local;
    const auto likelihood_hat = [&](double t) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double z = (t - xs[i]) / bandwidth;
            const double k = std::exp(-0.5 * z * z);
            num += acc[i] * k;
            den += k;
        }
        if (den <= std::numeric_limits<double>::min()) {
            ++local.underflow_nodes;
            return 0.0;
        }
        return num / den;
    };

    const ModelSpace& space = problem.models()[0];
    const auto at = [](double t) { return Parameter(t); };
    const double num = quad::fixed_gauss_kronrod(
        [&](double t) { return f(at(t)) * likelihood_hat(t) * problem.prior_density(at(t)); },
        space.lower[0], space.upper[0], quad_order);
    const double den = quad::fixed_gauss_kronrod(
        [&](double t) { return likelihood_hat(t) * problem.prior_density(at(t)); }, space.lower[0],
        space.upper[0], quad_order);
    if (diagnostics != nullptr) *diagnostics = local;
    if (den <= 0.0) throw ZeroTotalWeightError("kernel_posterior_expectation: zero integrated mass");
    return num / den;
}

void write_particles_csv(std::ostream& out, const WeightedParticles& particles) {
    int dims = 1;
    bool has_model = false;
    for (const auto& e : particles) {
        dims = std::max(dims, static_cast<int>(e.theta.coords.size()));
        has_model = has_model || e.theta.model != 0;
    }
    out << (dims == 1 ? "theta" : "theta1,theta2");
    if (has_model) out << ",model";
    out << ",weight,round,accepted\n";
    out.precision(17);
    for (const auto& e : particles) {
        out << e.theta.x(0);
        if (dims == 2) out << ',' << (e.theta.coords.size() > 1 ? e.theta.x(1) : 0.0);
        if (has_model) out << ',' << e.theta.model;
        out << ',' << e.weight << ',' << e.round << ',' << (e.accepted ? 1 : 0) << '\n';
    }
}

WeightedParticles read_particles_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error("read_particles_csv: empty stream");
    std::vector<std::string> columns;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) columns.push_back(col);
    }
    const int dims = columns.size() > 0 && columns[0] == "theta1" ? 2 : 1;
    bool has_model = false;
    for (const auto& c : columns) has_model = has_model || c == "model";

    WeightedParticles particles;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(ss, field, ',')) values.push_back(std::stod(field));
        std::size_t idx = 0;
        Coords c(dims);
        for (int d = 0; d < dims; ++d) c[d] = values.at(idx++);
        const int model = has_model ? static_cast<int>(values.at(idx++)) : 0;
        const double weight = values.at(idx++);
        const int round = static_cast<int>(values.at(idx++));
        const bool accepted = values.at(idx++) != 0.0;
        particles.add(Parameter(model, c), weight, accepted, round);
    }
    return particles;
}

}  // namespace lfi
