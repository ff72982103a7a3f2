#include "lfi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace lfi::quad {
namespace {

// Kronrod 15 abscissae on [-1, 1] (positive half) and weights; the
// even-indexed abscissae form the embedded 7-point Gauss rule.
constexpr double kXgk15[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000,
};
constexpr double kWgk15[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};
constexpr double kWg7[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

// Kronrod 21 abscissae (positive half) and weights; embedded 10-point Gauss.
constexpr double kXgk21[11] = {
    0.995657163025808, 0.973906528517172, 0.930157491355708, 0.865063366688985,
    0.780817726586417, 0.679409568299024, 0.562757134668605, 0.433395394129247,
    0.294392862701460, 0.148874338981631, 0.000000000000000,
};
constexpr double kWgk21[11] = {
    0.011694638867371, 0.032558162307964, 0.054755896574352, 0.075039674810919,
    0.093125454583697, 0.109387158802298, 0.123491976262066, 0.134709217311473,
    0.142775938577060, 0.147739104901338, 0.149445554002917,
};
constexpr double kWg10[5] = {
    0.066671344308688, 0.149451349150581, 0.219086362515982, 0.269266719309996,
    0.295524224714753,
};

template <int Points>
double panel(const Fn& f, double lo, double hi, const double* xgk, const double* wgk,
             const double* wg, double* error) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < Points; ++i) {
        const double x = xgk[i];
        double value;
        if (x == 0.0) {
            value = f(center);
        } else {
            value = f(center - half * x) + f(center + half * x);
        }
        kronrod += wgk[i] * value;
        if (i % 2 == 1) gauss += wg[i / 2] * value;  // odd indices hold the Gauss nodes
    }
    kronrod *= half;
    gauss *= half;
    if (error != nullptr) *error = std::abs(kronrod - gauss);
    return kronrod;
}

}  // namespace

double gauss_kronrod_15(const Fn& f, double lo, double hi, double* error) {
    return panel<8>(f, lo, hi, kXgk15, kWgk15, kWg7, error);
}

double gauss_kronrod_21(const Fn& f, double lo, double hi, double* error) {
    return panel<11>(f, lo, hi, kXgk21, kWgk21, kWg10, error);
}

Result integrate(const Fn& f, double lo, double hi, double abs_tol, double rel_tol, int max_depth) {
    struct Segment {
        double lo, hi, value, error;
        int depth;
    };

    Result out;
    if (lo == hi) return out;

    double err0 = 0.0;
    const double v0 = gauss_kronrod_21(f, lo, hi, &err0);
    out.evaluations = 21;

    std::vector<Segment> active{{lo, hi, v0, err0, 0}};
    double total = v0;
    double total_err = err0;

    // Repeatedly bisect the segment with the largest local error estimate.
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        auto worst = std::max_element(active.begin(), active.end(),
                                      [](const Segment& a, const Segment& b) { return a.error < b.error; });
        if (worst->depth >= max_depth || worst->hi - worst->lo < 1e-15 * (hi - lo)) {
            out.converged = false;
            break;
        }
        const Segment seg = *worst;
        active.erase(worst);
        const double mid = 0.5 * (seg.lo + seg.hi);
        double err_l = 0.0, err_r = 0.0;
        const double v_l = gauss_kronrod_21(f, seg.lo, mid, &err_l);
        const double v_r = gauss_kronrod_21(f, mid, seg.hi, &err_r);
        out.evaluations += 42;
        total += v_l + v_r - seg.value;
        total_err += err_l + err_r - seg.error;
        active.push_back({seg.lo, mid, v_l, err_l, seg.depth + 1});
        active.push_back({mid, seg.hi, v_r, err_r, seg.depth + 1});
        if (active.size() > 20000) {
            out.converged = false;
            break;
        }
    }

    out.value = total;
    out.error = total_err;
    return out;
}

double fixed_gauss_kronrod(const Fn& f, double lo, double hi, int min_nodes) {
    const int panels = std::max(1, (min_nodes + 20) / 21);
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        total += gauss_kronrod_21(f, lo + k * width, lo + (k + 1) * width);
    }
    return total;
}

Result integrate_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi,
                    double y_lo, double y_hi, double abs_tol, double rel_tol) {
    long evals = 0;
    bool inner_ok = true;
    const Fn outer = [&](double x) {
        Result inner = integrate([&](double y) { return f(x, y); }, y_lo, y_hi, abs_tol * 1e-2,
                                 rel_tol * 1e-2);
        evals += inner.evaluations;
        inner_ok = inner_ok && inner.converged;
        return inner.value;
    };
    Result out = integrate(outer, x_lo, x_hi, abs_tol, rel_tol);
    out.evaluations = evals;
    out.converged = out.converged && inner_ok;
    return out;
}

}  // namespace lfi::quad
