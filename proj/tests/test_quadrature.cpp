#include <doctest.h>

#include <cmath>

#include "lfi/quadrature.hpp"

namespace quad = lfi::quad;

TEST_CASE("single panels integrate polynomials exactly") {
    // K15 is exact through degree 22, K21 through degree 31
    // poly7(x) = x^5 + x^4 - 2 x^3 + 1/2; odd terms vanish on [-1, 1]
    const auto poly7 = [](double x) { return ((x + 1) * x - 2) * x * x * x + 0.5; };
    const double exact = 2.0 / 5.0 + 1.0;
    CHECK(quad::gauss_kronrod_15(poly7, -1.0, 1.0) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(quad::gauss_kronrod_21(poly7, -1.0, 1.0) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("single panels match analytic integrals of smooth functions") {
    const double a = 0.25, b = 2.0;
    const double exact = std::sin(b) - std::sin(a);
    double err = 0.0;
    CHECK(quad::gauss_kronrod_21([](double x) { return std::cos(x); }, a, b, &err) ==
          doctest::Approx(exact).epsilon(1e-13));
    CHECK(err < 1e-10);
    CHECK(quad::gauss_kronrod_15([](double x) { return std::exp(x); }, 0.0, 1.0) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("adaptive integration handles kinks and jumps") {
    const auto kink = [](double x) { return std::abs(x) * std::exp(-std::abs(x) / 2.0); };
    // int |x| e^{-|x|/2} over [-10, 10] = 2 * (4 - e^{-5}(2*5 + 4))
    const double exact = 2.0 * (4.0 - std::exp(-5.0) * 14.0);
    const auto r = quad::integrate(kink, -10.0, 10.0, 1e-12, 1e-11);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));

    const auto step = [](double x) { return x < 0.5 ? 1.0 : 0.0; };
    const auto s = quad::integrate(step, 0.0, 1.0, 1e-10, 1e-9);
    CHECK(s.value == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("fixed rule uses enough panels") {
    const auto f = [](double x) { return std::exp(-x * x / 2.0); };
    const double reference = quad::integrate(f, -5.0, 5.0, 1e-13, 1e-12).value;
    CHECK(quad::fixed_gauss_kronrod(f, -5.0, 5.0, 20) == doctest::Approx(reference).epsilon(1e-8));
    CHECK(quad::fixed_gauss_kronrod(f, -5.0, 5.0, 63) == doctest::Approx(reference).epsilon(1e-10));
}

TEST_CASE("2-D iterated quadrature on a separable integrand") {
    const auto f = [](double x, double y) { return std::exp(-(x * x + y * y) / 2.0); };
    const auto r = quad::integrate_2d(f, -8.0, 8.0, -8.0, 8.0, 1e-10, 1e-9);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0 * std::acos(-1.0)).epsilon(1e-8));
}
