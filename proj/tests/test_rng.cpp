#include <doctest.h>

#include <cmath>
#include <vector>

#include "lfi/rng.hpp"

using lfi::RngStream;
using lfi::derive_stream;

TEST_CASE("identical seeds give identical sequences") {
    RngStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("derived streams are reproducible and distinct") {
    RngStream a = derive_stream(7, "experiment", 3, 1);
    RngStream b = derive_stream(7, "experiment", 3, 1);
    RngStream c = derive_stream(7, "experiment", 4, 1);
    RngStream d = derive_stream(7, "other", 3, 1);
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    CHECK(x != d.next());
}

TEST_CASE("uniform01 lies in [0, 1) and has the right mean") {
    RngStream rng(1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.003);  // ~4.6 sigma
}

TEST_CASE("normal moments") {
    RngStream rng(2);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("bernoulli frequency") {
    RngStream rng(3);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
    CHECK(std::abs(hits / static_cast<double>(n) - 0.3) < 0.006);
}
