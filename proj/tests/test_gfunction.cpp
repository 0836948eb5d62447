#include <doctest.h>

#include <cmath>

#include "gebsde/gfunction.hpp"
#include "gebsde/rng.hpp"

using namespace gebsde;

TEST_CASE("scalar generator branches") {
    GFunction g(UncertaintyInterval(1.0, 4.0));
    CHECK(g(2.0) == doctest::Approx(4.0));
    CHECK(g(-2.0) == doctest::Approx(-1.0));
    CHECK(g(0.0) == 0.0);
}

TEST_CASE("classical reduction collapses to half the trace") {
    for (double s : {0.5, 1.0, 3.0}) {
        GFunction g(UncertaintyInterval(s, s));
        for (double a : {-3.0, -0.2, 0.0, 1.7})
            CHECK(g(a) == doctest::Approx(0.5 * s * a));
    }
}

TEST_CASE("dissipativity margin examples") {
    GFunction g(UncertaintyInterval(1.0, 4.0));
    CHECK(g.dissipativity_margin(-1.0, 0.0) == doctest::Approx(-1.0));
    CHECK(g.dissipativity_margin(-5.0, 1.0) == doctest::Approx(-1.0));
    CHECK(g.dissipativity_margin(-1.0, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("interval invariants are enforced") {
    CHECK_THROWS_AS(UncertaintyInterval(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(UncertaintyInterval(2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(UncertaintyInterval(1.0, 2.0, 3), ConfigError);
    GFunction g1(UncertaintyInterval(1.0, 2.0, 1));
    CHECK_THROWS_AS(g1(Sym2{1.0, 1.0, 0.0}), ConfigError);
    GFunction g2(UncertaintyInterval(1.0, 2.0, 2));
    CHECK_THROWS_AS(g2(1.0), ConfigError);
}

TEST_CASE("sublinearity and positive homogeneity hold exactly") {
    GFunction g(UncertaintyInterval(0.7, 3.1));
    Rng rng(2024);
    for (int k = 0; k < 10000; ++k) {
        double a = 6.0 * (rng.uniform() - 0.5);
        double b = 6.0 * (rng.uniform() - 0.5);
        double t = 3.0 * rng.uniform();
        CHECK(g(a + b) <= g(a) + g(b) + 1e-14);
        CHECK(g(t * a) == doctest::Approx(t * g(a)).epsilon(1e-13));
        if (a >= b) {
            double diff = g(a) - g(b);
            CHECK(diff >= 0.5 * 0.7 * (a - b) - 1e-12);
            CHECK(diff <= 0.5 * 3.1 * (a - b) + 1e-12);
        }
    }
}

TEST_CASE("sandwich inequality on random ordered pairs, d = 2") {
    GFunction g(UncertaintyInterval(0.5, 2.5, 2));
    Rng rng(77);
    for (int k = 0; k < 10000; ++k) {
        // A >= B via A = B + positive-semidefinite diagonal bump
        Sym2 b{4.0 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5), 0.0};
        double e1 = 2.0 * rng.uniform(), e2 = 2.0 * rng.uniform();
        Sym2 a{b.a11 + e1, b.a22 + e2, 0.0};
        double diff = g(a) - g(b);
        double tr = e1 + e2;
        CHECK(diff >= 0.5 * 0.5 * tr - 1e-12);
        CHECK(diff <= 0.5 * 2.5 * tr + 1e-12);
    }
}

TEST_CASE("generator equals the brute-force sup over covariance levels") {
    GFunction g(UncertaintyInterval(1.0, 4.0));
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        double a = 10.0 * (rng.uniform() - 0.5);
        double best = -1e300;
        for (int i = 0; i < 64; ++i) {
            double v = 1.0 + 3.0 * i / 63.0;
            best = std::max(best, 0.5 * a * v);
        }
        CHECK(std::fabs(g(a) - best) <= 1e-12);
    }
}
