#include <doctest.h>

#include <cmath>
#include <string>

#include "gebsde/model.hpp"
#include "gebsde/rng.hpp"

using namespace gebsde;

namespace {

std::string ou_config(const std::string& f, const std::string& g, double mu,
                      double lo = 1.0, double hi = 4.0, double L = 1.0) {
    return std::string("[model]\n") +
           "n = 1\nd = 1\n" +
           "b = \"-x1\"\nh = \"0\"\nsigma = \"1\"\n" +
           "f = \"" + f + "\"\ng = \"" + g + "\"\n" +
           "L = " + std::to_string(L) + "\nalpha1 = 0\nalpha2 = 0\n" +
           "mu = " + std::to_string(mu) + "\neta = 1.0\nalpha = 2.0\n" +
           "[uncertainty]\nsigma_lo_sq = " + std::to_string(lo) +
           "\nsigma_hi_sq = " + std::to_string(hi) + "\n";
}

}  // namespace

TEST_CASE("parse_model accepts a well-formed config") {
    ModelSpec m = parse_model(ou_config("1/(1+x1^2)", "0", 0.0));
    CHECK(m.n == 1);
    CHECK(m.d == 1);
    double x = 0.5;
    std::span<const double> xs(&x, 1);
    CHECK(m.b_at(0, xs) == doctest::Approx(-0.5));
    CHECK(m.sigma_at(0, xs) == doctest::Approx(1.0));
    CHECK(m.f(xs, 0.0, {}) == doctest::Approx(0.8));
    CHECK(m.sigma_hi_sq() == doctest::Approx(4.0));
}

TEST_CASE("parse_model rejects unknown variables and missing coefficients") {
    CHECK_THROWS_WITH_AS(parse_model(ou_config("z7", "0", 0.0)),
                         doctest::Contains("unknown variable"), ConfigError);
    std::string no_sigma =
        "[model]\nn = 1\nd = 1\nb = \"-x1\"\nh = \"0\"\nf = \"1\"\ng = \"0\"\n"
        "[uncertainty]\nsigma_lo_sq = 1\nsigma_hi_sq = 4\n";
    CHECK_THROWS_WITH_AS(parse_model(no_sigma),
                         doctest::Contains("missing coefficient sigma"), ConfigError);
}

TEST_CASE("json configs are equivalent") {
    std::string json = R"({
      "model": {"n": 1, "d": 1, "b": "-x1", "h": "0", "sigma": "1",
                 "f": "0.7", "g": "0", "L": 1.0, "eta": 1.0, "alpha": 0.7},
      "uncertainty": {"sigma_lo_sq": 1.0, "sigma_hi_sq": 4.0}
    })";
    ModelSpec m = parse_model(json);
    double x = 2.0;
    std::span<const double> xs(&x, 1);
    CHECK(m.f(xs, 0.0, {}) == doctest::Approx(0.7));
    CHECK(m.eta == doctest::Approx(1.0));
}

TEST_CASE("assumption checks on the dissipative benchmark") {
    ModelSpec m = parse_model(ou_config("1/(1+x1^2)", "0", 0.0, 1.0, 4.0));
    m.alpha = 1.0;
    AssumptionReport rep = check_assumptions(m);
    CHECK(rep.all_hold());
    // linear drift: the B4 secant is exactly -|dx|^2, margin 1 - eta = 0
    CHECK(rep.get("B4").margin == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rep.get("B1").holds);
    CHECK(rep.get("B5").holds);
    CHECK_FALSE(rep.get("H1").checkable);
}

TEST_CASE("y-monotonicity margins") {
    ModelSpec good = parse_model(ou_config("-2*y", "0", 2.0, 1.0, 4.0, 2.0));
    AssumptionReport rep = check_assumptions(good);
    CHECK(rep.get("B3").holds);
    CHECK(rep.get("B3").margin == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rep.get("H3").holds);

    ModelSpec bad = parse_model(ou_config("y", "0", 1.0));
    AssumptionReport rep2 = check_assumptions(bad);
    CHECK_FALSE(rep2.get("B3").holds);
    CHECK_FALSE(rep2.get("B3").witness.empty());
    CHECK(rep2.get("B3").margin < 0.0);
}

namespace {
ControlSpec five_point_spec() {
    ControlSpec c;
    c.points = {{-1.0}, {-0.4}, {0.1}, {0.6}, {0.9}};
    c.m = 1;
    c.n = 1;
    c.d = 1;
    c.kappa = Expression::parse("sin(3*u1) + x1*u1", VarSpec{1, 1, 1});
    c.R = {Expression::parse("0.5*tanh(u1)", VarSpec{0, 0, 1})};
    c.alpha2 = 0.5;
    return c;
}
}  // namespace

TEST_CASE("hamiltonian driver: singleton and sign selection") {
    ControlSpec single;
    single.points = {{0.3}};
    single.m = single.n = single.d = 1;
    single.kappa = Expression::parse("x1 + u1", VarSpec{1, 1, 1});
    single.R = {Expression::parse("u1", VarSpec{0, 0, 1})};
    single.alpha2 = 0.3;
    DriverFn f = hamiltonian_from_control(single);
    double x = 1.0, z = 2.0;
    std::span<const double> xs(&x, 1), zs(&z, 1);
    CHECK(f(xs, 0.0, zs) == doctest::Approx(1.3 + 0.3 * 2.0));

    ControlSpec pm;
    pm.points = {{-1.0}, {1.0}};
    pm.m = pm.n = pm.d = 1;
    pm.kappa = Expression::parse("0", VarSpec{1, 1, 1});
    pm.R = {Expression::parse("u1", VarSpec{0, 0, 1})};
    pm.alpha2 = 1.0;
    DriverFn habs = hamiltonian_from_control(pm);
    for (double zz : {-2.0, -0.3, 0.0, 1.7}) {
        std::span<const double> zspan(&zz, 1);
        CHECK(habs(xs, 0.0, zspan) == doctest::Approx(-std::fabs(zz)));
    }
}

TEST_CASE("hamiltonian equals the explicit enumeration") {
    ControlSpec c = five_point_spec();
    DriverFn f = hamiltonian_from_control(c);
    double x = 0.3, z = -1.2;
    std::span<const double> xs(&x, 1), zs(&z, 1);
    double expect = 1e300;
    for (std::size_t k = 0; k < c.points.size(); ++k) {
        double u = c.points[k][0];
        double val = std::sin(3.0 * u) + x * u + 0.5 * std::tanh(u) * z;
        expect = std::min(expect, val);
    }
    CHECK(f(xs, 0.0, zs) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("hamiltonian is concave in z") {
    ControlSpec c = five_point_spec();
    DriverFn f = hamiltonian_from_control(c);
    Rng rng(9);
    for (int k = 0; k < 500; ++k) {
        double x = 2.0 * (rng.uniform() - 0.5);
        double z1 = 4.0 * (rng.uniform() - 0.5), z2 = 4.0 * (rng.uniform() - 0.5);
        double t = rng.uniform();
        double zm = t * z1 + (1.0 - t) * z2;
        std::span<const double> xs(&x, 1);
        std::span<const double> s1(&z1, 1), s2(&z2, 1), sm(&zm, 1);
        CHECK(f(xs, 0.0, sm) >= t * f(xs, 0.0, s1) + (1.0 - t) * f(xs, 0.0, s2) - 1e-12);
    }
}

TEST_CASE("hamiltonian preconditions") {
    ControlSpec empty;
    empty.m = empty.n = empty.d = 1;
    empty.kappa = Expression::parse("0", VarSpec{1, 1, 1});
    empty.R = {Expression::parse("u1", VarSpec{0, 0, 1})};
    empty.alpha2 = 1.0;
    CHECK_THROWS_AS(hamiltonian_from_control(empty), ConfigError);

    ControlSpec wide = five_point_spec();
    wide.alpha2 = 0.1;  // tanh(0.9)/2 > 0.1
    CHECK_THROWS_WITH_AS(hamiltonian_from_control(wide), doctest::Contains("alpha2"),
                         ConfigError);
}
