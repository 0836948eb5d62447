#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "gebsde/control.hpp"

using namespace gebsde;

namespace {

ModelSpec base_model(double alpha2 = 0.5) {
    return parse_model(
        "[model]\nn = 1\nd = 1\nb = \"-x1\"\nh = \"0\"\nsigma = \"1\"\n"
        "f = \"0\"\ng = \"0\"\n"
        "L = 1\nalpha1 = 0\nalpha2 = " + std::to_string(alpha2) + "\n"
        "mu = 0\neta = 1\nalpha = 1\n"
        "[uncertainty]\nsigma_lo_sq = 1\nsigma_hi_sq = 4\n");
}

ControlSpec two_point() {
    ControlSpec c;
    c.points = {{-1.0}, {1.0}};
    c.m = c.n = c.d = 1;
    c.kappa = Expression::parse("0", VarSpec{1, 1, 1});
    c.R = {Expression::parse("u1", VarSpec{0, 0, 1})};
    c.alpha2 = 1.0;
    return c;
}

}  // namespace

TEST_CASE("singleton control set yields a constant feedback") {
    ControlSpec c;
    c.points = {{0.25}};
    c.m = c.n = c.d = 1;
    c.kappa = Expression::parse("x1^2 + u1", VarSpec{1, 1, 1});
    c.R = {Expression::parse("u1", VarSpec{0, 0, 1})};
    c.alpha2 = 0.25;

    Grid grid(-2.0, 2.0, 0.1);
    ErgodicSolution sol;
    sol.v = Field(grid, 0.0);
    ModelSpec m = base_model(0.25);
    FeedbackTable fb = optimal_feedback(c, sol, m);
    for (std::size_t i : fb.u_index) CHECK(i == 0);
}

TEST_CASE("sign feedback minimizes R(u) z") {
    ControlSpec c = two_point();
    Grid grid(-3.0, 3.0, 0.1);
    ErgodicSolution sol;
    sol.v = Field(grid);
    for (int i = 0; i < grid.nodes[0]; ++i) sol.v.at(i) = std::sin(grid.coord(0, i));
    ModelSpec m = base_model(1.0);
    FeedbackTable fb = optimal_feedback(c, sol, m);
    for (int i = 1; i + 1 < grid.nodes[0]; ++i) {
        double z = sol.v.gradient_node(i)[0];  // sigma = 1
        if (std::fabs(z) < 1e-9) continue;
        std::size_t want = z > 0.0 ? 0 : 1;  // minimize u*z over {-1, +1}
        CHECK(fb.u_index[static_cast<std::size_t>(i)] == want);
    }
}

TEST_CASE("argmin equals the explicit enumeration at a node") {
    ControlSpec c;
    c.points = {{-1.0}, {-0.4}, {0.1}, {0.6}, {0.9}};
    c.m = c.n = c.d = 1;
    c.kappa = Expression::parse("sin(3*u1) + x1*u1", VarSpec{1, 1, 1});
    c.R = {Expression::parse("0.5*tanh(u1)", VarSpec{0, 0, 1})};
    c.alpha2 = 0.5;

    Grid grid(-2.0, 2.0, 0.2);  // contains x = 0.4
    ErgodicSolution sol;
    sol.v = Field(grid);
    for (int i = 0; i < grid.nodes[0]; ++i) sol.v.at(i) = 0.3 * grid.coord(0, i) * grid.coord(0, i);
    ModelSpec m = base_model(0.5);
    FeedbackTable fb = optimal_feedback(c, sol, m);

    int node = static_cast<int>(std::lround((0.4 - grid.lo[0]) / grid.h[0]));
    double x = grid.coord(0, node);
    double z = sol.v.gradient_node(node)[0];
    std::size_t best = 0;
    double best_val = 1e300;
    for (std::size_t k = 0; k < c.points.size(); ++k) {
        double u = c.points[k][0];
        double val = std::sin(3.0 * u) + x * u + 0.5 * std::tanh(u) * z;
        if (val < best_val) { best_val = val; best = k; }
    }
    CHECK(fb.u_index[static_cast<std::size_t>(node)] == best);
}

TEST_CASE("feedback attains the hamiltonian exactly") {
    ControlSpec c = two_point();
    c.kappa = Expression::parse("1/(1+x1^2) + 0.1*u1", VarSpec{1, 1, 1});
    ModelSpec m = base_model(1.0);
    m.f = hamiltonian_from_control(c);

    Grid grid(-3.0, 3.0, 0.1);
    ErgodicSolution sol;
    sol.v = Field(grid);
    for (int i = 0; i < grid.nodes[0]; ++i) sol.v.at(i) = 0.1 * std::cos(grid.coord(0, i));
    FeedbackTable fb = optimal_feedback(c, sol, m);
    for (int i = 0; i < grid.nodes[0]; ++i) {
        double x = grid.coord(0, i);
        std::span<const double> xs(&x, 1);
        double z = m.sigma_at(0, xs) * sol.v.gradient_node(i)[0];
        std::span<const double> zs(&z, 1);
        std::size_t k = fb.u_index[static_cast<std::size_t>(i)];
        double attained = c.kappa_at(xs, k) + c.R_at(k)[0] * z;
        CHECK(attained == m.f(xs, 0.0, zs));  // argmin attains the min, bitwise
    }
}

TEST_CASE("constant running cost gives J equal to the cost") {
    ControlSpec c = two_point();
    c.kappa = Expression::parse("0.4", VarSpec{1, 1, 1});
    ModelSpec m = base_model(1.0);
    Grid grid(-3.0, 3.0, 0.1);
    FeedbackTable fb;
    for (int i = 0; i < grid.nodes[0]; ++i) {
        fb.xs.push_back(grid.coord(0, i));
        fb.u_index.push_back(i % 2);
    }
    Grid lattice(-5.0, 5.0, 0.1);
    CostEstimate est = evaluate_J(m, c, fb, 0.0, {1.0, 2.0}, lattice);
    CHECK(est.extrapolated == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(est.J[0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("nearest-node lookup and csv round trip") {
    FeedbackTable fb;
    fb.xs = {-1.0, 0.0, 1.0};
    fb.u_index = {2, 0, 1};
    CHECK(fb.nearest(-0.9) == 2);
    CHECK(fb.nearest(0.4) == 0);
    CHECK(fb.nearest(0.6) == 1);
    CHECK(fb.nearest(100.0) == 1);

    ControlSpec c = two_point();
    c.points = {{-1.0}, {1.0}, {2.0}};
    c.alpha2 = 2.0;
    std::ostringstream os;
    fb.write_csv(os, c);
    CHECK(os.str().rfind("x,u_index,u_value\n", 0) == 0);
    CHECK(os.str().find("0,0,-1\n") != std::string::npos);
}
