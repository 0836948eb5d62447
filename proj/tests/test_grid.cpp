#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gebsde/grid.hpp"

using namespace gebsde;

TEST_CASE("axis snapping and node counts") {
    Grid g(-1.0, 1.0, 0.1);
    CHECK(g.nodes[0] == 21);
    CHECK(g.hi[0] == doctest::Approx(1.0));
    CHECK(g.coord(0, 10) == doctest::Approx(0.0).epsilon(1e-14));

    Grid s = Grid::symmetric(3.95, 0.1);
    CHECK(s.lo[0] == doctest::Approx(-4.0));
    CHECK(s.nodes[0] == 81);

    CHECK_THROWS_AS(Grid(1.0, -1.0, 0.1), ConfigError);
    CHECK_THROWS_AS(Grid(0.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("dissipative box sizing") {
    Grid g = Grid::dissipative_box(1.0, 0.0, 0.1);
    CHECK(g.hi[0] >= 8.0);
    Grid g2 = Grid::dissipative_box(4.0, 1.0, 0.1);
    CHECK(g2.hi[0] >= 8.0);  // max(8/eta, 4) * (1 + |x|)
    CHECK_THROWS_AS(Grid::dissipative_box(0.0, 0.0, 0.1), ConfigError);
}

TEST_CASE("multilinear interpolation is exact on affine data") {
    Grid g(-2.0, 2.0, 0.25);
    Field f(g);
    for (int i = 0; i < g.nodes[0]; ++i) f.at(i) = 3.0 * g.coord(0, i) - 1.0;
    CHECK(f.interp(0.37) == doctest::Approx(3.0 * 0.37 - 1.0).epsilon(1e-14));
    CHECK(f.interp(-1.99) == doctest::Approx(3.0 * -1.99 - 1.0).epsilon(1e-12));
    CHECK(f.gradient_at(0.3)[0] == doctest::Approx(3.0).epsilon(1e-12));

    Grid g2(-1.0, 1.0, 0.25, -1.0, 1.0, 0.5);
    Field f2(g2);
    for (int j = 0; j < g2.nodes[1]; ++j)
        for (int i = 0; i < g2.nodes[0]; ++i)
            f2.at(i, j) = 2.0 * g2.coord(0, i) - 0.5 * g2.coord(1, j) + 0.25;
    CHECK(f2.interp(0.1, -0.3) == doctest::Approx(2.0 * 0.1 + 0.15 + 0.25).epsilon(1e-13));
    auto gr = f2.gradient_at(0.1, -0.3);
    CHECK(gr[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gr[1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("field csv format") {
    Grid g(0.0, 1.0, 0.5);
    Field f(g);
    f.at(0) = 1.0; f.at(1) = 2.0; f.at(2) = 3.0;
    std::ostringstream os;
    f.write_csv(os);
    std::string text = os.str();
    CHECK(text.rfind("# grid 0 1 0.5\n", 0) == 0);
    CHECK(text.find("0.5,2\n") != std::string::npos);

    TimeField tf(g);
    tf.add_slice(0.0, {1.0, 2.0, 3.0});
    tf.add_slice(1.0, {0.0, 0.0, 0.0});
    std::ostringstream os2;
    tf.write_csv(os2);
    CHECK(os2.str().rfind("# grid 0 1 0.5 t\n", 0) == 0);
    CHECK(os2.str().find("0.5,0,2\n") != std::string::npos);
}

TEST_CASE("boundary policy names") {
    CHECK(boundary_policy_from_string("linear-extrapolation") == BoundaryPolicy::LinearExtrapolation);
    CHECK(boundary_policy_from_string("clamped-gradient") == BoundaryPolicy::ClampedGradient);
    CHECK_THROWS_AS(boundary_policy_from_string("periodic"), ConfigError);
    CHECK(to_string(BoundaryPolicy::ClampedGradient) == "clamped-gradient");
}

TEST_CASE("sup norms and shifts") {
    Grid g(-1.0, 1.0, 0.5);
    Field f(g);
    f.at(0) = -3.0; f.at(4) = 2.0;
    CHECK(f.sup_norm() == doctest::Approx(3.0));
    Field s = f + 1.0;
    CHECK(s.at(0) == doctest::Approx(-2.0));
    CHECK(f.max_abs_diff(s) == doctest::Approx(1.0));
    CHECK(f.all_finite());
}
