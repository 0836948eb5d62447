#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gebsde/control.hpp"
#include "gebsde/ergodic.hpp"
#include "gebsde/mc_oracle.hpp"
#include "gebsde/model.hpp"
#include "gebsde/pde.hpp"

namespace py = pybind11;
using namespace gebsde;

namespace {

std::vector<double> axis_nodes(const Grid& g) {
    std::vector<double> xs(static_cast<std::size_t>(g.nodes[0]));
    for (int i = 0; i < g.nodes[0]; ++i) xs[static_cast<std::size_t>(i)] = g.coord(0, i);
    return xs;
}

Expression parse_payoff(const ModelSpec& m, const std::string& text) {
    return Expression::parse(text, VarSpec{m.n, m.d, 0});
}

Grid make_grid(double x_lo, double x_hi, double h, double dt, const std::string& boundary) {
    return Grid(x_lo, x_hi, h, dt, boundary_policy_from_string(boundary));
}

}  // namespace

PYBIND11_MODULE(_gebsde, mod) {
    mod.doc() = "fully nonlinear PDE / ergodic BSDE toolkit under volatility uncertainty";

    py::register_exception<ConfigError>(mod, "ConfigError");
    py::register_exception<EvalError>(mod, "EvalError");
    py::register_exception<NumericalError>(mod, "NumericalError");

    py::class_<Grid>(mod, "Grid")
        .def(py::init(&make_grid), py::arg("x_lo"), py::arg("x_hi"), py::arg("h"),
             py::arg("dt") = 0.0, py::arg("boundary") = "linear-extrapolation")
        .def_property_readonly("nodes", [](const Grid& g) { return g.nodes[0]; })
        .def_property_readonly("xs", &axis_nodes);

    py::class_<Field>(mod, "Field")
        .def_property_readonly("xs", [](const Field& f) { return axis_nodes(f.grid()); })
        .def_property_readonly("values", [](const Field& f) { return f.values(); })
        .def("interp", [](const Field& f, double x) { return f.interp(x); })
        .def("gradient", [](const Field& f, double x) { return f.gradient_at(x)[0]; })
        .def("sup_norm", &Field::sup_norm);

    py::class_<ModelSpec>(mod, "Model")
        .def_property_readonly("n", [](const ModelSpec& m) { return m.n; })
        .def_property_readonly("sigma_lo_sq", &ModelSpec::sigma_lo_sq)
        .def_property_readonly("sigma_hi_sq", &ModelSpec::sigma_hi_sq);

    mod.def("g_eval", [](double lo_sq, double hi_sq, double a) {
        return GFunction(UncertaintyInterval(lo_sq, hi_sq))(a);
    }, py::arg("sigma_lo_sq"), py::arg("sigma_hi_sq"), py::arg("a"));

    mod.def("dissipativity_margin", [](double lo_sq, double hi_sq, double g1, double g2) {
        return GFunction(UncertaintyInterval(lo_sq, hi_sq)).dissipativity_margin(g1, g2);
    }, py::arg("sigma_lo_sq"), py::arg("sigma_hi_sq"), py::arg("gamma1"), py::arg("gamma2"));

    mod.def("parse_model", &parse_model, py::arg("config_text"));

    mod.def("check_assumptions", [](const ModelSpec& m) {
        AssumptionReport rep = check_assumptions(m);
        py::dict out;
        out["all_hold"] = rep.all_hold();
        out["text"] = rep.to_text();
        return out;
    }, py::arg("model"));

    mod.def("solve_parabolic", [](const ModelSpec& m, const std::string& phi, double T,
                                  const Grid& grid) {
        Field f = Field::from_expression(grid, parse_payoff(m, phi));
        return solve_parabolic(m, f, T, grid).front_field();
    }, py::arg("model"), py::arg("phi"), py::arg("T"), py::arg("grid"));

    mod.def("solve_finite_bsde", [](const ModelSpec& m, const std::string& phi, double T,
                                    double x, const Grid& grid) {
        Field f = Field::from_expression(grid, parse_payoff(m, phi));
        auto v = solve_finite_bsde(m, f, T, {x, 0.0}, grid);
        return py::make_tuple(v.y0, v.z0[0]);
    }, py::arg("model"), py::arg("phi"), py::arg("T"), py::arg("x"), py::arg("grid"));

    mod.def("solve_infinite", [](const ModelSpec& m, double tol, const Grid& grid) {
        return solve_infinite(m, tol, grid);
    }, py::arg("model"), py::arg("tol"), py::arg("grid"));

    mod.def("solve_discounted", &solve_discounted, py::arg("model"), py::arg("eps"),
            py::arg("gamma1"), py::arg("gamma2"), py::arg("grid"), py::arg("tol"));

    mod.def("residual_norm", [](const ModelSpec& m, const Field& u, double lambda,
                                double gamma1, double gamma2) {
        return core_sup_norm(residual(m, u, lambda, gamma1, gamma2));
    }, py::arg("model"), py::arg("u"), py::arg("lam"), py::arg("gamma1"), py::arg("gamma2"));

    mod.def("vanishing_discount", [](const ModelSpec& m, double gamma1, double gamma2,
                                     const Grid& grid, double eps0, double ratio, int count,
                                     double tol_lambda) {
        ErgodicProblem p{m, gamma1, gamma2};
        ErgodicSolution sol = vanishing_discount(
            p, DiscountSchedule::geometric(eps0, ratio, count, tol_lambda), grid);
        py::dict out;
        out["lambda"] = sol.lambda;
        out["history"] = sol.lambda_history;
        out["lipschitz"] = sol.lipschitz_estimate;
        out["residual_norm"] = sol.residual_norm;
        out["v"] = sol.v;
        return out;
    }, py::arg("model"), py::arg("gamma1"), py::arg("gamma2"), py::arg("grid"),
       py::arg("eps0") = 0.4, py::arg("ratio") = 0.5, py::arg("count") = 6,
       py::arg("tol_lambda") = 1e-4);

    mod.def("large_time_lambda", [](const ModelSpec& m, const std::vector<double>& T_list,
                                    double x, const Grid& grid) {
        ErgodicProblem p{m, -1.0, 0.0};
        Field phi(grid, 0.0);
        auto lt = large_time(p, phi, T_list, x, grid);
        py::dict out;
        out["lambda"] = lt.lambda_est;
        out["horizons"] = lt.horizons;
        out["u"] = lt.u_at_x;
        out["bound_decays"] = lt.bound_decays;
        return out;
    }, py::arg("model"), py::arg("T_list"), py::arg("x"), py::arg("grid"));

    mod.def("lattice_value", [](const ModelSpec& m, const std::string& payoff, double T,
                                const Grid& lattice) {
        return lattice_value(m, parse_payoff(m, payoff), T, lattice);
    }, py::arg("model"), py::arg("payoff"), py::arg("T"), py::arg("lattice"));

    mod.def("upper_expectation", [](const ModelSpec& m, const std::string& payoff, double T,
                                    int K, int M_levels, double x0, int n_paths,
                                    std::uint64_t seed) {
        return upper_expectation_scenarios(m, parse_payoff(m, payoff), T, K, M_levels,
                                           {x0, 0.0}, n_paths, seed);
    }, py::arg("model"), py::arg("payoff"), py::arg("T"), py::arg("K"), py::arg("M_levels"),
       py::arg("x0"), py::arg("n_paths"), py::arg("seed"));

    mod.def("linear_bsde", [](double a, double b, double c, double d, double m_in, double n_in,
                              const std::string& payoff, double T, double lo_sq, double hi_sq) {
        LinearDriver ld;
        ld.a = a; ld.b = b; ld.c = c; ld.d = d; ld.m_in = m_in; ld.n_in = n_in;
        ld.payoff = Expression::parse(payoff, VarSpec{1, 1, 0});
        return linear_bsde_explicit(ld, T, GFunction(UncertaintyInterval(lo_sq, hi_sq)));
    }, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("m_in"), py::arg("n_in"),
       py::arg("payoff"), py::arg("T"), py::arg("sigma_lo_sq"), py::arg("sigma_hi_sq"));
}
