#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gebsde/expression.hpp"
#include "gebsde/gfunction.hpp"

namespace gebsde {

/// Finite control set with running cost kappa(x, u) and Girsanov kernel R(u).
/// kappa references x1..xn and u1..um, R references u1..um only.
struct ControlSpec {
    std::vector<std::vector<double>> points;  // the set U, each point in R^m
    int m = 1;
    int n = 1;
    int d = 1;
    Expression kappa;
    std::vector<Expression> R;  // d entries
    double alpha2 = 0.0;        // bound on |R(u)|

    void validate() const;
    /// R(u) for u = points[k].
    std::vector<double> R_at(std::size_t k) const;
    double kappa_at(std::span<const double> x, std::size_t k) const;
};

/// Driver f(x, y, z): either a parsed expression or the Hamiltonian
/// min over U of kappa(x,u) + R(u)·z (pointwise infimum of affine maps,
/// hence concave and Lipschitz in z with constant max |R|).
class DriverFn {
public:
    DriverFn() = default;

    static DriverFn from_expression(Expression e);
    static DriverFn hamiltonian(ControlSpec c);

    double operator()(std::span<const double> x, double y, std::span<const double> z) const;

    bool uses_y() const;
    bool uses_z() const;
    bool is_expression() const { return control_ == nullptr; }
    bool is_hamiltonian() const { return control_ != nullptr; }
    const Expression& expression() const { return expr_; }
    const ControlSpec& control() const;

    /// Index of the minimizing control point (ties to the lowest index).
    std::size_t argmin_control(std::span<const double> x, std::span<const double> z) const;

    std::string to_string() const;

private:
    Expression expr_{};
    std::shared_ptr<const ControlSpec> control_{};
    std::vector<std::vector<double>> r_cache_{};  // R(u) per control point
};

/// Coefficient bundle (b, h, sigma, f, g) with the structural constants.
/// sigma is n x 1 (Brownian dimension d = 1 for the solvers); h holds the
/// single quadratic-variation drift component h_11 in R^n.
struct ModelSpec {
    int n = 1;
    int d = 1;
    std::vector<Expression> b;
    std::vector<Expression> h;
    std::vector<Expression> sigma;
    DriverFn f;
    DriverFn g;
    double L = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double mu = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    GFunction g_fun;

    void validate() const;

    double b_at(int comp, std::span<const double> x) const { return b[comp].eval({x}); }
    double h_at(int comp, std::span<const double> x) const { return h[comp].eval({x}); }
    double sigma_at(int comp, std::span<const double> x) const { return sigma[comp].eval({x}); }

    double sigma_lo_sq() const { return g_fun.sigma_lo_sq(); }
    double sigma_hi_sq() const { return g_fun.sigma_hi_sq(); }

    /// Effective monotonicity constant of the discount-augmented driver pair
    /// (f + gamma1*eps*y, g + gamma2*eps*y).
    double discounted_mu(double gamma1, double gamma2, double eps) const {
        return -g_fun.dissipativity_margin(gamma1, gamma2) * eps;
    }
};

/// Deterministic probe lattices for the sampling-based assumption checks.
struct SamplePlan {
    double x_lo = -4.0, x_hi = 4.0;
    int nx = 17;
    double y_lo = -2.0, y_hi = 2.0;
    int ny = 9;
    double z_lo = -2.0, z_hi = 2.0;
    int nz = 5;
};

struct AssumptionCheck {
    std::string name;
    bool checkable = true;
    bool holds = false;
    double margin = 0.0;  // worst normalized slack; negative when violated
    std::string witness;  // concrete probe tuple for the worst margin
    std::string note;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_hold() const;
    const AssumptionCheck& get(const std::string& name) const;
    std::string to_text() const;
};

/// Parse a full config text (TOML-style blocks or JSON) into a ModelSpec.
ModelSpec parse_model(const std::string& config_text);

/// Evaluate the secant inequalities of the structural assumptions on the
/// probe lattices. Verdicts are "holds on sample", never a proof.
AssumptionReport check_assumptions(const ModelSpec& m, const SamplePlan& plan = {});

/// The Hamiltonian driver of the ergodic control application.
DriverFn hamiltonian_from_control(const ControlSpec& c);

}  // namespace gebsde
