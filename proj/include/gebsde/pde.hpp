#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gebsde/grid.hpp"
#include "gebsde/model.hpp"

namespace gebsde {

/// The assembled elliptic operator at one grid node.
struct PointwiseOperator {
    double H = 0.0;            // 1x1 quadratic-variation block (d = 1)
    double drift_term = 0.0;   // <b, Du> (upwind)
    double driver_term = 0.0;  // f(x, u, sigma^T Du)
    double total = 0.0;        // G(H) + drift_term + driver_term
};

struct ParabolicOptions {
    double lin_f_y = 0.0;       // adds lin_f_y * y to the ds driver
    double lin_g_y = 0.0;       // adds lin_g_y * y to the d<B> driver
    double effective_mu = -1.0; // monotonicity constant of the augmented pair; <0: use m.mu
    int max_snapshots = 129;    // stored slices cap (terminal and t=0 always kept)
    double blowup_factor = 10.0;
    bool keep_snapshots = true;
};

/// Largest stable time step for the explicit monotone scheme:
/// 0.9 / max over nodes of the center-weight loss rate (diffusion, upwinded
/// advection from b and the h-terms, and the zero-order Lipschitz load).
double auto_dt(const ModelSpec& m, const Grid& grid, const ParabolicOptions& opts = {});

/// Throws NumericalError when dt violates the CFL bound, when a 2-d cross
/// term is not diagonally dominant on the grid, or when the z-coupling is
/// too strong for the mesh (central z-differences need
/// sigma_lo_sq*|sigma| >= (1+sigma_hi_sq)*alpha2*h at active nodes).
void validate_scheme(const ModelSpec& m, const Grid& grid, double dt,
                     const ParabolicOptions& opts = {});

/// Explicit backward time-marcher; one instance owns one evolving slice.
/// Each step is a pure function of the previous slice.
class Marcher {
public:
    Marcher(const ModelSpec& m, const Grid& grid, ParabolicOptions opts = {});

    /// dt = T/steps with steps = ceil(T / stable dt), so the horizon is hit
    /// exactly; honors a user dt from the grid when one is set.
    void choose_dt_for_horizon(double T);
    /// dt = 1/steps_per_unit so whole time units land on step boundaries.
    void choose_dt_unit_chunks();

    double dt() const { return dt_; }
    int steps_per_unit() const { return steps_per_unit_; }

    void set_state(std::vector<double> values);
    const std::vector<double>& state() const { return u_; }
    double elapsed() const { return elapsed_; }
    double state_sup() const { return sup_; }
    void set_blowup_bound(double bound) { blowup_bound_ = bound; }

    void advance(int steps);

private:
    void step_1d();
    void step_2d();

    const ModelSpec& m_;
    Grid grid_;
    ParabolicOptions opts_;
    double dt_ = 0.0;
    int steps_per_unit_ = 0;
    double elapsed_ = 0.0;
    double sup_ = 0.0;
    double blowup_bound_ = 0.0;
    std::vector<double> u_, un_, padded_;
    // per-node coefficients, hoisted once
    std::vector<double> xs_, ys_;
    std::vector<double> cb_[2], ch_[2], cs_[2];
    std::vector<double> f0_, g0_;
    bool f_hoisted_ = false, g_hoisted_ = false;
};

/// Discrete elliptic operator at one node of a Field (upwind stencils, the
/// same bricks the marcher uses).
PointwiseOperator assemble_operator(const ModelSpec& m, const Field& u, int i, int j = 0);

/// Backward marching of the terminal-value problem over [0, T].
TimeField solve_parabolic(const ModelSpec& m, const Field& phi, double T, const Grid& grid,
                          const ParabolicOptions& opts = {});

struct BsdeValue {
    double y0 = 0.0;
    std::array<double, 2> z0{0.0, 0.0};
};

/// Value and gradient read-out of the parabolic solve at a starting point:
/// Y0 = u(0, x) (multilinear), Z0 = sigma(x)^T Du(0, x).
BsdeValue solve_finite_bsde(const ModelSpec& m, const Field& phi, double T,
                            std::array<double, 2> x, const Grid& grid,
                            const ParabolicOptions& opts = {});

/// Stationary solution of the infinite-horizon equation: marches from 0 over
/// a horizon n with (alpha/mu) exp(-mu n) <= tol/2, then continues until
/// successive unit-horizon slices differ by <= tol/2 (at most 4n units).
Field solve_infinite(const ModelSpec& m, double tol, const Grid& grid,
                     const ParabolicOptions& opts = {});

/// Strictly monotone discounted equation: drivers gain gamma1*eps*y and
/// gamma2*eps*y, with effective monotonicity -(gamma1 + 2G(gamma2))*eps.
Field solve_discounted(const ModelSpec& m, double eps, double gamma1, double gamma2,
                       const Grid& grid, double tol);

/// Nodewise continuum residual (central differences throughout). With lambda
/// the ergodic form with gamma-weights; without, the elliptic form with the
/// field value in the driver.
Field residual(const ModelSpec& m, const Field& u, std::optional<double> lambda,
               double gamma1 = 0.0, double gamma2 = 0.0);

/// Sup norm over the inner half of the box, away from the extrapolation
/// boundary layer.
double core_sup_norm(const Field& f);

}  // namespace gebsde
