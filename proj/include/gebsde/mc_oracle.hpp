#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gebsde/grid.hpp"
#include "gebsde/model.hpp"

namespace gebsde {

/// Piecewise-constant volatility control over [0, T]: one variance rate per
/// step, each inside the uncertainty interval.
struct Scenario {
    double T = 1.0;
    std::vector<double> levels;

    int steps() const { return static_cast<int>(levels.size()); }
    double dt() const { return T / static_cast<double>(levels.size()); }

    static Scenario constant(double T, int K, double level);
    void validate(const UncertaintyInterval& iv) const;
};

/// Simulated forward paths under one scenario. States are stored per path,
/// per step, per component; bracket increments are levels[k] * dt exactly.
struct PathBundle {
    int n_paths = 0;
    int K = 0;
    int n = 1;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> levels;
    std::vector<double> states;  // [(path * (K+1) + k) * n + comp]
    std::vector<double> dB;      // [path * K + k]

    double state(int path, int k, int comp = 0) const {
        return states[(static_cast<std::size_t>(path) * (K + 1) + k) * n + comp];
    }
    double bracket_increment(int k) const { return levels[static_cast<std::size_t>(k)] * dt; }

    void write_csv(std::ostream& os) const;
    void write_csv_file(const std::string& path) const;
};

/// Euler forward simulation under a scenario:
/// dX = b dt + h v dt + sigma sqrt(v) dW, deterministic given (seed, paths, K).
PathBundle simulate_forward(const ModelSpec& m, const Scenario& sc,
                            std::array<double, 2> x0, int n_paths, std::uint64_t seed);

/// Worst open-loop scenario value: max over all M^K level assignments of the
/// Monte-Carlo mean of payoff(X_T), common random numbers across scenarios.
/// This is a lower bound to the adapted supremum.
double upper_expectation_scenarios(const ModelSpec& m, const Expression& payoff,
                                   double T, int K, int M_levels,
                                   std::array<double, 2> x0, int n_paths, std::uint64_t seed);

/// Options for the recombining lattice: v-levels per node maximization and
/// an optional Girsanov drift shift sigma(x) * R(u(x)).
struct LatticeOptions {
    int v_levels = 3;
    std::function<double(double)> drift_shift{};   // extra drift at x
    std::function<double(double)> running_cost{};  // accumulated as cost * dt
    bool use_model_drivers = true;                 // include f, g from the model
};

/// Adapted worst-case dynamic program on a space lattice; independent code
/// path from the PDE module (probability stencils, not finite differences).
/// Returns the t=0 value over the lattice nodes. 1-d state only.
Field lattice_value(const ModelSpec& m, const Expression& payoff, double T,
                    const Grid& lattice, const LatticeOptions& opts = {});

/// Explicit value of the constant-coefficient linear equation
/// f = a Y + b Z + m_in, g = c Y + d Z + n_in, terminal payoff a function
/// of B_T (variable x1). The closed-form exponential weight is carried on a
/// trinomial lattice over the driving path; the auxiliary increment is the
/// deterministic functional dB~ = dB / v (the extended covariance block
/// [[v, 1], [1, 1/v]] is rank one), which turns the weight into an
/// exponential tilt of the branch probabilities.
struct LinearDriver {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double m_in = 0.0, n_in = 0.0;
    Expression payoff;

    /// Checks |b|, |d| <= alpha2 and, when mu_check is set, a + 2G(c) <= -mu.
    void validate(const GFunction& g, double alpha2,
                  std::optional<double> mu_check = std::nullopt) const;
};

struct LinearLatticeParams {
    double half_width = 0.0;  // 0: sized from the interval and horizon
    double dx = 0.05;
    double dt = 0.0;          // 0: largest stable step
    int v_levels = 3;
};

double linear_bsde_explicit(const LinearDriver& ld, double T, const GFunction& g,
                            const LinearLatticeParams& params = {});

/// Worst-case expectation of an accumulated running cost under the Girsanov
/// drift shift: the forward operator gains sigma(x) * R(u(x)) while the
/// volatility maximization is unchanged.
Field girsanov_expectation_field(const ModelSpec& m, const ControlSpec& c,
                                 const std::function<std::size_t(double)>& feedback,
                                 double T, const Grid& lattice);

double girsanov_expectation(const ModelSpec& m, const ControlSpec& c,
                            const std::function<std::size_t(double)>& feedback,
                            double T, const Grid& lattice, double x0);

}  // namespace gebsde
