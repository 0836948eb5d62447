#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gebsde/grid.hpp"
#include "gebsde/mc_oracle.hpp"
#include "gebsde/model.hpp"
#include "gebsde/pde.hpp"

namespace gebsde {

/// Ergodic problem data: a model whose drivers do not depend on y, plus the
/// weighting pair (gamma1, gamma2) with gamma1 + 2G(gamma2) < 0.
struct ErgodicProblem {
    ModelSpec model;
    double gamma1 = -1.0;
    double gamma2 = 0.0;

    void validate() const;
    double margin() const { return model.g_fun.dissipativity_margin(gamma1, gamma2); }
};

struct DiscountSchedule {
    std::vector<double> eps_list;  // strictly decreasing positive, >= 3 entries
    double tol_lambda = 1e-4;      // accuracy target for each eps * v_eps(0)

    static DiscountSchedule geometric(double eps0 = 0.4, double ratio = 0.5, int count = 6,
                                      double tol_lambda = 1e-4);
    void validate() const;
};

struct ErgodicSolution {
    double lambda = 0.0;
    Field v;  // normalized to v(0) = 0
    std::vector<std::pair<double, double>> lambda_history;  // (eps, eps * v_eps(0))
    double lipschitz_estimate = 0.0;
    double residual_norm = 0.0;  // core sup norm of the ergodic residual
    double fit_residual = 0.0;   // worst misfit of the 3-point extrapolation
};

/// Solve the discounted family along the schedule, extrapolate
/// eps * v_eps(0) to eps = 0 by a linear fit on the last three entries,
/// and return the normalized limit candidate at the smallest eps.
/// A non-monotone, non-Cauchy history is an error, never silently fit.
ErgodicSolution vanishing_discount(const ErgodicProblem& p, const DiscountSchedule& sched,
                                   const Grid& grid);

struct LargeTimeResult {
    double lambda_est = 0.0;
    std::vector<double> horizons;     // actual elapsed times
    std::vector<double> u_at_x;       // u(T, x)
    std::vector<double> time_avg;     // u(T, x) / T
    std::vector<double> bound_const;  // |u/T - lambda_est| * T / (1 + |x|)
    bool bound_decays = false;
};

/// Large-time limit with gamma1 = -1, gamma2 = 0: lambda from the slope of
/// u(T, x) over the two largest horizons (the O(1) offset cancels), plus the
/// 1/T decay record of |u(T,x)/T - lambda|.
LargeTimeResult large_time(const ErgodicProblem& p, const Field& phi,
                           const std::vector<double>& T_list, double x, const Grid& grid);

struct UniquenessReport {
    std::vector<std::pair<double, double>> lambda_by_start;  // (x, lambda_est)
    double spread = 0.0;
    double shift_invariance_error = 0.0;  // sup |residual(v+c) - residual(v)|
    bool lambda_consistent = false;
};

/// (a) the large-time lambda at several starting points agrees with
/// sol.lambda; (b) the residual is invariant under constant shifts of v.
UniquenessReport lambda_uniqueness_check(const ErgodicProblem& p, const ErgodicSolution& sol,
                                         const std::vector<double>& x_list,
                                         const std::vector<double>& T_list, const Grid& grid,
                                         double tol);

struct EbsdeOptions {
    double T = 4.0;
    int steps = 400;
    double increment_tolerance = 1e-3;  // max allowed upward excursion of K
};

/// One simulated trajectory of the backward quantities: Y = v(X),
/// Z = sigma(X) Dv(X), and the cumulative compensator K.
struct BsdePathRecord {
    std::vector<double> t, x, y, z, k_cum;
    void write_csv(std::ostream& os) const;
    void write_csv_file(const std::string& path) const;
};

struct EbsdeStats {
    double mean_terminal_k = 0.0;  // mean of K_T over paths (path-closure error)
    double se_terminal_k = 0.0;
    double frac_decreasing = 0.0;  // share of paths with K within tolerance of monotone
    double mean_abs_increment = 0.0;
    double mean_rate = 0.0;  // mean K_T / T
    int n_paths = 0;
    BsdePathRecord sample_path;  // first path, for inspection and CSV dumps
};

/// Simulate X under a scenario, set Y = v(X), Z = sigma(X) Dv(X), and close
/// the discrete equation; the per-step misfit is the K increment.
EbsdeStats ebsde_verify(const ErgodicProblem& p, const ErgodicSolution& sol,
                        const Scenario& scenario, double x0, int n_paths,
                        std::uint64_t seed, const EbsdeOptions& opts = {});

/// Same with the nodewise worst-case control: the G-argmax of the discrete
/// quadratic-variation block along the path.
EbsdeStats ebsde_verify_worstcase(const ErgodicProblem& p, const ErgodicSolution& sol,
                                  double x0, int n_paths, std::uint64_t seed,
                                  const EbsdeOptions& opts = {});

struct AbelianTauberianReport {
    double abel = 0.0;    // lim_eps eps * v_eps(x) (discounted functional)
    double tauber = 0.0;  // large-time slope (time-averaged functional)
    std::vector<std::pair<double, double>> abel_history;
};

/// For z-free drivers, the discounted and time-averaged functionals share
/// the same limit; this computes both routes at one starting point.
AbelianTauberianReport abelian_tauberian_check(const ErgodicProblem& p, const Grid& grid,
                                               double x, const std::vector<double>& eps_list,
                                               const std::vector<double>& T_list,
                                               double tol_lambda = 1e-4);

/// Third extraction route: the constant that zeroes the mean core residual
/// of the ergodic equation for a given field (bisection; the residual is
/// strictly decreasing in lambda because gamma1 + 2G(gamma2) < 0).
double implied_lambda(const ErgodicProblem& p, const Field& v);

}  // namespace gebsde
