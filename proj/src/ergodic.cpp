#include "gebsde/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gebsde/rng.hpp"

namespace gebsde {

namespace {
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}
}  // namespace

void ErgodicProblem::validate() const {
    model.validate();
    if (model.f.uses_y() || model.g.uses_y())
        throw ConfigError("ergodic drivers must not depend on y (monotonicity comes from the discount)");
    if (margin() >= 0.0)
        throw NumericalError("infeasible ergodic weighting: gamma1 + 2G(gamma2) = "
                             + fmt(margin()) + " >= 0");
    double b5 = model.eta - (1.0 + model.sigma_hi_sq()) * model.alpha1 * model.alpha2;
    if (!(b5 > 0.0))
        throw NumericalError("ergodic use requires eta - (1+sigma_hi_sq)*alpha1*alpha2 > 0, got "
                             + fmt(b5));
}

DiscountSchedule DiscountSchedule::geometric(double eps0, double ratio, int count,
                                             double tol_lambda) {
    DiscountSchedule s;
    s.tol_lambda = tol_lambda;
    double e = eps0;
    for (int k = 0; k < count; ++k) {
        s.eps_list.push_back(e);
        e *= ratio;
    }
    return s;
}

void DiscountSchedule::validate() const {
    if (eps_list.size() < 3) throw ConfigError("discount schedule needs at least 3 entries");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw ConfigError("discount rates must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw ConfigError("discount schedule must be strictly decreasing");
    }
    if (!(tol_lambda > 0.0)) throw ConfigError("tol_lambda must be positive");
}

namespace {

/// Value at x = 0, using the exact node when one sits on the origin.
double value_at_origin(const Field& f, double x = 0.0) {
    const Grid& g = f.grid();
    double s = (x - g.lo[0]) / g.h[0];
    int i = static_cast<int>(std::lround(s));
    if (i >= 0 && i < g.nodes[0] && std::fabs(g.coord(0, i) - x) < 1e-9 * g.h[0]) {
        if (g.n == 1) return f.at(i);
        double sy = (0.0 - g.lo[1]) / g.h[1];
        int j = static_cast<int>(std::lround(sy));
        if (j >= 0 && j < g.nodes[1] && std::fabs(g.coord(1, j)) < 1e-9 * g.h[1])
            return f.at(i, j);
    }
    return f.interp(x);
}

struct LinearFit {
    double intercept;
    double slope;
    double max_misfit;
};

LinearFit fit_last3(const std::vector<std::pair<double, double>>& hist) {
    std::size_t n = hist.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = n - 3; k < n; ++k) {
        sx += hist[k].first;
        sy += hist[k].second;
        sxx += hist[k].first * hist[k].first;
        sxy += hist[k].first * hist[k].second;
    }
    double det = 3.0 * sxx - sx * sx;
    LinearFit out{};
    out.slope = (3.0 * sxy - sx * sy) / det;
    out.intercept = (sy - out.slope * sx) / 3.0;
    out.max_misfit = 0.0;
    for (std::size_t k = n - 3; k < n; ++k)
        out.max_misfit = std::max(out.max_misfit,
                                  std::fabs(hist[k].second - out.intercept - out.slope * hist[k].first));
    return out;
}

void require_tame_history(const std::vector<std::pair<double, double>>& hist, double tol) {
    // monotone tail, or differences that keep shrinking: otherwise the
    // extrapolation is not trustworthy and must be reported, not silently fit
    std::vector<double> d;
    for (std::size_t k = 1; k < hist.size(); ++k)
        d.push_back(hist[k].second - hist[k - 1].second);
    bool monotone = true;
    for (std::size_t k = 1; k < d.size(); ++k)
        if (d[k] * d[k - 1] < -tol * tol) monotone = false;
    bool cauchy = true;
    for (std::size_t k = 1; k < d.size(); ++k)
        if (std::fabs(d[k]) > std::max(1.5 * std::fabs(d[k - 1]), 10.0 * tol)) cauchy = false;
    if (!monotone && !cauchy) {
        std::ostringstream os;
        os << "vanishing-discount history is neither monotone nor Cauchy; not extrapolating."
           << " history:";
        for (const auto& [e, y] : hist) os << " (" << fmt(e) << ", " << fmt(y) << ")";
        throw NumericalError(os.str());
    }
}

}  // namespace

ErgodicSolution vanishing_discount(const ErgodicProblem& p, const DiscountSchedule& sched,
                                   const Grid& grid) {
    p.validate();
    sched.validate();
    const ModelSpec& m = p.model;
    const double bound = m.alpha / (-p.margin());

    ErgodicSolution sol;
    Field v_last;
    for (double eps : sched.eps_list) {
        double tol_v = sched.tol_lambda / eps;
        Field v = solve_discounted(m, eps, p.gamma1, p.gamma2, grid, tol_v);
        double v0 = value_at_origin(v);
        double point = eps * v0;
        if (std::fabs(point) > bound * (1.0 + 1e-6) + sched.tol_lambda)
            throw NumericalError("discount bound violated: eps*v_eps(0) = " + fmt(point)
                                 + " exceeds alpha/(-gamma1-2G(gamma2)) = " + fmt(bound));
        sol.lambda_history.emplace_back(eps, point);
        v_last = std::move(v);
    }

    require_tame_history(sol.lambda_history, sched.tol_lambda);
    LinearFit fit = fit_last3(sol.lambda_history);
    sol.lambda = fit.intercept;
    sol.fit_residual = fit.max_misfit;

    double v0 = value_at_origin(v_last);
    sol.v = v_last + (-v0);

    double lip = 0.0;
    const Grid& g = sol.v.grid();
    for (int j = 0; j < (g.n == 2 ? g.nodes[1] : 1); ++j)
        for (int i = 0; i < g.nodes[0]; ++i) {
            auto gr = sol.v.gradient_node(i, j);
            lip = std::max(lip, std::hypot(gr[0], g.n == 2 ? gr[1] : 0.0));
        }
    sol.lipschitz_estimate = lip;
    sol.residual_norm = core_sup_norm(residual(m, sol.v, sol.lambda, p.gamma1, p.gamma2));
    return sol;
}

LargeTimeResult large_time(const ErgodicProblem& p, const Field& phi,
                           const std::vector<double>& T_list, double x, const Grid& grid) {
    p.validate();
    if (p.gamma1 != -1.0 || p.gamma2 != 0.0)
        throw NumericalError("large_time is stated for gamma1 = -1, gamma2 = 0");
    if (T_list.size() < 2) throw NumericalError("need at least two horizons");
    for (std::size_t k = 1; k < T_list.size(); ++k)
        if (!(T_list[k] > T_list[k - 1]))
            throw NumericalError("horizons must be increasing");
    if (!phi.grid().same_layout(grid))
        throw NumericalError("initial condition lives on a different grid");

    const ModelSpec& m = p.model;
    Marcher marcher(m, grid, {});
    const double T_max = T_list.back();
    marcher.choose_dt_for_horizon(T_max);
    marcher.set_state(phi.values());
    marcher.set_blowup_bound(10.0 * (phi.sup_norm() + m.alpha * T_max + 1.0));

    LargeTimeResult out;
    const double dt = marcher.dt();
    int done = 0;
    for (double T : T_list) {
        int target = static_cast<int>(std::lround(T / dt));
        marcher.advance(target - done);
        done = target;
        Field slice(grid, marcher.state());
        out.horizons.push_back(done * dt);
        out.u_at_x.push_back(slice.interp(x, 0.0));
    }

    const std::size_t n = out.horizons.size();
    out.lambda_est = (out.u_at_x[n - 1] - out.u_at_x[n - 2])
                     / (out.horizons[n - 1] - out.horizons[n - 2]);

    if (n >= 3) {
        double prev_slope = (out.u_at_x[n - 2] - out.u_at_x[n - 3])
                            / (out.horizons[n - 2] - out.horizons[n - 3]);
        double drift = std::fabs(out.lambda_est - prev_slope);
        if (drift > std::max(0.05 * std::fabs(out.lambda_est), 2e-3)) {
            std::ostringstream os;
            os << "large-time slope not yet stable (last " << fmt(prev_slope) << " -> "
               << fmt(out.lambda_est) << "); u history:";
            for (std::size_t k = 0; k < n; ++k)
                os << " u(" << fmt(out.horizons[k]) << ")=" << fmt(out.u_at_x[k]);
            throw NumericalError(os.str());
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        double avg = out.u_at_x[k] / out.horizons[k];
        out.time_avg.push_back(avg);
        out.bound_const.push_back(std::fabs(avg - out.lambda_est) * out.horizons[k]
                                  / (1.0 + std::fabs(x)));
    }
    out.bound_decays = true;
    for (std::size_t k = 1; k < n; ++k)
        if (out.bound_const[k] > std::max(1.5 * out.bound_const[k - 1], 2e-3))
            out.bound_decays = false;
    return out;
}

UniquenessReport lambda_uniqueness_check(const ErgodicProblem& p, const ErgodicSolution& sol,
                                         const std::vector<double>& x_list,
                                         const std::vector<double>& T_list, const Grid& grid,
                                         double tol) {
    UniquenessReport rep;
    Field phi(grid, 0.0);
    double lo = sol.lambda, hi = sol.lambda;
    for (double x : x_list) {
        auto lt = large_time(p, phi, T_list, x, grid);
        rep.lambda_by_start.emplace_back(x, lt.lambda_est);
        lo = std::min(lo, lt.lambda_est);
        hi = std::max(hi, lt.lambda_est);
    }
    rep.spread = hi - lo;
    rep.lambda_consistent = rep.spread <= tol;

    Field r0 = residual(p.model, sol.v, sol.lambda, p.gamma1, p.gamma2);
    Field r5 = residual(p.model, sol.v + 5.0, sol.lambda, p.gamma1, p.gamma2);
    rep.shift_invariance_error = r0.max_abs_diff(r5);
    return rep;
}

void BsdePathRecord::write_csv(std::ostream& os) const {
    os << "t,x,y,z,k\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (std::size_t i = 0; i < t.size(); ++i) {
        put(t[i]); os << ',';
        put(x[i]); os << ',';
        put(y[i]); os << ',';
        put(z[i]); os << ',';
        put(k_cum[i]); os << '\n';
    }
}

void BsdePathRecord::write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_csv(os);
}

namespace {

EbsdeStats ebsde_run(const ErgodicProblem& p, const ErgodicSolution& sol,
                     const std::vector<double>* fixed_levels, double x0, int n_paths,
                     std::uint64_t seed, const EbsdeOptions& opts) {
    p.validate();
    const ModelSpec& m = p.model;
    if (m.n != 1) throw NumericalError("path verification supports 1-d state only");
    const double dt = opts.T / opts.steps;
    const double vlo = m.sigma_lo_sq(), vhi = m.sigma_hi_sq();

    // discrete quadratic-variation block of v, for the nodewise G-argmax
    Field H_field(sol.v.grid());
    const Grid& vg = sol.v.grid();
    {
        for (int i = 0; i < vg.nodes[0]; ++i) {
            double x = vg.coord(0, i);
            std::span<const double> xs(&x, 1);
            int im = std::max(0, i - 1), ip = std::min(vg.nodes[0] - 1, i + 1);
            double d2 = (sol.v.at(ip) - 2.0 * sol.v.at(i) + sol.v.at(im)) / (vg.h[0] * vg.h[0]);
            if (i == 0 || i == vg.nodes[0] - 1) d2 = 0.0;
            double du = (sol.v.at(ip) - sol.v.at(im)) / ((ip - im) * vg.h[0]);
            double s = m.sigma_at(0, xs);
            double z = s * du;
            std::span<const double> zs(&z, 1);
            H_field.at(i) = s * s * d2 + 2.0 * m.h_at(0, xs) * du + 2.0 * m.g(xs, 0.0, zs)
                            + 2.0 * p.gamma2 * sol.lambda;
        }
    }

    double sum_kt = 0.0, sum_kt2 = 0.0, sum_absinc = 0.0;
    int decreasing = 0;
    long long inc_count = 0;
    BsdePathRecord sample;
    for (int pth = 0; pth < n_paths; ++pth) {
        Rng rng = Rng::for_path(seed, static_cast<std::uint64_t>(pth));
        double x = x0;
        double k_cum = 0.0, k_max_rise = 0.0, k_runmin = 0.0;
        for (int k = 0; k < opts.steps; ++k) {
            double v;
            if (fixed_levels) {
                v = (*fixed_levels)[static_cast<std::size_t>(k) * fixed_levels->size() / opts.steps];
            } else {
                v = H_field.interp(x) > 0.0 ? vhi : vlo;
            }
            std::span<const double> xs(&x, 1);
            const double s = m.sigma_at(0, xs);
            const double dW = rng.normal() * std::sqrt(dt);
            const double dB = std::sqrt(v) * dW;
            const double y_cur = sol.v.interp(x);
            const double z = s * sol.v.gradient_at(x)[0];
            std::span<const double> zs(&z, 1);
            const double fv = m.f(xs, 0.0, zs);
            const double gv = m.g(xs, 0.0, zs);
            const double x_next =
                x + m.b_at(0, xs) * dt + m.h_at(0, xs) * v * dt + s * dB;
            const double y_next = sol.v.interp(x_next);
            const double dK = y_next - y_cur + (fv + p.gamma1 * sol.lambda) * dt
                              + (gv + p.gamma2 * sol.lambda) * v * dt - z * dB;
            if (pth == 0) {
                if (k == 0) {
                    sample.t.push_back(0.0);
                    sample.x.push_back(x);
                    sample.y.push_back(y_cur);
                    sample.z.push_back(z);
                    sample.k_cum.push_back(0.0);
                }
                sample.t.push_back((k + 1) * dt);
                sample.x.push_back(x_next);
                sample.y.push_back(y_next);
                sample.z.push_back(s * sol.v.gradient_at(x_next)[0]);
                sample.k_cum.push_back(k_cum + dK);
            }
            k_cum += dK;
            k_runmin = std::min(k_runmin, k_cum);
            k_max_rise = std::max(k_max_rise, k_cum - k_runmin);
            sum_absinc += std::fabs(dK);
            ++inc_count;
            x = x_next;
        }
        sum_kt += k_cum;
        sum_kt2 += k_cum * k_cum;
        if (k_max_rise <= opts.increment_tolerance) ++decreasing;
    }

    EbsdeStats st;
    st.n_paths = n_paths;
    st.mean_terminal_k = sum_kt / n_paths;
    double var = std::max(0.0, sum_kt2 / n_paths - st.mean_terminal_k * st.mean_terminal_k);
    st.se_terminal_k = std::sqrt(var / n_paths);
    st.frac_decreasing = static_cast<double>(decreasing) / n_paths;
    st.mean_abs_increment = sum_absinc / static_cast<double>(inc_count);
    st.mean_rate = st.mean_terminal_k / opts.T;
    st.sample_path = std::move(sample);
    return st;
}

}  // namespace

EbsdeStats ebsde_verify(const ErgodicProblem& p, const ErgodicSolution& sol,
                        const Scenario& scenario, double x0, int n_paths,
                        std::uint64_t seed, const EbsdeOptions& opts) {
    scenario.validate(p.model.g_fun.interval());
    EbsdeOptions o = opts;
    o.T = scenario.T;
    o.steps = std::max(o.steps, scenario.steps());
    // align the step count with the scenario so levels map onto whole blocks
    o.steps = (o.steps / scenario.steps()) * scenario.steps();
    return ebsde_run(p, sol, &scenario.levels, x0, n_paths, seed, o);
}

EbsdeStats ebsde_verify_worstcase(const ErgodicProblem& p, const ErgodicSolution& sol,
                                  double x0, int n_paths, std::uint64_t seed,
                                  const EbsdeOptions& opts) {
    return ebsde_run(p, sol, nullptr, x0, n_paths, seed, opts);
}

AbelianTauberianReport abelian_tauberian_check(const ErgodicProblem& p, const Grid& grid,
                                               double x, const std::vector<double>& eps_list,
                                               const std::vector<double>& T_list,
                                               double tol_lambda) {
    p.validate();
    if (p.model.f.uses_z() || p.model.g.uses_z())
        throw NumericalError("the Abelian-Tauberian comparison needs z-free drivers");

    AbelianTauberianReport rep;
    for (double eps : eps_list) {
        Field v = solve_discounted(p.model, eps, -1.0, 0.0, grid, tol_lambda / eps);
        rep.abel_history.emplace_back(eps, eps * v.interp(x));
    }
    if (rep.abel_history.size() >= 3) {
        rep.abel = fit_last3(rep.abel_history).intercept;
    } else {
        rep.abel = rep.abel_history.back().second;
    }

    ErgodicProblem pl = p;
    pl.gamma1 = -1.0;
    pl.gamma2 = 0.0;
    Field phi(grid, 0.0);
    rep.tauber = large_time(pl, phi, T_list, x, grid).lambda_est;
    return rep;
}

double implied_lambda(const ErgodicProblem& p, const Field& v) {
    p.validate();
    auto core_mean = [&](double lam) {
        Field r = residual(p.model, v, lam, p.gamma1, p.gamma2);
        const Grid& g = r.grid();
        const int q = std::max(1, g.nodes[0] / 4);
        double sum = 0.0;
        int count = 0;
        for (int i = q; i <= g.nodes[0] - 1 - q; ++i) {
            sum += r.at(i);
            ++count;
        }
        return sum / count;
    };
    double lo = -1.0, hi = 1.0;
    while (core_mean(lo) < 0.0 && lo > -1e6) lo *= 2.0;
    while (core_mean(hi) > 0.0 && hi < 1e6) hi *= 2.0;
    if (!(core_mean(lo) >= 0.0) || !(core_mean(hi) <= 0.0))
        throw NumericalError("implied_lambda: could not bracket the root");
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (core_mean(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace gebsde
