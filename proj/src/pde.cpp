#include "gebsde/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gebsde {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double effective_mu_of(const ModelSpec& m, const ParabolicOptions& opts) {
    return opts.effective_mu >= 0.0 ? opts.effective_mu : m.mu;
}

/// Zero-order Lipschitz load of the driver pair for the CFL bound.
double zero_order_lipschitz(const ModelSpec& m, const ParabolicOptions& opts) {
    double l = std::fabs(opts.lin_f_y) + m.sigma_hi_sq() * std::fabs(opts.lin_g_y);
    if (m.f.uses_y() || m.g.uses_y()) l += (1.0 + m.sigma_hi_sq()) * m.L;
    return l;
}

}  // namespace

double auto_dt(const ModelSpec& m, const Grid& grid, const ParabolicOptions& opts) {
    m.validate();
    const double vmax = m.sigma_hi_sq();
    const double hmin = grid.n == 2 ? std::min(grid.h[0], grid.h[1]) : grid.h[0];
    double denom = 0.0;
    double xy[2];
    for (int j = 0; j < (grid.n == 2 ? grid.nodes[1] : 1); ++j) {
        xy[1] = grid.n == 2 ? grid.coord(1, j) : 0.0;
        for (int i = 0; i < grid.nodes[0]; ++i) {
            xy[0] = grid.coord(0, i);
            std::span<const double> x(xy, static_cast<std::size_t>(grid.n));
            double s1 = m.sigma_at(0, x);
            double s2 = grid.n == 2 ? m.sigma_at(1, x) : 0.0;
            double a11 = s1 * s1, a22 = s2 * s2, a12 = std::fabs(s1 * s2);
            double diff = vmax * (a11 / (grid.h[0] * grid.h[0]));
            double adv = (std::fabs(m.b_at(0, x)) + vmax * std::fabs(m.h_at(0, x))) / grid.h[0];
            if (grid.n == 2) {
                diff += vmax * (a22 / (grid.h[1] * grid.h[1]) + a12 / (grid.h[0] * grid.h[1]));
                adv += (std::fabs(m.b_at(1, x)) + vmax * std::fabs(m.h_at(1, x))) / grid.h[1];
                // the stated bound counts the full |sigma|^2 once per dimension
                diff = std::max(diff, grid.n * vmax * (a11 + a22) / (hmin * hmin));
            }
            denom = std::max(denom, diff + adv);
        }
    }
    denom += zero_order_lipschitz(m, opts);
    if (denom <= 0.0) return 0.1;  // pure quadrature, any step is stable
    return 0.9 / denom;
}

void validate_scheme(const ModelSpec& m, const Grid& grid, double dt,
                     const ParabolicOptions& opts) {
    if (!(dt > 0.0)) throw NumericalError("time step must be positive");
    double stable = auto_dt(m, grid, opts) / 0.9;
    if (dt > stable * (1.0 + 1e-12))
        throw NumericalError("CFL violation: dt = " + fmt(dt) + " exceeds the monotone bound "
                             + fmt(stable) + " on this grid (refusing to run)");

    const double vlo = m.sigma_lo_sq(), vhi = m.sigma_hi_sq();
    const bool z_active = (m.f.uses_z() || m.g.uses_z()) && m.alpha2 > 0.0;
    double xy[2];
    for (int j = 0; j < (grid.n == 2 ? grid.nodes[1] : 1); ++j) {
        xy[1] = grid.n == 2 ? grid.coord(1, j) : 0.0;
        for (int i = 0; i < grid.nodes[0]; ++i) {
            xy[0] = grid.coord(0, i);
            std::span<const double> x(xy, static_cast<std::size_t>(grid.n));
            double s1 = m.sigma_at(0, x);
            double s2 = grid.n == 2 ? m.sigma_at(1, x) : 0.0;
            if (grid.n == 2) {
                double a11 = s1 * s1, a22 = s2 * s2, a12 = std::fabs(s1 * s2);
                if (a12 > 1e-14 &&
                    (a11 / grid.h[0] * grid.h[1] < a12 * (1.0 - 1e-12) ||
                     a22 / grid.h[1] * grid.h[0] < a12 * (1.0 - 1e-12)))
                    throw NumericalError(
                        "cross-derivative stencil not monotone at x=(" + fmt(xy[0]) + "," + fmt(xy[1])
                        + "): sigma*sigma^T must be diagonally dominant on the grid");
            }
            if (z_active) {
                auto check_axis = [&](double s, double h) {
                    double sa = std::fabs(s);
                    if (sa > 1e-14 && vlo * sa < (1.0 + vhi) * m.alpha2 * h * (1.0 - 1e-12))
                        throw NumericalError(
                            "z-coupling too strong for the mesh at x=(" + fmt(xy[0])
                            + "): need sigma_lo_sq*|sigma| >= (1+sigma_hi_sq)*alpha2*h; refine h");
                };
                check_axis(s1, grid.h[0]);
                if (grid.n == 2) check_axis(s2, grid.h[1]);
            }
        }
    }
}

Marcher::Marcher(const ModelSpec& m, const Grid& grid, ParabolicOptions opts)
    : m_(m), grid_(grid), opts_(opts) {
    m.validate();
    const int mx = grid.nodes[0];
    const int my = grid.n == 2 ? grid.nodes[1] : 1;
    const std::size_t count = grid.size();

    xs_.resize(static_cast<std::size_t>(mx));
    for (int i = 0; i < mx; ++i) xs_[static_cast<std::size_t>(i)] = grid.coord(0, i);
    if (grid.n == 2) {
        ys_.resize(static_cast<std::size_t>(my));
        for (int j = 0; j < my; ++j) ys_[static_cast<std::size_t>(j)] = grid.coord(1, j);
    }

    for (int c = 0; c < grid.n; ++c) {
        cb_[c].resize(count);
        ch_[c].resize(count);
        cs_[c].resize(count);
    }
    f_hoisted_ = !m.f.uses_y() && !m.f.uses_z();
    g_hoisted_ = !m.g.uses_y() && !m.g.uses_z();
    if (f_hoisted_) f0_.resize(count);
    if (g_hoisted_) g0_.resize(count);

    double xy[2];
    for (int j = 0; j < my; ++j) {
        xy[1] = grid.n == 2 ? ys_[static_cast<std::size_t>(j)] : 0.0;
        for (int i = 0; i < mx; ++i) {
            xy[0] = xs_[static_cast<std::size_t>(i)];
            std::span<const double> x(xy, static_cast<std::size_t>(grid.n));
            std::size_t k = grid.flat(i, j);
            for (int c = 0; c < grid.n; ++c) {
                cb_[c][k] = m.b_at(c, x);
                ch_[c][k] = m.h_at(c, x);
                cs_[c][k] = m.sigma_at(c, x);
            }
            if (f_hoisted_) f0_[k] = m.f(x, 0.0, {});
            if (g_hoisted_) g0_[k] = m.g(x, 0.0, {});
        }
    }

    dt_ = grid.dt > 0.0 ? grid.dt : auto_dt(m, grid, opts_);
    validate_scheme(m, grid, dt_, opts_);
    u_.assign(count, 0.0);
    un_.assign(count, 0.0);
}

void Marcher::choose_dt_for_horizon(double T) {
    double base = grid_.dt > 0.0 ? grid_.dt : auto_dt(m_, grid_, opts_);
    int steps = std::max(1, static_cast<int>(std::ceil(T / base - 1e-12)));
    dt_ = T / steps;
    validate_scheme(m_, grid_, dt_, opts_);
}

void Marcher::choose_dt_unit_chunks() {
    double base = grid_.dt > 0.0 ? grid_.dt : auto_dt(m_, grid_, opts_);
    steps_per_unit_ = std::max(1, static_cast<int>(std::ceil(1.0 / base - 1e-12)));
    dt_ = 1.0 / steps_per_unit_;
    validate_scheme(m_, grid_, dt_, opts_);
}

void Marcher::set_state(std::vector<double> values) {
    if (values.size() != grid_.size())
        throw NumericalError("marcher state does not match the grid");
    u_ = std::move(values);
    sup_ = 0.0;
    for (double v : u_) {
        if (!std::isfinite(v)) throw NumericalError("non-finite terminal condition");
        sup_ = std::max(sup_, std::fabs(v));
    }
    elapsed_ = 0.0;
}

void Marcher::advance(int steps) {
    for (int s = 0; s < steps; ++s) {
        if (grid_.n == 1) step_1d(); else step_2d();
        elapsed_ += dt_;
        if (blowup_bound_ > 0.0 && sup_ > blowup_bound_)
            throw NumericalError("blow-up detected after t = " + fmt(elapsed_) + ": sup|u| = "
                                 + fmt(sup_) + " exceeds the a-priori guard " + fmt(blowup_bound_)
                                 + " (CFL or coefficient fault)");
        if (!std::isfinite(sup_))
            throw NumericalError("non-finite value after t = " + fmt(elapsed_));
    }
}

void Marcher::step_1d() {
    const int mx = grid_.nodes[0];
    const double hx = grid_.h[0];
    const double inv_h = 1.0 / hx, inv_2h = 0.5 / hx, inv_h2 = 1.0 / (hx * hx);
    const double half_hi = 0.5 * m_.sigma_hi_sq(), half_lo = 0.5 * m_.sigma_lo_sq();
    const bool clamped = grid_.boundary == BoundaryPolicy::ClampedGradient;
    const double gl = clamped ? u_[0] : 2.0 * u_[0] - u_[1];
    const double gr = clamped ? u_[static_cast<std::size_t>(mx - 1)]
                              : 2.0 * u_[static_cast<std::size_t>(mx - 1)]
                                    - u_[static_cast<std::size_t>(mx - 2)];
    double track = 0.0;
    for (int i = 0; i < mx; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double uc = u_[k];
        const double um = i > 0 ? u_[k - 1] : gl;
        const double up = i < mx - 1 ? u_[k + 1] : gr;
        const double d2 = (up - 2.0 * uc + um) * inv_h2;
        const double duc = (up - um) * inv_2h;
        const double b = cb_[0][k], hh = ch_[0][k], s = cs_[0][k];
        const double dub = b >= 0.0 ? (up - uc) * inv_h : (uc - um) * inv_h;
        const double duh = hh >= 0.0 ? (up - uc) * inv_h : (uc - um) * inv_h;
        double fv, gv;
        if (f_hoisted_ && g_hoisted_) {
            fv = f0_[k];
            gv = g0_[k];
        } else {
            const double z = s * duc;
            std::span<const double> x(&xs_[k], 1);
            std::span<const double> zs(&z, 1);
            fv = f_hoisted_ ? f0_[k] : m_.f(x, uc, zs);
            gv = g_hoisted_ ? g0_[k] : m_.g(x, uc, zs);
        }
        fv += opts_.lin_f_y * uc;
        gv += opts_.lin_g_y * uc;
        const double H = s * s * d2 + 2.0 * hh * duh + 2.0 * gv;
        const double GH = H >= 0.0 ? half_hi * H : half_lo * H;
        const double v = uc + dt_ * (GH + b * dub + fv);
        un_[k] = v;
        track = std::max(track, std::fabs(v));
    }
    sup_ = track;
    u_.swap(un_);
}

void Marcher::step_2d() {
    const int mx = grid_.nodes[0], my = grid_.nodes[1];
    const double hx = grid_.h[0], hy = grid_.h[1];
    const double half_hi = 0.5 * m_.sigma_hi_sq(), half_lo = 0.5 * m_.sigma_lo_sq();
    const bool clamped = grid_.boundary == BoundaryPolicy::ClampedGradient;

    // ghost ring; interior copied, edges extended per the boundary policy
    const int px = mx + 2, py = my + 2;
    padded_.assign(static_cast<std::size_t>(px) * static_cast<std::size_t>(py), 0.0);
    auto pad = [&](int i, int j) -> double& {
        return padded_[static_cast<std::size_t>(j + 1) * px + static_cast<std::size_t>(i + 1)];
    };
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) pad(i, j) = u_[grid_.flat(i, j)];
    for (int j = 0; j < my; ++j) {
        pad(-1, j) = clamped ? pad(0, j) : 2.0 * pad(0, j) - pad(1, j);
        pad(mx, j) = clamped ? pad(mx - 1, j) : 2.0 * pad(mx - 1, j) - pad(mx - 2, j);
    }
    for (int i = -1; i <= mx; ++i) {
        pad(i, -1) = clamped ? pad(i, 0) : 2.0 * pad(i, 0) - pad(i, 1);
        pad(i, my) = clamped ? pad(i, my - 1) : 2.0 * pad(i, my - 1) - pad(i, my - 2);
    }

    double track = 0.0;
    double xy[2];
    for (int j = 0; j < my; ++j) {
        xy[1] = ys_[static_cast<std::size_t>(j)];
        for (int i = 0; i < mx; ++i) {
            xy[0] = xs_[static_cast<std::size_t>(i)];
            const std::size_t k = grid_.flat(i, j);
            const double uc = pad(i, j);
            const double uxm = pad(i - 1, j), uxp = pad(i + 1, j);
            const double uym = pad(i, j - 1), uyp = pad(i, j + 1);
            const double d2x = (uxp - 2.0 * uc + uxm) / (hx * hx);
            const double d2y = (uyp - 2.0 * uc + uym) / (hy * hy);
            const double ducx = (uxp - uxm) / (2.0 * hx);
            const double ducy = (uyp - uym) / (2.0 * hy);
            const double s1 = cs_[0][k], s2 = cs_[1][k];
            const double a12 = s1 * s2;
            double dxy = 0.0;
            if (a12 > 0.0) {
                dxy = (2.0 * uc + pad(i + 1, j + 1) + pad(i - 1, j - 1)
                       - uxp - uxm - uyp - uym) / (2.0 * hx * hy);
            } else if (a12 < 0.0) {
                dxy = -(2.0 * uc + pad(i + 1, j - 1) + pad(i - 1, j + 1)
                        - uxp - uxm - uyp - uym) / (2.0 * hx * hy);
            }
            const double b1 = cb_[0][k], b2 = cb_[1][k];
            const double h1 = ch_[0][k], h2 = ch_[1][k];
            const double dub1 = b1 >= 0.0 ? (uxp - uc) / hx : (uc - uxm) / hx;
            const double dub2 = b2 >= 0.0 ? (uyp - uc) / hy : (uc - uym) / hy;
            const double duh1 = h1 >= 0.0 ? (uxp - uc) / hx : (uc - uxm) / hx;
            const double duh2 = h2 >= 0.0 ? (uyp - uc) / hy : (uc - uym) / hy;
            double fv, gv;
            if (f_hoisted_ && g_hoisted_) {
                fv = f0_[k];
                gv = g0_[k];
            } else {
                const double z = s1 * ducx + s2 * ducy;
                std::span<const double> x(xy, 2);
                std::span<const double> zs(&z, 1);
                fv = f_hoisted_ ? f0_[k] : m_.f(x, uc, zs);
                gv = g_hoisted_ ? g0_[k] : m_.g(x, uc, zs);
            }
            fv += opts_.lin_f_y * uc;
            gv += opts_.lin_g_y * uc;
            const double H = s1 * s1 * d2x + s2 * s2 * d2y + 2.0 * a12 * dxy
                             + 2.0 * (h1 * duh1 + h2 * duh2) + 2.0 * gv;
            const double GH = H >= 0.0 ? half_hi * H : half_lo * H;
            const double v = uc + dt_ * (GH + b1 * dub1 + b2 * dub2 + fv);
            un_[k] = v;
            track = std::max(track, std::fabs(v));
        }
    }
    sup_ = track;
    u_.swap(un_);
}

PointwiseOperator assemble_operator(const ModelSpec& m, const Field& u, int i, int j) {
    const Grid& grid = u.grid();
    const bool clamped = grid.boundary == BoundaryPolicy::ClampedGradient;
    const int mx = grid.nodes[0];
    const int my = grid.n == 2 ? grid.nodes[1] : 1;
    if (i < 0 || i >= mx || j < 0 || j >= my)
        throw NumericalError("assemble_operator: node outside the grid");

    // ghost resolution matching the marcher's padding: x-extension first,
    // then y-extension of the extended row
    auto vx = [&](int ii, int jj) -> double {
        if (ii >= 0 && ii < mx) return u.at(ii, jj);
        if (clamped) return u.at(std::clamp(ii, 0, mx - 1), jj);
        if (ii < 0) return 2.0 * u.at(0, jj) - u.at(1, jj);
        return 2.0 * u.at(mx - 1, jj) - u.at(mx - 2, jj);
    };
    auto value = [&](int ii, int jj) -> double {
        if (jj >= 0 && jj < my) return vx(ii, jj);
        if (clamped) return vx(ii, std::clamp(jj, 0, my - 1));
        if (jj < 0) return 2.0 * vx(ii, 0) - vx(ii, 1);
        return 2.0 * vx(ii, my - 1) - vx(ii, my - 2);
    };

    double xy[2] = {grid.coord(0, i), grid.n == 2 ? grid.coord(1, j) : 0.0};
    std::span<const double> x(xy, static_cast<std::size_t>(grid.n));

    const double uc = value(i, j);
    const double hx = grid.h[0];
    const double uxm = value(i - 1, j), uxp = value(i + 1, j);
    const double d2x = (uxp - 2.0 * uc + uxm) / (hx * hx);
    const double ducx = (uxp - uxm) / (2.0 * hx);

    PointwiseOperator op;
    const double s1 = m.sigma_at(0, x);
    const double b1 = m.b_at(0, x);
    const double h1 = m.h_at(0, x);
    const double dub1 = b1 >= 0.0 ? (uxp - uc) / hx : (uc - uxm) / hx;
    const double duh1 = h1 >= 0.0 ? (uxp - uc) / hx : (uc - uxm) / hx;
    double z = s1 * ducx;
    double H = s1 * s1 * d2x + 2.0 * h1 * duh1;
    double drift = b1 * dub1;

    if (grid.n == 2) {
        const double hy = grid.h[1];
        const double uym = value(i, j - 1), uyp = value(i, j + 1);
        const double d2y = (uyp - 2.0 * uc + uym) / (hy * hy);
        const double ducy = (uyp - uym) / (2.0 * hy);
        const double s2 = m.sigma_at(1, x);
        const double b2 = m.b_at(1, x);
        const double h2 = m.h_at(1, x);
        const double a12 = s1 * s2;
        double dxy = 0.0;
        if (a12 > 0.0)
            dxy = (2.0 * uc + value(i + 1, j + 1) + value(i - 1, j - 1)
                   - uxp - uxm - uyp - uym) / (2.0 * hx * hy);
        else if (a12 < 0.0)
            dxy = -(2.0 * uc + value(i + 1, j - 1) + value(i - 1, j + 1)
                    - uxp - uxm - uyp - uym) / (2.0 * hx * hy);
        const double dub2 = b2 >= 0.0 ? (uyp - uc) / hy : (uc - uym) / hy;
        const double duh2 = h2 >= 0.0 ? (uyp - uc) / hy : (uc - uym) / hy;
        z += s2 * ducy;
        H += s2 * s2 * d2y + 2.0 * a12 * dxy + 2.0 * h2 * duh2;
        drift += b2 * dub2;
    }

    std::span<const double> zs(&z, 1);
    op.driver_term = m.f(x, uc, zs);
    H += 2.0 * m.g(x, uc, zs);
    op.H = H;
    op.drift_term = drift;
    op.total = m.g_fun(H) + drift + op.driver_term;
    if (!std::isfinite(op.total))
        throw NumericalError("non-finite operator at node (" + std::to_string(i) + ","
                             + std::to_string(j) + ")");
    return op;
}

namespace {

double default_blowup_bound(const ModelSpec& m, const ParabolicOptions& opts,
                            double phi_sup, double T) {
    double mu_eff = effective_mu_of(m, opts);
    double bound = mu_eff > 0.0 ? m.alpha / mu_eff + phi_sup
                                : phi_sup + m.alpha * std::max(T, 1.0);
    return opts.blowup_factor * std::max(bound, 1.0);
}

}  // namespace

TimeField solve_parabolic(const ModelSpec& m, const Field& phi, double T, const Grid& grid,
                          const ParabolicOptions& opts) {
    if (!phi.grid().same_layout(grid))
        throw NumericalError("terminal condition lives on a different grid");
    if (!phi.all_finite()) throw NumericalError("terminal condition has non-finite values");
    if (!(T > 0.0)) throw NumericalError("horizon must be positive");

    Marcher marcher(m, grid, opts);
    marcher.choose_dt_for_horizon(T);
    marcher.set_state(phi.values());
    marcher.set_blowup_bound(default_blowup_bound(m, opts, phi.sup_norm(), T));

    const int steps = static_cast<int>(std::lround(T / marcher.dt()));
    const int stride = opts.keep_snapshots
                           ? std::max(1, (steps + opts.max_snapshots - 2) / std::max(1, opts.max_snapshots - 1))
                           : steps;

    std::vector<std::pair<double, std::vector<double>>> slices;
    slices.emplace_back(T, phi.values());
    for (int done = 0; done < steps;) {
        int chunk = std::min(stride, steps - done);
        marcher.advance(chunk);
        done += chunk;
        slices.emplace_back(T - marcher.elapsed(), marcher.state());
    }

    TimeField out(grid);
    for (auto it = slices.rbegin(); it != slices.rend(); ++it)
        out.add_slice(it->first, std::move(it->second));
    return out;
}

BsdeValue solve_finite_bsde(const ModelSpec& m, const Field& phi, double T,
                            std::array<double, 2> x, const Grid& grid,
                            const ParabolicOptions& opts) {
    if (!grid.contains(x[0], grid.n == 2 ? x[1] : 0.0))
        throw NumericalError("starting point is outside the grid box");
    ParabolicOptions o = opts;
    o.keep_snapshots = false;
    TimeField tf = solve_parabolic(m, phi, T, grid, o);
    Field u0 = tf.front_field();

    BsdeValue out;
    out.y0 = u0.interp(x[0], x[1]);
    auto du = u0.gradient_at(x[0], x[1]);
    std::span<const double> xs(x.data(), static_cast<std::size_t>(grid.n));
    double z = m.sigma_at(0, xs) * du[0];
    if (grid.n == 2) z += m.sigma_at(1, xs) * du[1];
    out.z0 = {z, 0.0};
    return out;
}

Field solve_infinite(const ModelSpec& m, double tol, const Grid& grid,
                     const ParabolicOptions& opts) {
    if (!(tol > 0.0)) throw NumericalError("tolerance must be positive");
    const double mu_eff = effective_mu_of(m, opts);
    if (!(mu_eff > 0.0))
        throw NumericalError("solve_infinite requires a positive monotonicity constant");

    // horizon with (alpha/mu) exp(-mu n) <= tol/2
    int n_units = 1;
    if (m.alpha > 0.0) {
        double arg = 2.0 * m.alpha / (mu_eff * tol);
        if (arg > 1.0) n_units = std::max(1, static_cast<int>(std::ceil(std::log(arg) / mu_eff)));
    }

    Marcher marcher(m, grid, opts);
    marcher.choose_dt_unit_chunks();
    marcher.set_state(std::vector<double>(grid.size(), 0.0));
    marcher.set_blowup_bound(opts.blowup_factor * std::max(m.alpha / mu_eff, 1.0));

    const int spu = marcher.steps_per_unit();
    marcher.advance(spu * n_units);

    std::vector<double> prev = marcher.state();
    std::vector<double> decay_history;
    const int max_units = 4 * n_units;
    int total_units = n_units;
    for (;;) {
        marcher.advance(spu);
        ++total_units;
        double diff = 0.0;
        const auto& cur = marcher.state();
        for (std::size_t k = 0; k < cur.size(); ++k)
            diff = std::max(diff, std::fabs(cur[k] - prev[k]));
        decay_history.push_back(diff);
        if (diff <= 0.5 * tol) break;
        if (total_units >= max_units) {
            std::ostringstream os;
            os << "solve_infinite did not reach stationarity within " << max_units
               << " time units (residual decay:";
            for (double d : decay_history) os << ' ' << fmt(d);
            os << ")";
            throw NumericalError(os.str());
        }
        prev = cur;
    }

    Field out(grid, marcher.state());
    double bound = m.alpha / mu_eff + tol;
    if (out.sup_norm() > bound * (1.0 + 1e-9))
        throw NumericalError("a-priori bound violated: sup|u| = " + fmt(out.sup_norm())
                             + " > alpha/mu + tol = " + fmt(bound));
    return out;
}

Field solve_discounted(const ModelSpec& m, double eps, double gamma1, double gamma2,
                       const Grid& grid, double tol) {
    if (!(eps > 0.0)) throw NumericalError("discount rate eps must be positive");
    double margin = m.g_fun.dissipativity_margin(gamma1, gamma2);
    if (margin >= 0.0)
        throw NumericalError("infeasible ergodic weighting: gamma1 + 2G(gamma2) = " + fmt(margin)
                             + " >= 0");
    ParabolicOptions opts;
    opts.lin_f_y = gamma1 * eps;
    opts.lin_g_y = gamma2 * eps;
    opts.effective_mu = m.mu - margin * eps;
    return solve_infinite(m, tol, grid, opts);
}

Field residual(const ModelSpec& m, const Field& u, std::optional<double> lambda,
               double gamma1, double gamma2) {
    const Grid& grid = u.grid();
    const bool clamped = grid.boundary == BoundaryPolicy::ClampedGradient;
    const int mx = grid.nodes[0];
    const int my = grid.n == 2 ? grid.nodes[1] : 1;

    auto vx = [&](int ii, int jj) -> double {
        if (ii >= 0 && ii < mx) return u.at(ii, jj);
        if (clamped) return u.at(std::clamp(ii, 0, mx - 1), jj);
        if (ii < 0) return 2.0 * u.at(0, jj) - u.at(1, jj);
        return 2.0 * u.at(mx - 1, jj) - u.at(mx - 2, jj);
    };
    auto value = [&](int ii, int jj) -> double {
        if (jj >= 0 && jj < my) return vx(ii, jj);
        if (clamped) return vx(ii, std::clamp(jj, 0, my - 1));
        if (jj < 0) return 2.0 * vx(ii, 0) - vx(ii, 1);
        return 2.0 * vx(ii, my - 1) - vx(ii, my - 2);
    };

    Field out(grid);
    double xy[2];
    for (int j = 0; j < my; ++j) {
        xy[1] = grid.n == 2 ? grid.coord(1, j) : 0.0;
        for (int i = 0; i < mx; ++i) {
            xy[0] = grid.coord(0, i);
            std::span<const double> x(xy, static_cast<std::size_t>(grid.n));
            const double uc = value(i, j);
            const double hx = grid.h[0];
            const double uxm = value(i - 1, j), uxp = value(i + 1, j);
            const double d2x = (uxp - 2.0 * uc + uxm) / (hx * hx);
            const double ducx = (uxp - uxm) / (2.0 * hx);
            const double s1 = m.sigma_at(0, x);
            double z = s1 * ducx;
            double H = s1 * s1 * d2x + 2.0 * m.h_at(0, x) * ducx;
            double drift = m.b_at(0, x) * ducx;
            if (grid.n == 2) {
                const double hy = grid.h[1];
                const double uym = value(i, j - 1), uyp = value(i, j + 1);
                const double d2y = (uyp - 2.0 * uc + uym) / (hy * hy);
                const double ducy = (uyp - uym) / (2.0 * hy);
                const double s2 = m.sigma_at(1, x);
                const double a12 = s1 * s2;
                double dxy = (value(i + 1, j + 1) + value(i - 1, j - 1)
                              - value(i + 1, j - 1) - value(i - 1, j + 1)) / (4.0 * hx * hy);
                z += s2 * ducy;
                H += s2 * s2 * d2y + 2.0 * a12 * dxy + 2.0 * m.h_at(1, x) * ducy;
                drift += m.b_at(1, x) * ducy;
            }
            std::span<const double> zs(&z, 1);
            H += 2.0 * m.g(x, uc, zs);
            double total = drift + m.f(x, uc, zs);
            if (lambda) {
                H += 2.0 * gamma2 * (*lambda);
                total += gamma1 * (*lambda);
            }
            out.at(i, j) = m.g_fun(H) + total;
        }
    }
    return out;
}

double core_sup_norm(const Field& f) {
    const Grid& grid = f.grid();
    const int mx = grid.nodes[0];
    const int my = grid.n == 2 ? grid.nodes[1] : 1;
    const int qx = std::max(1, mx / 4);
    const int qy = grid.n == 2 ? std::max(1, my / 4) : 0;
    double m = 0.0;
    for (int j = (grid.n == 2 ? qy : 0); j <= (grid.n == 2 ? my - 1 - qy : 0); ++j)
        for (int i = qx; i <= mx - 1 - qx; ++i)
            m = std::max(m, std::fabs(f.at(i, j)));
    return m;
}

}  // namespace gebsde
