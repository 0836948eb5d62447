#include "gebsde/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "gebsde/rng.hpp"

namespace gebsde {

namespace {
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
}  // namespace

Scenario Scenario::constant(double T, int K, double level) {
    Scenario sc;
    sc.T = T;
    sc.levels.assign(static_cast<std::size_t>(K), level);
    return sc;
}

void Scenario::validate(const UncertaintyInterval& iv) const {
    if (!(T > 0.0) || levels.empty())
        throw NumericalError("scenario needs T > 0 and at least one step");
    for (double v : levels)
        if (v < iv.sigma_lo_sq - 1e-12 || v > iv.sigma_hi_sq + 1e-12)
            throw NumericalError("scenario level " + fmt(v) + " outside ["
                                 + fmt(iv.sigma_lo_sq) + ", " + fmt(iv.sigma_hi_sq) + "]");
}

PathBundle simulate_forward(const ModelSpec& m, const Scenario& sc,
                            std::array<double, 2> x0, int n_paths, std::uint64_t seed) {
    m.validate();
    sc.validate(m.g_fun.interval());
    if (n_paths <= 0) throw NumericalError("need at least one path");

    const int K = sc.steps();
    const double dt = sc.dt();
    const int n = m.n;

    PathBundle pb;
    pb.n_paths = n_paths;
    pb.K = K;
    pb.n = n;
    pb.dt = dt;
    pb.seed = seed;
    pb.levels = sc.levels;
    pb.states.resize(static_cast<std::size_t>(n_paths) * (K + 1) * n);
    pb.dB.resize(static_cast<std::size_t>(n_paths) * K);

    for (int p = 0; p < n_paths; ++p) {
        Rng rng = Rng::for_path(seed, static_cast<std::uint64_t>(p));
        double x[2] = {x0[0], n == 2 ? x0[1] : 0.0};
        for (int c = 0; c < n; ++c)
            pb.states[(static_cast<std::size_t>(p) * (K + 1)) * n + c] = x[c];
        for (int k = 0; k < K; ++k) {
            const double v = sc.levels[static_cast<std::size_t>(k)];
            const double dW = rng.normal() * std::sqrt(dt);
            const double dBk = std::sqrt(v) * dW;
            pb.dB[static_cast<std::size_t>(p) * K + k] = dBk;
            std::span<const double> xs(x, static_cast<std::size_t>(n));
            double nx[2];
            for (int c = 0; c < n; ++c)
                nx[c] = x[c] + m.b_at(c, xs) * dt + m.h_at(c, xs) * v * dt + m.sigma_at(c, xs) * dBk;
            for (int c = 0; c < n; ++c) {
                if (!std::isfinite(nx[c]))
                    throw NumericalError("non-finite state on path " + std::to_string(p)
                                         + " at step " + std::to_string(k));
                x[c] = nx[c];
                pb.states[(static_cast<std::size_t>(p) * (K + 1) + k + 1) * n + c] = x[c];
            }
        }
    }
    return pb;
}

void PathBundle::write_csv(std::ostream& os) const {
    os << "t,path_id,x" << (n == 2 ? ",y" : "") << ",dB,v\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (int p = 0; p < n_paths; ++p) {
        for (int k = 0; k <= K; ++k) {
            put(k * dt);
            os << ',' << p << ',';
            put(state(p, k, 0));
            if (n == 2) { os << ','; put(state(p, k, 1)); }
            os << ',';
            put(k < K ? dB[static_cast<std::size_t>(p) * K + k] : 0.0);
            os << ',';
            put(k < K ? levels[static_cast<std::size_t>(k)] : 0.0);
            os << '\n';
        }
    }
}

void PathBundle::write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_csv(os);
}

double upper_expectation_scenarios(const ModelSpec& m, const Expression& payoff,
                                   double T, int K, int M_levels,
                                   std::array<double, 2> x0, int n_paths, std::uint64_t seed) {
    m.validate();
    if (M_levels < 2) throw NumericalError("need at least 2 scenario levels");
    if (K < 1 || K > 8) throw NumericalError("scenario enumeration guarded at K <= 8");
    double combos = std::pow(static_cast<double>(M_levels), K);
    if (combos > 6561.0)
        throw NumericalError("scenario enumeration guard exceeded: M^K = " + fmt(combos)
                             + " > 6561");

    const double lo = m.sigma_lo_sq(), hi = m.sigma_hi_sq();
    std::vector<double> levels(static_cast<std::size_t>(M_levels));
    for (int i = 0; i < M_levels; ++i)
        levels[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (M_levels - 1);

    // the control is piecewise constant on K blocks; the Euler march inside
    // each block is refined independently so discretization bias stays well
    // below the Monte-Carlo band
    const int sub = std::min(128, std::max(1, static_cast<int>(std::ceil(T / K / 0.01))));
    const int fine = K * sub;
    const double dt = T / fine;

    // one normal table shared by every scenario (common random numbers)
    std::vector<double> xi(static_cast<std::size_t>(n_paths) * fine);
    for (int p = 0; p < n_paths; ++p) {
        Rng rng = Rng::for_path(seed, static_cast<std::uint64_t>(p));
        for (int k = 0; k < fine; ++k) xi[static_cast<std::size_t>(p) * fine + k] = rng.normal();
    }

    const int n = m.n;
    std::vector<int> pick(static_cast<std::size_t>(K), 0);
    double best = -std::numeric_limits<double>::infinity();
    for (;;) {
        double sum = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            double x[2] = {x0[0], n == 2 ? x0[1] : 0.0};
            for (int k = 0; k < fine; ++k) {
                const double v = levels[static_cast<std::size_t>(pick[static_cast<std::size_t>(k / sub)])];
                const double dBk = std::sqrt(v * dt) * xi[static_cast<std::size_t>(p) * fine + k];
                std::span<const double> xs(x, static_cast<std::size_t>(n));
                double nx[2];
                for (int c = 0; c < n; ++c)
                    nx[c] = x[c] + m.b_at(c, xs) * dt + m.h_at(c, xs) * v * dt
                            + m.sigma_at(c, xs) * dBk;
                for (int c = 0; c < n; ++c) x[c] = nx[c];
            }
            sum += payoff.eval({std::span<const double>(x, static_cast<std::size_t>(n)), 0.0, {}, {}});
        }
        best = std::max(best, sum / n_paths);
        // odometer over scenario assignments
        int pos = 0;
        while (pos < K) {
            if (++pick[static_cast<std::size_t>(pos)] < M_levels) break;
            pick[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == K) break;
    }
    return best;
}

namespace {

struct LatticeCoeffs {
    std::vector<double> xs, b, h, s, shift, cost;
};

LatticeCoeffs lattice_coeffs(const ModelSpec& m, const Grid& lattice,
                             const LatticeOptions& opts) {
    LatticeCoeffs c;
    const int mx = lattice.nodes[0];
    c.xs.resize(static_cast<std::size_t>(mx));
    c.b.resize(c.xs.size());
    c.h.resize(c.xs.size());
    c.s.resize(c.xs.size());
    c.shift.assign(c.xs.size(), 0.0);
    c.cost.assign(c.xs.size(), 0.0);
    for (int i = 0; i < mx; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        c.xs[k] = lattice.coord(0, i);
        std::span<const double> x(&c.xs[k], 1);
        c.b[k] = m.b_at(0, x);
        c.h[k] = m.h_at(0, x);
        c.s[k] = m.sigma_at(0, x);
        if (opts.drift_shift) c.shift[k] = opts.drift_shift(c.xs[k]);
        if (opts.running_cost) c.cost[k] = opts.running_cost(c.xs[k]);
    }
    return c;
}

double lattice_auto_dt(const ModelSpec& m, const LatticeCoeffs& c, const Grid& lattice) {
    const double dx = lattice.h[0];
    const double vhi = m.sigma_hi_sq();
    double denom = 0.0;
    for (std::size_t k = 0; k < c.xs.size(); ++k) {
        for (double v : {m.sigma_lo_sq(), vhi}) {
            double diff = c.s[k] * c.s[k] * v;
            double drift = std::fabs(c.b[k] + c.h[k] * v + c.shift[k]);
            denom = std::max(denom, diff / (dx * dx) + drift / dx);
        }
    }
    if (denom <= 0.0) return 0.1;
    return 0.95 / denom;
}

Field lattice_backward(const ModelSpec& m, const Expression* payoff, double T,
                       const Grid& lattice, const LatticeOptions& opts) {
    m.validate();
    if (lattice.n != 1) throw NumericalError("the lattice oracle supports 1-d state only");
    const int mx = lattice.nodes[0];
    const double dx = lattice.h[0];

    LatticeCoeffs c = lattice_coeffs(m, lattice, opts);

    double dt = lattice.dt > 0.0 ? lattice.dt : lattice_auto_dt(m, c, lattice);
    int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-12)));
    dt = T / steps;

    int nv = std::max(2, opts.v_levels);
    std::vector<double> vlevels(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i)
        vlevels[static_cast<std::size_t>(i)] =
            m.sigma_lo_sq() + (m.sigma_hi_sq() - m.sigma_lo_sq()) * i / (nv - 1);

    std::vector<double> cur(static_cast<std::size_t>(mx), 0.0), next(cur);
    if (payoff) {
        for (int i = 0; i < mx; ++i)
            cur[static_cast<std::size_t>(i)] =
                payoff->eval({std::span<const double>(&c.xs[static_cast<std::size_t>(i)], 1),
                              0.0, {}, {}});
    }

    const bool use_drivers = opts.use_model_drivers;
    for (int step = 0; step < steps; ++step) {
        for (int i = 0; i < mx; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double yc = cur[k];
            const double ym = i > 0 ? cur[k - 1] : 2.0 * cur[0] - cur[1];
            const double yp = i < mx - 1 ? cur[k + 1]
                                         : 2.0 * cur[static_cast<std::size_t>(mx - 1)]
                                               - cur[static_cast<std::size_t>(mx - 2)];
            const double z = c.s[k] * (yp - ym) / (2.0 * dx);
            std::span<const double> x(&c.xs[k], 1);
            std::span<const double> zs(&z, 1);
            double best = -std::numeric_limits<double>::infinity();
            for (double v : vlevels) {
                const double diff = c.s[k] * c.s[k] * v;
                const double drift = c.b[k] + c.h[k] * v + c.shift[k];
                const double pp = dt * (0.5 * diff / (dx * dx) + std::max(drift, 0.0) / dx);
                const double pm = dt * (0.5 * diff / (dx * dx) + std::max(-drift, 0.0) / dx);
                const double p0 = 1.0 - pp - pm;
                if (p0 < -1e-12)
                    throw NumericalError("negative stencil weight at x = " + fmt(c.xs[k])
                                         + ", v = " + fmt(v) + " (stability violated; shrink dt)");
                double val = pp * yp + pm * ym + p0 * yc;
                if (use_drivers)
                    val += dt * (m.f(x, yc, zs) + v * m.g(x, yc, zs));
                best = std::max(best, val);
            }
            next[k] = best + dt * c.cost[k];
            if (!std::isfinite(next[k]))
                throw NumericalError("non-finite lattice value at x = " + fmt(c.xs[k]));
        }
        cur.swap(next);
    }
    return Field(lattice, cur);
}

}  // namespace

Field lattice_value(const ModelSpec& m, const Expression& payoff, double T,
                    const Grid& lattice, const LatticeOptions& opts) {
    return lattice_backward(m, &payoff, T, lattice, opts);
}

void LinearDriver::validate(const GFunction& g, double alpha2,
                            std::optional<double> mu_check) const {
    if (std::fabs(b) > alpha2 + 1e-12 || std::fabs(d) > alpha2 + 1e-12)
        throw NumericalError("linear driver coefficients |b|, |d| must not exceed alpha2");
    if (mu_check && a + 2.0 * g(c) > -*mu_check + 1e-12)
        throw NumericalError("linear driver violates a + 2G(c) <= -mu");
}

double linear_bsde_explicit(const LinearDriver& ld, double T, const GFunction& g,
                            const LinearLatticeParams& params) {
    if (ld.payoff.empty()) throw NumericalError("linear driver needs a terminal payoff");
    if (!(T > 0.0)) throw NumericalError("horizon must be positive");
    const double lo = g.sigma_lo_sq(), hi = g.sigma_hi_sq();

    double W = params.half_width;
    if (W <= 0.0)  // diffusion spread plus the exponential-tilt drift
        W = 6.0 * std::sqrt(hi * T) + (std::fabs(ld.d) * hi + std::fabs(ld.b)) * T + 1.0;
    const double dx = params.dx;
    const int half = std::max(2, static_cast<int>(std::ceil(W / dx)));
    const int mx = 2 * half + 1;

    double dt = params.dt > 0.0 ? params.dt : 0.95 * dx * dx / hi;
    int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-12)));
    dt = T / steps;
    if (dt > dx * dx / hi * (1.0 + 1e-12))
        throw NumericalError("negative stencil weight (stability violated): shrink dt");

    int nv = std::max(2, params.v_levels);
    std::vector<double> vlevels(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i)
        vlevels[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (nv - 1);

    std::vector<double> cur(static_cast<std::size_t>(mx)), next(cur);
    for (int i = 0; i < mx; ++i) {
        double b = (i - half) * dx;
        cur[static_cast<std::size_t>(i)] =
            ld.payoff.eval({std::span<const double>(&b, 1), 0.0, {}, {}});
    }

    // per-level constants: probability stencil, exponential weight of the
    // carried process X, and tilts e^{theta dB} from its dB and dB~ parts
    struct Level {
        double p_side, p_mid, disc, tilt_up, tilt_dn, mn;
    };
    std::vector<Level> lv;
    for (double v : vlevels) {
        Level L{};
        L.p_side = v * dt / (2.0 * dx * dx);
        L.p_mid = 1.0 - 2.0 * L.p_side;
        double theta = ld.d + ld.b / v;
        L.disc = std::exp((ld.a - ld.b * ld.d) * dt + ld.c * v * dt
                          - 0.5 * ld.d * ld.d * v * dt - 0.5 * ld.b * ld.b * dt / v);
        L.tilt_up = std::exp(theta * dx);
        L.tilt_dn = std::exp(-theta * dx);
        L.mn = (ld.m_in + ld.n_in * v) * dt;
        lv.push_back(L);
    }

    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < mx; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double yc = cur[k];
            const double ym = i > 0 ? cur[k - 1] : 2.0 * cur[0] - cur[1];
            const double yp = i < mx - 1 ? cur[k + 1]
                                         : 2.0 * cur[static_cast<std::size_t>(mx - 1)]
                                               - cur[static_cast<std::size_t>(mx - 2)];
            double best = -std::numeric_limits<double>::infinity();
            for (const Level& L : lv) {
                double val = L.disc * (L.p_side * (L.tilt_up * yp + L.tilt_dn * ym)
                                       + L.p_mid * yc) + L.mn;
                best = std::max(best, val);
            }
            next[k] = best;
            if (!std::isfinite(best))
                throw NumericalError("non-finite value in the linear-driver lattice");
        }
        cur.swap(next);
    }
    return cur[static_cast<std::size_t>(half)];
}

Field girsanov_expectation_field(const ModelSpec& m, const ControlSpec& c,
                                 const std::function<std::size_t(double)>& feedback,
                                 double T, const Grid& lattice) {
    c.validate();
    LatticeOptions opts;
    opts.use_model_drivers = false;
    opts.drift_shift = [&m, &c, &feedback](double x) {
        std::span<const double> xs(&x, 1);
        auto r = c.R_at(feedback(x));
        return m.sigma_at(0, xs) * r[0];
    };
    opts.running_cost = [&c, &feedback](double x) {
        std::span<const double> xs(&x, 1);
        return c.kappa_at(xs, feedback(x));
    };
    return lattice_backward(m, nullptr, T, lattice, opts);
}

double girsanov_expectation(const ModelSpec& m, const ControlSpec& c,
                            const std::function<std::size_t(double)>& feedback,
                            double T, const Grid& lattice, double x0) {
    return girsanov_expectation_field(m, c, feedback, T, lattice).interp(x0);
}

}  // namespace gebsde
