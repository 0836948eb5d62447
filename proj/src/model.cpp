#include "gebsde/model.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "gebsde/config.hpp"

namespace gebsde {

void ControlSpec::validate() const {
    if (points.empty()) throw ConfigError("control set U is empty");
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != m)
            throw ConfigError("control point dimension does not match m");
    if (static_cast<int>(R.size()) != d)
        throw ConfigError("control kernel R needs one component per Brownian dimension");
    for (std::size_t k = 0; k < points.size(); ++k) {
        auto r = R_at(k);
        double norm = 0.0;
        for (double v : r) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > alpha2 + 1e-12)
            throw ConfigError("control point " + std::to_string(k) + " violates |R(u)| <= alpha2 ("
                              + std::to_string(norm) + " > " + std::to_string(alpha2) + ")");
    }
}

std::vector<double> ControlSpec::R_at(std::size_t k) const {
    std::vector<double> out(R.size());
    std::span<const double> u(points[k]);
    for (std::size_t i = 0; i < R.size(); ++i) out[i] = R[i].eval({{}, 0.0, {}, u});
    return out;
}

double ControlSpec::kappa_at(std::span<const double> x, std::size_t k) const {
    return kappa.eval({x, 0.0, {}, std::span<const double>(points[k])});
}

DriverFn DriverFn::from_expression(Expression e) {
    DriverFn f;
    f.expr_ = std::move(e);
    return f;
}

DriverFn DriverFn::hamiltonian(ControlSpec c) {
    c.validate();
    DriverFn f;
    f.control_ = std::make_shared<const ControlSpec>(std::move(c));
    f.r_cache_.reserve(f.control_->points.size());
    for (std::size_t k = 0; k < f.control_->points.size(); ++k)
        f.r_cache_.push_back(f.control_->R_at(k));
    return f;
}

const ControlSpec& DriverFn::control() const {
    if (!control_) throw NumericalError("driver has no control specification");
    return *control_;
}

double DriverFn::operator()(std::span<const double> x, double y,
                            std::span<const double> z) const {
    if (!control_) return expr_.eval({x, y, z, {}});
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < control_->points.size(); ++k) {
        double v = control_->kappa_at(x, k);
        const auto& r = r_cache_[k];
        for (std::size_t i = 0; i < r.size() && i < z.size(); ++i) v += r[i] * z[i];
        if (v < best) best = v;
    }
    return best;
}

std::size_t DriverFn::argmin_control(std::span<const double> x,
                                     std::span<const double> z) const {
    const ControlSpec& c = control();
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < c.points.size(); ++k) {
        double v = c.kappa_at(x, k);
        const auto& r = r_cache_[k];
        for (std::size_t i = 0; i < r.size() && i < z.size(); ++i) v += r[i] * z[i];
        if (v < best) { best = v; arg = k; }
    }
    return arg;
}

bool DriverFn::uses_y() const { return control_ ? false : expr_.uses_y(); }
bool DriverFn::uses_z() const { return control_ ? true : expr_.uses_z(); }

std::string DriverFn::to_string() const {
    if (!control_) return expr_.to_string();
    std::string out = "min over U of " + control_->kappa.to_string() + " + R(u).z, |U| = "
                      + std::to_string(control_->points.size());
    return out;
}

void ModelSpec::validate() const {
    if (n != 1 && n != 2) throw ConfigError("state dimension n must be 1 or 2");
    if (d != 1) throw ConfigError("Brownian dimension d must be 1 for the model pipeline");
    if (static_cast<int>(b.size()) != n) throw ConfigError("drift b needs n components");
    if (static_cast<int>(h.size()) != n) throw ConfigError("quadratic-variation drift h needs n components");
    if (static_cast<int>(sigma.size()) != n) throw ConfigError("diffusion sigma needs n components");
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("constant ") + name + " must be finite and nonnegative");
    };
    nonneg(L, "L");
    nonneg(alpha1, "alpha1");
    nonneg(alpha2, "alpha2");
    nonneg(mu, "mu");
    nonneg(eta, "eta");
    nonneg(alpha, "alpha");
}

namespace {

Expression parse_coeff(const ConfigSection& sec, const std::string& key, const VarSpec& vars) {
    if (!sec.has(key)) throw ConfigError("missing coefficient " + key);
    try {
        return Expression::parse(sec.str(key), vars);
    } catch (const ConfigError& e) {
        throw ConfigError("coefficient " + key + ": " + e.what());
    }
}

std::vector<Expression> parse_coeff_vector(const ConfigSection& sec, const std::string& key,
                                           int count, const VarSpec& vars) {
    if (!sec.has(key)) throw ConfigError("missing coefficient " + key);
    auto texts = sec.strings(key);
    if (static_cast<int>(texts.size()) != count)
        throw ConfigError("coefficient " + key + " needs " + std::to_string(count)
                          + " component(s), got " + std::to_string(texts.size()));
    std::vector<Expression> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        try {
            out.push_back(Expression::parse(t, vars));
        } catch (const ConfigError& e) {
            throw ConfigError("coefficient " + key + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

ModelSpec build_model(const Config& cfg) {
    const ConfigSection& mdl = cfg.section("model");
    const ConfigSection& unc = cfg.section("uncertainty");

    ModelSpec m;
    m.n = static_cast<int>(mdl.number_or("n", 1.0));
    m.d = static_cast<int>(mdl.number_or("d", 1.0));
    if (m.n != 1 && m.n != 2) throw ConfigError("[model] n must be 1 or 2");
    if (m.d != 1) throw ConfigError("[model] d must be 1");

    VarSpec xvars{m.n, m.d, 0};     // coefficients of x only
    VarSpec fvars{m.n, m.d, 0};     // drivers see x, y, z

    m.b = parse_coeff_vector(mdl, "b", m.n, xvars);
    m.h = parse_coeff_vector(mdl, "h", m.n, xvars);
    m.sigma = parse_coeff_vector(mdl, "sigma", m.n, xvars);
    for (const char* key : {"b", "h", "sigma"}) {
        const auto& vec = key[0] == 'b' ? m.b : (key[0] == 'h' ? m.h : m.sigma);
        for (const auto& e : vec)
            if (e.uses_y() || e.uses_z())
                throw ConfigError(std::string("coefficient ") + key + " may only reference x variables");
    }
    m.f = DriverFn::from_expression(parse_coeff(mdl, "f", fvars));
    m.g = DriverFn::from_expression(parse_coeff(mdl, "g", fvars));

    m.L = mdl.number_or("L", 0.0);
    m.alpha1 = mdl.number_or("alpha1", 0.0);
    m.alpha2 = mdl.number_or("alpha2", 0.0);
    m.mu = mdl.number_or("mu", 0.0);
    m.eta = mdl.number_or("eta", 0.0);
    m.alpha = mdl.number_or("alpha", 0.0);

    int udim = static_cast<int>(unc.number_or("d", 1.0));
    m.g_fun = GFunction(UncertaintyInterval(unc.number("sigma_lo_sq"),
                                            unc.number("sigma_hi_sq"), udim));
    if (udim != m.d)
        throw ConfigError("[uncertainty] dimension must match the model Brownian dimension");

    m.validate();
    return m;
}

ModelSpec parse_model(const std::string& config_text) {
    return build_model(Config::parse(config_text));
}

DriverFn hamiltonian_from_control(const ControlSpec& c) {
    return DriverFn::hamiltonian(c);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1) { out.push_back(0.5 * (lo + hi)); return out; }
    for (int i = 0; i < count; ++i)
        out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
}

struct WorstCase {
    double margin = std::numeric_limits<double>::infinity();
    std::string witness;
    void offer(double m, const std::string& w) {
        if (m < margin) { margin = m; witness = w; }
    }
};

}  // namespace

bool AssumptionReport::all_hold() const {
    for (const auto& c : checks)
        if (c.checkable && !c.holds) return false;
    return true;
}

const AssumptionCheck& AssumptionReport::get(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw NumericalError("assumption '" + name + "' not present in report");
}

std::string AssumptionReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << c.name << ": ";
        if (!c.checkable) {
            os << "not checkable numerically";
        } else if (c.holds) {
            os << "holds on sample (worst margin " << fmt(c.margin) << ")";
        } else {
            os << "VIOLATED (margin " << fmt(c.margin) << ", witness " << c.witness << ")";
        }
        if (!c.note.empty()) os << "  [" << c.note << "]";
        os << '\n';
    }
    return os.str();
}

AssumptionReport check_assumptions(const ModelSpec& m, const SamplePlan& plan) {
    m.validate();
    const GFunction& G = m.g_fun;
    const double tol = 1e-9;

    auto x_probes_1d = linspace(plan.x_lo, plan.x_hi, plan.nx);
    // n=2 probes walk a sparse 2-d lattice to keep pair counts desk-scale
    std::vector<std::vector<double>> x_probes;
    if (m.n == 1) {
        for (double x : x_probes_1d) x_probes.push_back({x});
    } else {
        auto side = linspace(plan.x_lo, plan.x_hi, std::max(3, plan.nx / 3));
        for (double a : side)
            for (double b2 : side) x_probes.push_back({a, b2});
    }
    auto y_probes = linspace(plan.y_lo, plan.y_hi, plan.ny);
    auto z_probes = linspace(plan.z_lo, plan.z_hi, plan.nz);

    auto eval_guarded = [](const auto& fn, const std::string& what) -> double {
        try {
            return fn();
        } catch (const EvalError& e) {
            throw EvalError(std::string(e.what()) + " while probing " + what);
        }
    };

    auto point_str = [&](std::span<const double> x) {
        std::string s = "x=(";
        for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + fmt(x[i]);
        return s + ")";
    };

    AssumptionReport report;

    // B1 / H4: |f(x,0,0)| + 2 G(|g(x,0,0)|) <= alpha on the probe lattice.
    {
        WorstCase wc;
        for (const auto& xp : x_probes) {
            std::span<const double> x(xp);
            double z0[2] = {0.0, 0.0};
            std::span<const double> z(z0, static_cast<std::size_t>(m.d));
            double fv = eval_guarded([&] { return m.f(x, 0.0, z); }, "B1 at " + point_str(x));
            double gv = eval_guarded([&] { return m.g(x, 0.0, z); }, "B1 at " + point_str(x));
            double bound = std::fabs(fv) + 2.0 * G(std::fabs(gv));
            wc.offer(m.alpha - bound, point_str(x) + " bound=" + fmt(bound));
        }
        report.checks.push_back({"B1", true, wc.margin >= -tol, wc.margin, wc.witness,
                                 "|f(x,0,0)| + 2G(|g(x,0,0)|) <= alpha"});
        report.checks.push_back({"H4", true, wc.margin >= -tol, wc.margin, wc.witness,
                                 "identified with B1 (time-homogeneous coefficients)"});
    }

    // B2: joint Lipschitz bounds for b, h, sigma, f, g on sampled pairs.
    {
        WorstCase wc;
        auto pair_loop = [&](auto&& body) {
            for (std::size_t i = 0; i < x_probes.size(); ++i)
                for (std::size_t j = i + 1; j < x_probes.size(); ++j) body(x_probes[i], x_probes[j]);
        };
        pair_loop([&](const std::vector<double>& xa, const std::vector<double>& xb) {
            std::span<const double> x(xa), xp(xb);
            double dx = 0.0;
            for (int c = 0; c < m.n; ++c) dx += (xa[c] - xb[c]) * (xa[c] - xb[c]);
            dx = std::sqrt(dx);
            if (dx == 0.0) return;
            double dbh = 0.0, dsig = 0.0;
            for (int c = 0; c < m.n; ++c) {
                dbh += std::fabs(m.b_at(c, x) - m.b_at(c, xp));
                dbh += std::fabs(m.h_at(c, x) - m.h_at(c, xp));
                double ds = m.sigma_at(c, x) - m.sigma_at(c, xp);
                dsig += ds * ds;
            }
            dsig = std::sqrt(dsig);
            wc.offer((m.L * dx - dbh) / dx, point_str(x) + "," + point_str(xp) + " (b,h)");
            wc.offer((m.alpha1 * dx - dsig) / dx, point_str(x) + "," + point_str(xp) + " (sigma)");
            // f, g at a fixed (y, z) pair set: x-direction only
            double z0[1] = {z_probes.front()};
            std::span<const double> z(z0, 1);
            double df = std::fabs(m.f(x, y_probes.front(), z) - m.f(xp, y_probes.front(), z));
            double dg = std::fabs(m.g(x, y_probes.front(), z) - m.g(xp, y_probes.front(), z));
            wc.offer((m.L * dx - (df + dg)) / dx, point_str(x) + "," + point_str(xp) + " (f,g)");
        });
        // z-direction of f, g at fixed x, y
        for (double za : z_probes)
            for (double zb : z_probes) {
                if (za == zb) continue;
                double xa0[2] = {x_probes.front()[0], m.n == 2 ? x_probes.front()[1] : 0.0};
                std::span<const double> x(xa0, static_cast<std::size_t>(m.n));
                double z1[1] = {za}, z2[1] = {zb};
                double df = std::fabs(m.f(x, 0.0, std::span<const double>(z1, 1))
                                      - m.f(x, 0.0, std::span<const double>(z2, 1)));
                double dg = std::fabs(m.g(x, 0.0, std::span<const double>(z1, 1))
                                      - m.g(x, 0.0, std::span<const double>(z2, 1)));
                double dz = std::fabs(za - zb);
                wc.offer((m.alpha2 * dz - (df + dg)) / dz, "z=" + fmt(za) + ",z'=" + fmt(zb));
            }
        report.checks.push_back({"B2", true, wc.margin >= -tol, wc.margin, wc.witness,
                                 "Lipschitz bounds with constants L, alpha1, alpha2"});
    }

    // B3 / H3: y-monotonicity secant inequality.
    {
        WorstCase wc;
        for (const auto& xp : x_probes) {
            std::span<const double> x(xp);
            for (double za : z_probes) {
                double z0[1] = {za};
                std::span<const double> z(z0, 1);
                for (double ya : y_probes)
                    for (double yb : y_probes) {
                        if (ya == yb) continue;
                        double dy = ya - yb;
                        double df = m.f(x, ya, z) - m.f(x, yb, z);
                        double dg = m.g(x, ya, z) - m.g(x, yb, z);
                        double lhs = df * dy + 2.0 * G(dg * dy);
                        double margin = -lhs / (dy * dy) - m.mu;
                        wc.offer(margin, point_str(x) + " y=" + fmt(ya) + ",y'=" + fmt(yb)
                                             + ",z=" + fmt(za));
                    }
            }
        }
        report.checks.push_back({"B3", true, wc.margin >= -tol, wc.margin, wc.witness,
                                 "secant monotonicity in y with constant mu"});
        report.checks.push_back({"H3", true, wc.margin >= -tol, wc.margin, wc.witness,
                                 "identified with B3 (time-homogeneous coefficients)"});
    }

    // B4: forward dissipativity.
    {
        WorstCase wc;
        for (std::size_t i = 0; i < x_probes.size(); ++i)
            for (std::size_t j = i + 1; j < x_probes.size(); ++j) {
                std::span<const double> x(x_probes[i]), xp(x_probes[j]);
                double dx2 = 0.0;
                double inner_b = 0.0, inner_h = 0.0, dsig2 = 0.0;
                for (int c = 0; c < m.n; ++c) {
                    double dxc = x[c] - xp[c];
                    dx2 += dxc * dxc;
                    inner_b += dxc * (m.b_at(c, x) - m.b_at(c, xp));
                    inner_h += dxc * (m.h_at(c, x) - m.h_at(c, xp));
                    double ds = m.sigma_at(c, x) - m.sigma_at(c, xp);
                    dsig2 += ds * ds;
                }
                if (dx2 == 0.0) continue;
                double lhs = G(dsig2 + 2.0 * inner_h) + inner_b;
                double margin = -lhs / dx2 - m.eta;
                wc.offer(margin, point_str(x) + "," + point_str(xp));
            }
        report.checks.push_back({"B4", true, wc.margin >= -tol, wc.margin, wc.witness,
                                 "forward dissipativity with rate eta"});
    }

    // B5: arithmetic condition on the constants.
    {
        double margin = m.eta - (1.0 + m.sigma_hi_sq()) * m.alpha1 * m.alpha2;
        report.checks.push_back({"B5", true, margin > 0.0, margin,
                                 margin > 0.0 ? "" : "constants",
                                 "eta - (1+sigma_hi_sq)*alpha1*alpha2 > 0"});
    }

    // H1: the integrability exponent has no finite-sample counterpart.
    report.checks.push_back({"H1", false, false, 0.0, "",
                             "integrability exponent; not checkable numerically"});

    return report;
}

}  // namespace gebsde
