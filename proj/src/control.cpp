#include "gebsde/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "gebsde/mc_oracle.hpp"

namespace gebsde {

std::size_t FeedbackTable::nearest(double x) const {
    if (xs.empty()) throw NumericalError("empty feedback table");
    if (x <= xs.front()) return u_index.front();
    if (x >= xs.back()) return u_index.back();
    double h = xs[1] - xs[0];
    auto i = static_cast<std::size_t>(std::lround((x - xs.front()) / h));
    i = std::min(i, xs.size() - 1);
    return u_index[i];
}

void FeedbackTable::write_csv(std::ostream& os, const ControlSpec& c) const {
    os << "x,u_index";
    for (int k = 0; k < c.m; ++k) os << ",u_value" << (c.m > 1 ? std::to_string(k + 1) : "");
    os << '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        put(xs[i]);
        os << ',' << u_index[i];
        for (int k = 0; k < c.m; ++k) {
            os << ',';
            put(c.points[u_index[i]][static_cast<std::size_t>(k)]);
        }
        os << '\n';
    }
}

void FeedbackTable::write_csv_file(const std::string& path, const ControlSpec& c) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_csv(os, c);
}

FeedbackTable optimal_feedback(const ControlSpec& c, const ErgodicSolution& sol,
                               const ModelSpec& m) {
    c.validate();
    const Grid& g = sol.v.grid();
    if (g.n != 1) throw NumericalError("feedback tables support 1-d state only");

    FeedbackTable fb;
    fb.xs.reserve(static_cast<std::size_t>(g.nodes[0]));
    fb.u_index.reserve(fb.xs.capacity());
    for (int i = 0; i < g.nodes[0]; ++i) {
        double x = g.coord(0, i);
        std::span<const double> xs(&x, 1);
        double z = m.sigma_at(0, xs) * sol.v.gradient_node(i)[0];
        std::span<const double> zs(&z, 1);
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t k = 0; k < c.points.size(); ++k) {
            double val = c.kappa_at(xs, k);
            auto r = c.R_at(k);
            for (std::size_t q = 0; q < r.size() && q < zs.size(); ++q) val += r[q] * zs[q];
            if (val < best) { best = val; arg = k; }
        }
        fb.xs.push_back(x);
        fb.u_index.push_back(arg);
    }
    return fb;
}

CostEstimate evaluate_J(const ModelSpec& m, const ControlSpec& c, const FeedbackTable& fb,
                        double x, const std::vector<double>& T_list, const Grid& lattice,
                        double lambda_ref, bool have_lambda) {
    if (T_list.size() < 2) throw NumericalError("need at least two horizons");
    for (std::size_t k = 1; k < T_list.size(); ++k)
        if (!(T_list[k] > T_list[k - 1])) throw NumericalError("horizons must be increasing");

    auto feedback = [&fb](double xq) { return fb.nearest(xq); };

    CostEstimate est;
    for (double T : T_list) {
        double v = girsanov_expectation(m, c, feedback, T, lattice, x);
        est.horizons.push_back(T);
        est.value.push_back(v);
        est.J.push_back(v / T);
    }
    std::size_t n = est.horizons.size();
    est.extrapolated = (est.value[n - 1] - est.value[n - 2])
                       / (est.horizons[n - 1] - est.horizons[n - 2]);
    est.gap_to_lambda = have_lambda ? est.extrapolated - lambda_ref : 0.0;
    for (double v : est.value)
        if (!std::isfinite(v)) throw NumericalError("horizon instability in cost evaluation");
    return est;
}

}  // namespace gebsde
