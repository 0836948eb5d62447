#include "gebsde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace gebsde {

BoundaryPolicy boundary_policy_from_string(const std::string& name) {
    if (name == "linear-extrapolation") return BoundaryPolicy::LinearExtrapolation;
    if (name == "clamped-gradient") return BoundaryPolicy::ClampedGradient;
    throw ConfigError("unknown boundary policy '" + name
                      + "' (expected linear-extrapolation or clamped-gradient)");
}

std::string to_string(BoundaryPolicy p) {
    return p == BoundaryPolicy::LinearExtrapolation ? "linear-extrapolation" : "clamped-gradient";
}

namespace {
int axis_nodes(double lo, double hi, double h) {
    if (!(h > 0.0) || !(hi > lo))
        throw ConfigError("grid axis requires hi > lo and h > 0");
    int m = static_cast<int>(std::lround((hi - lo) / h)) + 1;
    if (m < 3) throw ConfigError("grid axis needs at least 3 nodes");
    return m;
}
}  // namespace

Grid::Grid(double x_lo, double x_hi, double hx, double dt_, BoundaryPolicy bp)
    : n(1), dt(dt_), boundary(bp) {
    lo[0] = x_lo; h[0] = hx;
    nodes[0] = axis_nodes(x_lo, x_hi, hx);
    hi[0] = x_lo + hx * (nodes[0] - 1);
    nodes[1] = 1;
}

Grid::Grid(double x_lo, double x_hi, double hx, double y_lo, double y_hi, double hy,
           double dt_, BoundaryPolicy bp)
    : n(2), dt(dt_), boundary(bp) {
    lo[0] = x_lo; h[0] = hx;
    nodes[0] = axis_nodes(x_lo, x_hi, hx);
    hi[0] = x_lo + hx * (nodes[0] - 1);
    lo[1] = y_lo; h[1] = hy;
    nodes[1] = axis_nodes(y_lo, y_hi, hy);
    hi[1] = y_lo + hy * (nodes[1] - 1);
}

Grid Grid::symmetric(double half_width, double hx, double dt_, BoundaryPolicy bp) {
    int half_nodes = std::max(1, static_cast<int>(std::ceil(half_width / hx)));
    double w = half_nodes * hx;
    return Grid(-w, w, hx, dt_, bp);
}

Grid Grid::dissipative_box(double eta, double x_eval, double hx, double dt_) {
    if (!(eta > 0.0))
        throw ConfigError("dissipative_box needs eta > 0; pass an explicit box otherwise");
    double half = std::max(8.0 / eta, 4.0) * (1.0 + std::fabs(x_eval));
    return symmetric(half, hx, dt_);
}

bool Grid::contains(double x, double y) const {
    const double eps0 = 1e-12 * (hi[0] - lo[0]);
    if (x < lo[0] - eps0 || x > hi[0] + eps0) return false;
    if (n == 2) {
        const double eps1 = 1e-12 * (hi[1] - lo[1]);
        if (y < lo[1] - eps1 || y > hi[1] + eps1) return false;
    }
    return true;
}

bool Grid::same_layout(const Grid& other) const {
    return n == other.n && nodes == other.nodes && lo == other.lo && h == other.h;
}

Field::Field(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ConfigError("field values do not match grid size");
}

Field Field::from_expression(const Grid& grid, const Expression& e) {
    Field f(grid);
    double xy[2];
    for (int j = 0; j < (grid.n == 2 ? grid.nodes[1] : 1); ++j) {
        xy[1] = grid.n == 2 ? grid.coord(1, j) : 0.0;
        for (int i = 0; i < grid.nodes[0]; ++i) {
            xy[0] = grid.coord(0, i);
            f.at(i, j) = e.eval({std::span<const double>(xy, static_cast<std::size_t>(grid.n)),
                                 0.0, {}, {}});
        }
    }
    return f;
}

namespace {
struct AxisWeight {
    int i0;
    double w1;  // weight on node i0+1
};
AxisWeight axis_weight(double x, double lo, double h, int nodes) {
    double s = (x - lo) / h;
    s = std::clamp(s, 0.0, static_cast<double>(nodes - 1));
    int i0 = std::min(static_cast<int>(s), nodes - 2);
    return {i0, s - i0};
}
}  // namespace

double Field::interp(double x, double y) const {
    auto ax = axis_weight(x, grid_.lo[0], grid_.h[0], grid_.nodes[0]);
    if (grid_.n == 1) {
        return (1.0 - ax.w1) * at(ax.i0) + ax.w1 * at(ax.i0 + 1);
    }
    auto ay = axis_weight(y, grid_.lo[1], grid_.h[1], grid_.nodes[1]);
    double v00 = at(ax.i0, ay.i0), v10 = at(ax.i0 + 1, ay.i0);
    double v01 = at(ax.i0, ay.i0 + 1), v11 = at(ax.i0 + 1, ay.i0 + 1);
    double v0 = (1.0 - ax.w1) * v00 + ax.w1 * v10;
    double v1 = (1.0 - ax.w1) * v01 + ax.w1 * v11;
    return (1.0 - ay.w1) * v0 + ay.w1 * v1;
}

std::array<double, 2> Field::gradient_at(double x, double y) const {
    std::array<double, 2> g{0.0, 0.0};
    g[0] = (interp(x + grid_.h[0], y) - interp(x - grid_.h[0], y)) / (2.0 * grid_.h[0]);
    if (grid_.n == 2)
        g[1] = (interp(x, y + grid_.h[1]) - interp(x, y - grid_.h[1])) / (2.0 * grid_.h[1]);
    return g;
}

std::array<double, 2> Field::gradient_node(int i, int j) const {
    std::array<double, 2> g{0.0, 0.0};
    const int mx = grid_.nodes[0];
    if (i == 0) g[0] = (at(1, j) - at(0, j)) / grid_.h[0];
    else if (i == mx - 1) g[0] = (at(mx - 1, j) - at(mx - 2, j)) / grid_.h[0];
    else g[0] = (at(i + 1, j) - at(i - 1, j)) / (2.0 * grid_.h[0]);
    if (grid_.n == 2) {
        const int my = grid_.nodes[1];
        if (j == 0) g[1] = (at(i, 1) - at(i, 0)) / grid_.h[1];
        else if (j == my - 1) g[1] = (at(i, my - 1) - at(i, my - 2)) / grid_.h[1];
        else g[1] = (at(i, j + 1) - at(i, j - 1)) / (2.0 * grid_.h[1]);
    }
    return g;
}

double Field::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

double Field::max_abs_diff(const Field& other) const {
    if (!grid_.same_layout(other.grid_))
        throw NumericalError("max_abs_diff: fields live on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k)
        m = std::max(m, std::fabs(values_[k] - other.values_[k]));
    return m;
}

bool Field::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

Field& Field::operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
}

Field Field::operator+(double c) const {
    Field f = *this;
    f += c;
    return f;
}

namespace {
void put(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}
}  // namespace

void Field::write_csv(std::ostream& os) const {
    os << "# grid ";
    put(os, grid_.lo[0]); os << ' '; put(os, grid_.hi[0]); os << ' '; put(os, grid_.h[0]);
    if (grid_.n == 2) {
        os << ' '; put(os, grid_.lo[1]); os << ' '; put(os, grid_.hi[1]); os << ' '; put(os, grid_.h[1]);
    }
    os << '\n';
    for (int j = 0; j < (grid_.n == 2 ? grid_.nodes[1] : 1); ++j) {
        for (int i = 0; i < grid_.nodes[0]; ++i) {
            put(os, grid_.coord(0, i));
            if (grid_.n == 2) { os << ','; put(os, grid_.coord(1, j)); }
            os << ',';
            put(os, at(i, j));
            os << '\n';
        }
    }
}

void Field::write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_csv(os);
}

void TimeField::add_slice(double t, std::vector<double> values) {
    if (values.size() != grid_.size())
        throw NumericalError("time slice does not match grid size");
    times_.push_back(t);
    values_.push_back(std::move(values));
}

Field TimeField::field(std::size_t k) const { return Field(grid_, values_[k]); }

void TimeField::write_csv(std::ostream& os) const {
    os << "# grid ";
    put(os, grid_.lo[0]); os << ' '; put(os, grid_.hi[0]); os << ' '; put(os, grid_.h[0]);
    if (grid_.n == 2) {
        os << ' '; put(os, grid_.lo[1]); os << ' '; put(os, grid_.hi[1]); os << ' '; put(os, grid_.h[1]);
    }
    os << " t\n";
    for (std::size_t k = 0; k < times_.size(); ++k) {
        for (int j = 0; j < (grid_.n == 2 ? grid_.nodes[1] : 1); ++j) {
            for (int i = 0; i < grid_.nodes[0]; ++i) {
                put(os, grid_.coord(0, i));
                if (grid_.n == 2) { os << ','; put(os, grid_.coord(1, j)); }
                os << ',';
                put(os, times_[k]);
                os << ',';
                put(os, values_[k][grid_.flat(i, j)]);
                os << '\n';
            }
        }
    }
}

void TimeField::write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_csv(os);
}

}  // namespace gebsde
