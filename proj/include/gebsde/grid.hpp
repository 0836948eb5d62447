#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "gebsde/errors.hpp"
#include "gebsde/expression.hpp"

namespace gebsde {

enum class BoundaryPolicy {
    LinearExtrapolation,  // ghost node continues the edge slope (zero curvature)
    ClampedGradient,      // ghost node copies the edge value (zero outward slope)
};

BoundaryPolicy boundary_policy_from_string(const std::string& name);
std::string to_string(BoundaryPolicy p);

/// Tensor grid over a 1-d or 2-d box plus the explicit time step.
/// The upper bound per axis is snapped onto the node lattice.
struct Grid {
    int n = 1;
    std::array<double, 2> lo{-1.0, -1.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<double, 2> h{0.1, 0.1};
    std::array<int, 2> nodes{21, 1};
    double dt = 0.0;  // 0 means "choose from the CFL bound at solve time"
    BoundaryPolicy boundary = BoundaryPolicy::LinearExtrapolation;

    Grid() = default;
    Grid(double x_lo, double x_hi, double hx, double dt_ = 0.0,
         BoundaryPolicy bp = BoundaryPolicy::LinearExtrapolation);
    Grid(double x_lo, double x_hi, double hx, double y_lo, double y_hi, double hy,
         double dt_ = 0.0, BoundaryPolicy bp = BoundaryPolicy::LinearExtrapolation);

    /// Symmetric box [-half_width, half_width] with a node exactly at 0.
    static Grid symmetric(double half_width, double hx, double dt_ = 0.0,
                          BoundaryPolicy bp = BoundaryPolicy::LinearExtrapolation);

    /// Box sized from forward dissipativity so boundary influence at the
    /// evaluation region stays below tolerance: half-width
    /// max(8/eta, 4) * (1 + |x_eval|), snapped up to the node lattice.
    static Grid dissipative_box(double eta, double x_eval, double hx, double dt_ = 0.0);

    std::size_t size() const {
        return static_cast<std::size_t>(nodes[0]) * static_cast<std::size_t>(n == 2 ? nodes[1] : 1);
    }
    double coord(int axis, int i) const { return lo[axis] + h[axis] * i; }
    std::size_t flat(int i, int j = 0) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes[0])
             + static_cast<std::size_t>(i);
    }
    bool contains(double x, double y = 0.0) const;
    bool same_layout(const Grid& other) const;
};

/// Grid-sampled scalar function with multilinear off-grid evaluation.
class Field {
public:
    Field() = default;
    Field(Grid grid, double fill = 0.0);
    Field(Grid grid, std::vector<double> values);

    static Field from_expression(const Grid& grid, const Expression& e);

    const Grid& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& at(int i, int j = 0) { return values_[grid_.flat(i, j)]; }
    double at(int i, int j = 0) const { return values_[grid_.flat(i, j)]; }

    /// Multilinear interpolation; coordinates are clamped to the box.
    double interp(double x, double y = 0.0) const;

    /// Gradient of the interpolant by central differences with step h.
    std::array<double, 2> gradient_at(double x, double y = 0.0) const;

    /// Nodal gradient (central differences, one-sided at the edges).
    std::array<double, 2> gradient_node(int i, int j = 0) const;

    double sup_norm() const;
    double max_abs_diff(const Field& other) const;
    bool all_finite() const;

    Field& operator+=(double c);
    Field operator+(double c) const;

    void write_csv(std::ostream& os) const;
    void write_csv_file(const std::string& path) const;

private:
    Grid grid_{};
    std::vector<double> values_{};
};

/// Snapshots of a backward time march, ordered by increasing t; the slice at
/// the terminal time stores the supplied terminal condition verbatim.
class TimeField {
public:
    TimeField() = default;
    explicit TimeField(Grid grid) : grid_(grid) {}

    void add_slice(double t, std::vector<double> values);
    std::size_t slices() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    Field field(std::size_t k) const;
    const std::vector<double>& slice_values(std::size_t k) const { return values_[k]; }
    const Grid& grid() const { return grid_; }

    /// Slice with the smallest time (the t=0 value of a backward solve).
    Field front_field() const { return field(0); }

    void write_csv(std::ostream& os) const;
    void write_csv_file(const std::string& path) const;

private:
    Grid grid_{};
    std::vector<double> times_{};
    std::vector<std::vector<double>> values_{};
};

}  // namespace gebsde
