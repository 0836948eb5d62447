#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gebsde/errors.hpp"

namespace gebsde {

/// Variable arities an expression may reference: x1..xn, y, z1..zd, u1..um.
/// Bare names x, z, u are accepted as aliases for x1, z1, u1.
struct VarSpec {
    int n = 1;  // state dimension
    int d = 1;  // Brownian dimension
    int m = 0;  // control dimension (0: u-variables rejected)
};

/// Evaluation point. Spans may be shorter than declared arity only if the
/// expression does not reference the missing slots.
struct EvalContext {
    std::span<const double> x{};
    double y = 0.0;
    std::span<const double> z{};
    std::span<const double> u{};
};

/// Parsed arithmetic tree. Immutable after construction, reentrant to
/// evaluate, deterministic: the same context yields bit-identical values.
class Expression {
public:
    Expression() = default;

    /// Recursive-descent parse; throws ConfigError with a 1-based column on
    /// syntax errors, unknown variables, or arity violations.
    static Expression parse(std::string_view text, const VarSpec& vars);

    /// Convenience: parse a constant or simple formula with default arity.
    static Expression constant(double v);

    double eval(const EvalContext& ctx) const;

    bool uses_x() const { return uses_x_; }
    bool uses_y() const { return uses_y_; }
    bool uses_z() const { return uses_z_; }
    bool uses_u() const { return uses_u_; }
    bool empty() const { return nodes_.empty(); }

    /// Canonical rendering; parse(to_string()) reproduces the same tree and
    /// to_string is a fixed point of parse-then-print.
    std::string to_string() const;

private:
    enum class Op : std::uint8_t {
        Const, VarX, VarY, VarZ, VarU,
        Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Exp, Tanh, Abs, Min, Max, Clamp
    };
    struct Node {
        Op op;
        double value = 0.0;  // Const payload or variable index
        int a = -1, b = -1, c = -1;
    };

    double eval_node(int idx, const EvalContext& ctx) const;
    void render(int idx, std::string& out, int parent_prec, bool right_side) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    bool uses_x_ = false, uses_y_ = false, uses_z_ = false, uses_u_ = false;

    friend class ExprParser;
};

}  // namespace gebsde
