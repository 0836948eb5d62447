#include "gebsde/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace gebsde {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

class ExprParser {
public:
    ExprParser(std::string_view text, const VarSpec& vars, Expression& out)
        : text_(text), vars_(vars), out_(out) {}

    void run() {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty expression");
        out_.root_ = parse_expr();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected trailing input");
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression error at column " + std::to_string(pos_ + 1) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])) != 0)
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    int add(Expression::Node n) {
        out_.nodes_.push_back(n);
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    using Op = decltype(Expression::Node::op);

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = add({Op::Add, 0.0, lhs, parse_term(), -1});
            else if (accept('-')) lhs = add({Op::Sub, 0.0, lhs, parse_term(), -1});
            else return lhs;
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = add({Op::Mul, 0.0, lhs, parse_unary(), -1});
            else if (accept('/')) lhs = add({Op::Div, 0.0, lhs, parse_unary(), -1});
            else return lhs;
        }
    }

    int parse_unary() {
        if (accept('-')) return add({Op::Neg, 0.0, parse_unary(), -1, -1});
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        if (accept('^')) {
            // right-associative; the exponent may itself be a unary minus
            int expo = parse_unary();
            return add({Op::Pow, 0.0, base, expo, -1});
        }
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            int e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') return parse_number();
        if (is_ident_start(c)) return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    int parse_number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return add({Op::Const, value, -1, -1, -1});
    }

    int parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);

        if (peek() == '(') return parse_call(name);
        return make_var(name, start);
    }

    int parse_call(std::string_view name) {
        struct Fn { std::string_view name; Op op; int arity; };
        static constexpr Fn fns[] = {
            {"sin", Op::Sin, 1},  {"cos", Op::Cos, 1},   {"exp", Op::Exp, 1},
            {"tanh", Op::Tanh, 1}, {"abs", Op::Abs, 1},
            {"min", Op::Min, 2},  {"max", Op::Max, 2},   {"clamp", Op::Clamp, 3},
        };
        for (const auto& fn : fns) {
            if (name != fn.name) continue;
            expect('(');
            int a = parse_expr();
            int b = -1, c = -1;
            if (fn.arity >= 2) { expect(','); b = parse_expr(); }
            if (fn.arity >= 3) { expect(','); c = parse_expr(); }
            expect(')');
            return add({fn.op, 0.0, a, b, c});
        }
        fail("unknown function '" + std::string(name) + "'");
    }

    int make_var(std::string_view name, std::size_t at) {
        auto indexed = [&](int arity, Op op, bool& flag) -> int {
            int idx = 0;
            if (name.size() == 1) {
                idx = 0;  // bare alias for the first slot
            } else {
                int parsed = 0;
                auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), parsed);
                if (ec != std::errc() || ptr != name.data() + name.size() || parsed < 1) {
                    pos_ = at;
                    fail("unknown variable '" + std::string(name) + "'");
                }
                idx = parsed - 1;
            }
            if (idx >= arity) {
                pos_ = at;
                fail("unknown variable '" + std::string(name) + "' (index exceeds declared dimension "
                     + std::to_string(arity) + ")");
            }
            flag = true;
            return add({op, static_cast<double>(idx), -1, -1, -1});
        };

        if (name == "y") { out_.uses_y_ = true; return add({Op::VarY, 0.0, -1, -1, -1}); }
        if (name[0] == 'x') return indexed(vars_.n, Op::VarX, out_.uses_x_);
        if (name[0] == 'z') return indexed(vars_.d, Op::VarZ, out_.uses_z_);
        if (name[0] == 'u') return indexed(vars_.m, Op::VarU, out_.uses_u_);
        pos_ = at;
        fail("unknown variable '" + std::string(name) + "'");
    }

    std::string_view text_;
    VarSpec vars_;
    Expression& out_;
    std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, const VarSpec& vars) {
    Expression e;
    ExprParser(text, vars, e).run();
    return e;
}

Expression Expression::constant(double v) {
    Expression e;
    e.nodes_.push_back({Op::Const, v, -1, -1, -1});
    e.root_ = 0;
    return e;
}

double Expression::eval(const EvalContext& ctx) const {
    if (root_ < 0) throw EvalError("evaluating empty expression");
    double v = eval_node(root_, ctx);
    if (!std::isfinite(v)) throw EvalError("expression produced a non-finite value");
    return v;
}

double Expression::eval_node(int idx, const EvalContext& ctx) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::VarX: {
            auto i = static_cast<std::size_t>(n.value);
            if (i >= ctx.x.size()) throw EvalError("x" + std::to_string(i + 1) + " missing from context");
            return ctx.x[i];
        }
        case Op::VarY: return ctx.y;
        case Op::VarZ: {
            auto i = static_cast<std::size_t>(n.value);
            if (i >= ctx.z.size()) throw EvalError("z" + std::to_string(i + 1) + " missing from context");
            return ctx.z[i];
        }
        case Op::VarU: {
            auto i = static_cast<std::size_t>(n.value);
            if (i >= ctx.u.size()) throw EvalError("u" + std::to_string(i + 1) + " missing from context");
            return ctx.u[i];
        }
        case Op::Add: return eval_node(n.a, ctx) + eval_node(n.b, ctx);
        case Op::Sub: return eval_node(n.a, ctx) - eval_node(n.b, ctx);
        case Op::Mul: return eval_node(n.a, ctx) * eval_node(n.b, ctx);
        case Op::Div: {
            double den = eval_node(n.b, ctx);
            if (den == 0.0) throw EvalError("division by zero");
            return eval_node(n.a, ctx) / den;
        }
        case Op::Pow: {
            double base = eval_node(n.a, ctx), expo = eval_node(n.b, ctx);
            double v = std::pow(base, expo);
            if (!std::isfinite(v)) throw EvalError("pow produced a non-finite value");
            return v;
        }
        case Op::Neg: return -eval_node(n.a, ctx);
        case Op::Sin: return std::sin(eval_node(n.a, ctx));
        case Op::Cos: return std::cos(eval_node(n.a, ctx));
        case Op::Exp: {
            double v = std::exp(eval_node(n.a, ctx));
            if (!std::isfinite(v)) throw EvalError("exp overflow");
            return v;
        }
        case Op::Tanh: return std::tanh(eval_node(n.a, ctx));
        case Op::Abs: return std::fabs(eval_node(n.a, ctx));
        case Op::Min: return std::fmin(eval_node(n.a, ctx), eval_node(n.b, ctx));
        case Op::Max: return std::fmax(eval_node(n.a, ctx), eval_node(n.b, ctx));
        case Op::Clamp: {
            double v = eval_node(n.a, ctx);
            double lo = eval_node(n.b, ctx), hi = eval_node(n.c, ctx);
            return std::fmin(std::fmax(v, lo), hi);
        }
    }
    throw EvalError("corrupt expression node");
}

namespace {
// Precedence levels used by the renderer: additive 1, multiplicative 2,
// unary minus 3, power 4, atoms 5.
int precedence_of(int op_int) {
    switch (op_int) {
        case 5: case 6: return 1;   // Add, Sub
        case 7: case 8: return 2;   // Mul, Div
        case 10: return 3;          // Neg
        case 9: return 4;           // Pow
        default: return 5;
    }
}
}  // namespace

void Expression::render(int idx, std::string& out, int parent_prec, bool right_side) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    int op_int = static_cast<int>(n.op);
    int prec = precedence_of(op_int);

    auto binary = [&](const char* sym, bool left_assoc) {
        bool need = prec < parent_prec || (prec == parent_prec && right_side && left_assoc);
        if (need) out += '(';
        render(n.a, out, prec, false);
        out += sym;
        render(n.b, out, prec, true);
        if (need) out += ')';
    };
    auto call = [&](const char* name, int arity) {
        out += name;
        out += '(';
        render(n.a, out, 0, false);
        if (arity >= 2) { out += ", "; render(n.b, out, 0, false); }
        if (arity >= 3) { out += ", "; render(n.c, out, 0, false); }
        out += ')';
    };

    switch (n.op) {
        case Op::Const: out += format_double(n.value); return;
        case Op::VarX: out += "x" + std::to_string(static_cast<int>(n.value) + 1); return;
        case Op::VarY: out += "y"; return;
        case Op::VarZ: out += "z" + std::to_string(static_cast<int>(n.value) + 1); return;
        case Op::VarU: out += "u" + std::to_string(static_cast<int>(n.value) + 1); return;
        case Op::Add: binary(" + ", true); return;
        case Op::Sub: binary(" - ", true); return;
        case Op::Mul: binary("*", true); return;
        case Op::Div: binary("/", true); return;
        case Op::Pow: {
            // right-associative; parenthesize a lower-precedence base
            bool need = prec < parent_prec || (4 == parent_prec && !right_side);
            if (need) out += '(';
            render(n.a, out, prec + 1, false);
            out += '^';
            render(n.b, out, prec, true);
            if (need) out += ')';
            return;
        }
        case Op::Neg: {
            bool need = prec < parent_prec;
            if (need) out += '(';
            out += '-';
            render(n.a, out, prec, true);
            if (need) out += ')';
            return;
        }
        case Op::Sin: call("sin", 1); return;
        case Op::Cos: call("cos", 1); return;
        case Op::Exp: call("exp", 1); return;
        case Op::Tanh: call("tanh", 1); return;
        case Op::Abs: call("abs", 1); return;
        case Op::Min: call("min", 2); return;
        case Op::Max: call("max", 2); return;
        case Op::Clamp: call("clamp", 3); return;
    }
}

std::string Expression::to_string() const {
    if (root_ < 0) return "";
    std::string out;
    render(root_, out, 0, false);
    return out;
}

}  // namespace gebsde
