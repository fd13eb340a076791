#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace gbsde {

/// Free variables of a coefficient expression.
enum class Var : std::uint8_t { t = 0, x = 1, y = 2, z = 3 };

constexpr unsigned var_bit(Var v) { return 1u << static_cast<unsigned>(v); }
std::string_view var_name(Var v);

/// Variable bindings for expression evaluation. Variables that were never
/// bound raise EvalError when an expression reads them.
class Env {
public:
    Env() = default;

    static Env tx(double t, double x) { return Env{}.bind(Var::t, t).bind(Var::x, x); }
    static Env txyz(double t, double x, double y, double z) {
        return tx(t, x).bind(Var::y, y).bind(Var::z, z);
    }

    Env& bind(Var v, double value) {
        values_[static_cast<unsigned>(v)] = value;
        bound_ |= var_bit(v);
        return *this;
    }
    bool bound(Var v) const { return (bound_ & var_bit(v)) != 0; }
    double get(Var v) const { return values_[static_cast<unsigned>(v)]; }

private:
    std::array<double, 4> values_{};
    unsigned bound_ = 0;
};

enum class NodeKind : std::uint8_t {
    number,
    variable,
    add,
    sub,
    mul,
    div,
    pow,
    negate,
    max,
    min,
    abs,
    exp,
    log,
    sqrt,
    pos,  // a^+
    neg,  // a^-
};

/// Immutable expression tree. Copies share structure, so an Expr is cheap to
/// pass by value and safe to evaluate from several threads at once.
class Expr {
public:
    /// The literal 0.
    Expr();

    static Expr number(double value);
    static Expr variable(Var v);
    static Expr unary(NodeKind kind, Expr operand);
    static Expr binary(NodeKind kind, Expr lhs, Expr rhs);

    NodeKind kind() const;
    double value() const;  // number nodes only
    Var var() const;       // variable nodes only
    std::size_t arity() const;
    Expr child(std::size_t i) const;

    /// Throws EvalError on unbound variables, domain violations and
    /// non-finite intermediate results.
    double eval(const Env& env) const;

    /// Minimal-parenthesis rendering; parse(to_string()) == *this.
    std::string to_string() const;

    /// Bitmask of var_bit() for every variable referenced.
    unsigned free_vars() const;
    bool is_constant() const { return free_vars() == 0; }

    /// Longest root-to-leaf path, counting nodes.
    std::size_t height() const;

    friend bool operator==(const Expr& a, const Expr& b);

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Recursive-descent parser. Precedence, loosest first: + -, * /, unary -,
/// ^ (right-associative). Functions: max, min (2 args); abs, exp, log, sqrt,
/// pos, neg (1 arg). Throws ParseError with the byte offset of the failure.
Expr parse(std::string_view source);

inline double eval(const Expr& e, const Env& env) { return e.eval(env); }

}  // namespace gbsde
