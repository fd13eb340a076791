#include "gbsde/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <system_error>
#include <utility>

#include "gbsde/errors.hpp"

namespace gbsde {

ParseError::ParseError(std::size_t offset, std::string expected, std::string found)
    : std::runtime_error("parse error at byte " + std::to_string(offset) + ": expected " +
                         expected + ", found " + found),
      offset_(offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

DivergenceError::DivergenceError(const std::string& what, std::size_t layer)
    : std::runtime_error(what), layer_(layer) {}

std::string_view var_name(Var v) {
    switch (v) {
        case Var::t: return "t";
        case Var::x: return "x";
        case Var::y: return "y";
        case Var::z: return "z";
    }
    return "?";
}

struct Expr::Node {
    NodeKind kind = NodeKind::number;
    double value = 0.0;
    Var var = Var::x;
    unsigned free_vars = 0;
    std::uint32_t height = 1;
    std::array<std::shared_ptr<const Node>, 2> kids{};
};

namespace {

struct FunctionInfo {
    std::string_view name;
    NodeKind kind;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 8> kFunctions{{
    {"max", NodeKind::max, 2},
    {"min", NodeKind::min, 2},
    {"abs", NodeKind::abs, 1},
    {"exp", NodeKind::exp, 1},
    {"log", NodeKind::log, 1},
    {"sqrt", NodeKind::sqrt, 1},
    {"pos", NodeKind::pos, 1},
    {"neg", NodeKind::neg, 1},
}};

const FunctionInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

const FunctionInfo* find_function(NodeKind kind) {
    for (const auto& f : kFunctions) {
        if (f.kind == kind) return &f;
    }
    return nullptr;
}

bool is_binary_op(NodeKind k) {
    return k == NodeKind::add || k == NodeKind::sub || k == NodeKind::mul || k == NodeKind::div ||
           k == NodeKind::pow;
}

std::size_t arity_of(NodeKind k) {
    if (k == NodeKind::number || k == NodeKind::variable) return 0;
    if (is_binary_op(k)) return 2;
    if (k == NodeKind::negate) return 1;
    return find_function(k)->arity;
}

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

[[noreturn]] void eval_fail(const std::string& what) { throw EvalError(what); }

double checked(double v, const char* op) {
    if (!std::isfinite(v)) eval_fail(std::string("non-finite result in ") + op);
    return v;
}

double eval_node(const Expr::Node& n, const Env& env) {
    switch (n.kind) {
        case NodeKind::number:
            return n.value;
        case NodeKind::variable:
            if (!env.bound(n.var)) {
                eval_fail("unbound variable '" + std::string(var_name(n.var)) + "'");
            }
            return env.get(n.var);
        default:
            break;
    }
    const double a = eval_node(*n.kids[0], env);
    switch (n.kind) {
        case NodeKind::negate: return -a;
        case NodeKind::abs: return std::fabs(a);
        case NodeKind::pos: return a > 0.0 ? a : 0.0;
        case NodeKind::neg: return a < 0.0 ? -a : 0.0;
        case NodeKind::exp: return checked(std::exp(a), "exp");
        case NodeKind::log:
            if (!(a > 0.0)) eval_fail("log of non-positive argument " + format_number(a));
            return std::log(a);
        case NodeKind::sqrt:
            if (a < 0.0) eval_fail("sqrt of negative argument " + format_number(a));
            return std::sqrt(a);
        default:
            break;
    }
    const double b = eval_node(*n.kids[1], env);
    switch (n.kind) {
        case NodeKind::add: return checked(a + b, "+");
        case NodeKind::sub: return checked(a - b, "-");
        case NodeKind::mul: return checked(a * b, "*");
        case NodeKind::div:
            if (b == 0.0) eval_fail("division by zero");
            return checked(a / b, "/");
        case NodeKind::pow:
            if (a < 0.0 && std::trunc(b) != b) {
                eval_fail("negative base " + format_number(a) + " with non-integer exponent");
            }
            return checked(std::pow(a, b), "^");
        case NodeKind::max: return a > b ? a : b;
        case NodeKind::min: return a < b ? a : b;
        default:
            break;
    }
    eval_fail("corrupt expression node");
}

bool nodes_equal(const Expr::Node& a, const Expr::Node& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    if (a.kind == NodeKind::number) {
        return a.value == b.value;
    }
    if (a.kind == NodeKind::variable) return a.var == b.var;
    const std::size_t n = arity_of(a.kind);
    for (std::size_t i = 0; i < n; ++i) {
        if (!nodes_equal(*a.kids[i], *b.kids[i])) return false;
    }
    return true;
}

// Printing precedence levels; higher binds tighter.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr::Node& n) {
    switch (n.kind) {
        case NodeKind::add:
        case NodeKind::sub: return kPrecAdd;
        case NodeKind::mul:
        case NodeKind::div: return kPrecMul;
        case NodeKind::negate: return kPrecUnary;
        case NodeKind::pow: return kPrecPow;
        default: return kPrecAtom;
    }
}

void print_node(const Expr::Node& n, std::string& out);

void print_child(const Expr::Node& child, int min_prec, std::string& out) {
    if (precedence(child) < min_prec) {
        out += '(';
        print_node(child, out);
        out += ')';
    } else {
        print_node(child, out);
    }
}

void print_node(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::number: out += format_number(n.value); return;
        case NodeKind::variable: out += var_name(n.var); return;
        case NodeKind::negate:
            out += '-';
            print_child(*n.kids[0], kPrecUnary, out);
            return;
        case NodeKind::add:
        case NodeKind::sub:
        case NodeKind::mul:
        case NodeKind::div: {
            const int p = precedence(n);
            print_child(*n.kids[0], p, out);
            out += n.kind == NodeKind::add   ? " + "
                   : n.kind == NodeKind::sub ? " - "
                   : n.kind == NodeKind::mul ? " * "
                                             : " / ";
            print_child(*n.kids[1], p + 1, out);
            return;
        }
        case NodeKind::pow:
            print_child(*n.kids[0], kPrecAtom, out);
            out += '^';
            print_child(*n.kids[1], kPrecUnary, out);
            return;
        default: {
            const FunctionInfo* f = find_function(n.kind);
            out += f->name;
            out += '(';
            for (std::size_t i = 0; i < f->arity; ++i) {
                if (i > 0) out += ", ";
                print_node(*n.kids[i], out);
            }
            out += ')';
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer / parser

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
    Tok kind = Tok::end;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::end: return "end of input";
        case Tok::number:
        case Tok::ident: return "'" + std::string(t.text) + "'";
        default: return "'" + std::string(t.text) + "'";
    }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
        Token tok;
        tok.offset = pos_;
        if (pos_ >= src_.size()) {
            tok.kind = Tok::end;
            return tok;
        }
        const char c = src_[pos_];
        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            return lex_number();
        }
        if (is_ident_start(c)) {
            std::size_t end = pos_ + 1;
            while (end < src_.size() && is_ident_char(src_[end])) ++end;
            tok.kind = Tok::ident;
            tok.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return tok;
        }
        tok.text = src_.substr(pos_, 1);
        switch (c) {
            case '+': tok.kind = Tok::plus; break;
            case '-': tok.kind = Tok::minus; break;
            case '*': tok.kind = Tok::star; break;
            case '/': tok.kind = Tok::slash; break;
            case '^': tok.kind = Tok::caret; break;
            case '(': tok.kind = Tok::lparen; break;
            case ')': tok.kind = Tok::rparen; break;
            case ',': tok.kind = Tok::comma; break;
            default: {
                const auto byte = static_cast<unsigned char>(c);
                std::string shown = (byte >= 0x20 && byte < 0x7f)
                                        ? "'" + std::string(1, c) + "'"
                                        : "byte 0x" + std::to_string(byte);
                throw ParseError(pos_, "expression", "unexpected character " + shown);
            }
        }
        ++pos_;
        return tok;
    }

private:
    Token lex_number() {
        Token tok;
        tok.kind = Tok::number;
        tok.offset = pos_;
        std::size_t end = pos_;
        while (end < src_.size() && is_digit(src_[end])) ++end;
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            while (end < src_.size() && is_digit(src_[end])) ++end;
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t exp_end = end + 1;
            if (exp_end < src_.size() && (src_[exp_end] == '+' || src_[exp_end] == '-')) ++exp_end;
            if (exp_end < src_.size() && is_digit(src_[exp_end])) {
                while (exp_end < src_.size() && is_digit(src_[exp_end])) ++exp_end;
                end = exp_end;
            }
        }
        tok.text = src_.substr(pos_, end - pos_);
        const auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, tok.number);
        if (ec != std::errc{} || ptr != src_.data() + end || !std::isfinite(tok.number)) {
            throw ParseError(pos_, "finite number literal", "'" + std::string(tok.text) + "'");
        }
        pos_ = end;
        return tok;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

constexpr int kMaxDepth = 200;
constexpr std::uint32_t kMaxHeight = 2000;

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { advance(); }

    Expr parse_all() {
        Expr e = parse_sum();
        if (cur_.kind != Tok::end) fail("operator or end of input");
        return e;
    }

private:
    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p_(p) {
            if (++p_.depth_ > kMaxDepth) {
                throw ParseError(p_.cur_.offset, "nesting depth <= " + std::to_string(kMaxDepth),
                                 "deeper nesting");
            }
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    void advance() { cur_ = lexer_.next(); }

    void check_height(const Expr& e) const {
        if (e.height() > kMaxHeight) {
            throw ParseError(cur_.offset, "expression tree height <= " + std::to_string(kMaxHeight),
                             "longer operator chain");
        }
    }

    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError(cur_.offset, expected, describe(cur_));
    }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) fail(what);
        advance();
    }

    Expr parse_sum() {
        Expr lhs = parse_product();
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            const NodeKind op = cur_.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
            advance();
            lhs = Expr::binary(op, std::move(lhs), parse_product());
            check_height(lhs);
        }
        return lhs;
    }

    Expr parse_product() {
        Expr lhs = parse_unary();
        while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
            const NodeKind op = cur_.kind == Tok::star ? NodeKind::mul : NodeKind::div;
            advance();
            lhs = Expr::binary(op, std::move(lhs), parse_unary());
            check_height(lhs);
        }
        return lhs;
    }

    Expr parse_unary() {
        DepthGuard guard(*this);
        if (cur_.kind == Tok::minus) {
            advance();
            return Expr::unary(NodeKind::negate, parse_unary());
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (cur_.kind == Tok::caret) {
            advance();
            return Expr::binary(NodeKind::pow, std::move(base), parse_unary());
        }
        return base;
    }

    Expr parse_primary() {
        switch (cur_.kind) {
            case Tok::number: {
                const double v = cur_.number;
                advance();
                return Expr::number(v);
            }
            case Tok::lparen: {
                advance();
                Expr inner = parse_sum();
                expect(Tok::rparen, "')'");
                return inner;
            }
            case Tok::ident:
                return parse_identifier();
            default:
                fail("number, variable, function call or '('");
        }
    }

    Expr parse_identifier() {
        const Token name = cur_;
        advance();
        if (cur_.kind == Tok::lparen) {
            const FunctionInfo* f = find_function(name.text);
            if (f == nullptr) {
                throw ParseError(name.offset,
                                 "function max, min, abs, exp, log, sqrt, pos or neg",
                                 "'" + std::string(name.text) + "'");
            }
            advance();
            Expr first = parse_sum();
            if (f->arity == 2) {
                expect(Tok::comma, "',' (function takes 2 arguments)");
                Expr second = parse_sum();
                expect(Tok::rparen, "')'");
                return Expr::binary(f->kind, std::move(first), std::move(second));
            }
            expect(Tok::rparen, "')' (function takes 1 argument)");
            return Expr::unary(f->kind, std::move(first));
        }
        static constexpr std::array<Var, 4> kVars{Var::t, Var::x, Var::y, Var::z};
        for (Var v : kVars) {
            if (name.text == var_name(v)) return Expr::variable(v);
        }
        throw ParseError(name.offset, "variable t, x, y or z", "'" + std::string(name.text) + "'");
    }

    Lexer lexer_;
    Token cur_;
    int depth_ = 0;
};

}  // namespace

std::size_t Expr::height() const { return node_->height; }
Expr::Expr() : Expr(number(0.0)) {}

Expr Expr::number(double value) {
    if (!std::isfinite(value)) throw DomainError("expression literals must be finite");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::number;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(Var v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::variable;
    n->var = v;
    n->free_vars = var_bit(v);
    return Expr(std::move(n));
}

Expr Expr::unary(NodeKind kind, Expr operand) {
    if (arity_of(kind) != 1) throw DomainError("not a unary expression kind");
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->free_vars = operand.node_->free_vars;
    n->height = operand.node_->height + 1;
    n->kids[0] = std::move(operand.node_);
    return Expr(std::move(n));
}

Expr Expr::binary(NodeKind kind, Expr lhs, Expr rhs) {
    if (arity_of(kind) != 2) throw DomainError("not a binary expression kind");
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->free_vars = lhs.node_->free_vars | rhs.node_->free_vars;
    n->height = std::max(lhs.node_->height, rhs.node_->height) + 1;
    n->kids[0] = std::move(lhs.node_);
    n->kids[1] = std::move(rhs.node_);
    return Expr(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
Var Expr::var() const { return node_->var; }
std::size_t Expr::arity() const { return arity_of(node_->kind); }
Expr Expr::child(std::size_t i) const { return Expr(node_->kids.at(i)); }
unsigned Expr::free_vars() const { return node_->free_vars; }

double Expr::eval(const Env& env) const { return eval_node(*node_, env); }

std::string Expr::to_string() const {
    std::string out;
    print_node(*node_, out);
    return out;
}

bool operator==(const Expr& a, const Expr& b) { return nodes_equal(*a.node_, *b.node_); }

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

}  // namespace gbsde
