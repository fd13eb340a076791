#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "gbsde/errors.hpp"
#include "gbsde/expr.hpp"

using namespace gbsde;

namespace {

double at(const std::string& src, double x = 0.0, double y = 0.0, double z = 0.0, double t = 0.0) {
    return parse(src).eval(Env::txyz(t, x, y, z));
}

}  // namespace

TEST(Parse, TreeShapes) {
    const Expr sq = parse("x^2");
    ASSERT_EQ(sq.kind(), NodeKind::pow);
    EXPECT_EQ(sq.child(0).kind(), NodeKind::variable);
    EXPECT_EQ(sq.child(0).var(), Var::x);
    EXPECT_EQ(sq.child(1).value(), 2.0);

    const Expr m = parse("max(x-1, 0)");
    ASSERT_EQ(m.kind(), NodeKind::max);
    EXPECT_EQ(m.child(0).kind(), NodeKind::sub);
    EXPECT_EQ(m.child(1).kind(), NodeKind::number);
    EXPECT_EQ(m, Expr::binary(NodeKind::max,
                              Expr::binary(NodeKind::sub, Expr::variable(Var::x), Expr::number(1.0)),
                              Expr::number(0.0)));
}

TEST(Parse, PrecedenceAndAssociativity) {
    EXPECT_DOUBLE_EQ(at("1+2*3"), 7.0);
    EXPECT_DOUBLE_EQ(at("(1+2)*3"), 9.0);
    EXPECT_DOUBLE_EQ(at("2^3^2"), 512.0);
    EXPECT_DOUBLE_EQ(at("-2^2"), -4.0);
    EXPECT_DOUBLE_EQ(at("2^-1"), 0.5);
    EXPECT_DOUBLE_EQ(at("8/4/2"), 1.0);
    EXPECT_DOUBLE_EQ(at("5-3-1"), 1.0);
    EXPECT_DOUBLE_EQ(at("1.5e1 + .5"), 15.5);
}

TEST(Eval, Examples) {
    EXPECT_EQ(at("x^2", 3.0), 9.0);
    EXPECT_EQ(at("pos(z)", 0.0, 0.0, -2.0), 0.0);
    EXPECT_EQ(at("neg(z)", 0.0, 0.0, -2.0), 2.0);
    EXPECT_EQ(at("0.25*z^2", 0.0, 0.0, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(at("exp(log(3))"), 3.0);
    EXPECT_EQ(at("abs(-4) + sqrt(9) + min(x, y)", 1.0, -1.0), 6.0);
    EXPECT_EQ(at("(-2)^3"), -8.0);
}

TEST(Eval, ErrorsAreSeparateFromParsing) {
    const Expr e = parse("1/(x-x)");
    EXPECT_THROW(e.eval(Env::tx(0.0, 1.0)), EvalError);
    EXPECT_THROW(e.eval(Env::tx(0.0, -3.0)), EvalError);
    EXPECT_THROW(at("log(x)", 0.0), EvalError);
    EXPECT_THROW(at("sqrt(x)", -1.0), EvalError);
    EXPECT_THROW(at("(-2)^0.5"), EvalError);
    EXPECT_THROW(at("exp(x)", 1000.0), EvalError);
    EXPECT_THROW(parse("y").eval(Env::tx(0.0, 0.0)), EvalError);
}

TEST(Parse, ErrorsCarryOffsets) {
    try {
        parse("x + * 2");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("max(1)"), ParseError);
    EXPECT_THROW(parse("exp(1, 2)"), ParseError);
    EXPECT_THROW(parse("foo(1)"), ParseError);
    EXPECT_THROW(parse("w + 1"), ParseError);
    EXPECT_THROW(parse("(x"), ParseError);
    EXPECT_THROW(parse("x)"), ParseError);
    EXPECT_THROW(parse("1e999"), ParseError);
}

TEST(Parse, DepthLimits) {
    EXPECT_THROW(parse(std::string(500, '(') + "x" + std::string(500, ')')), ParseError);
    std::string chain = "x";
    for (int i = 0; i < 5000; ++i) chain += "+x";
    EXPECT_THROW(parse(chain), ParseError);
    EXPECT_NO_THROW(parse(std::string(100, '(') + "x" + std::string(100, ')')));
}

TEST(Expr, FreeVarsAndConstants) {
    EXPECT_EQ(parse("t*x + y").free_vars(), var_bit(Var::t) | var_bit(Var::x) | var_bit(Var::y));
    EXPECT_TRUE(parse("2*3").is_constant());
    EXPECT_TRUE(Expr().is_constant());
    EXPECT_EQ(Expr().eval(Env{}), 0.0);
}

TEST(Expr, PrintParseRoundTrip) {
    const char* sources[] = {"x^2",         "-(x^2)",         "max(1-x, 0)", "0.3*z^2",        "2^3^2",
                             "(2^3)^2",     "a",              "1-(2-3)",     "1/(2/3)",        "-x^-2",
                             "0.1+1e-300",  "exp(-t)*pos(x)", "(-2)^2",      "min(x,y)*(z+t)", "--x"};
    for (const char* src : sources) {
        Expr e;
        try {
            e = parse(src);
        } catch (const ParseError&) {
            continue;
        }
        const std::string printed = e.to_string();
        EXPECT_EQ(parse(printed), e) << src << " -> " << printed;
        EXPECT_EQ(parse(printed).to_string(), printed);
    }
}

TEST(Expr, RandomTreesRoundTrip) {
    std::mt19937_64 gen(3);
    const NodeKind binaries[] = {NodeKind::add, NodeKind::sub, NodeKind::mul, NodeKind::div,
                                 NodeKind::pow, NodeKind::max, NodeKind::min};
    const NodeKind unaries[] = {NodeKind::negate, NodeKind::abs, NodeKind::exp, NodeKind::log,
                                NodeKind::sqrt,   NodeKind::pos, NodeKind::neg};
    std::function<Expr(int)> build = [&](int depth) -> Expr {
        const auto pick = gen() % 10;
        if (depth == 0 || pick < 3) {
            if (gen() % 2) return Expr::variable(static_cast<Var>(gen() % 4));
            return Expr::number(static_cast<double>(gen() % 1000) / 37.0);
        }
        if (pick < 5) return Expr::unary(unaries[gen() % 7], build(depth - 1));
        return Expr::binary(binaries[gen() % 7], build(depth - 1), build(depth - 1));
    };
    for (int k = 0; k < 2000; ++k) {
        const Expr e = build(6);
        EXPECT_EQ(parse(e.to_string()), e) << e.to_string();
    }
}

TEST(Parse, RandomBytesNeverCrash) {
    std::mt19937_64 gen(11);
    const std::string alphabet = "0123456789.eE+-*/^()txyz ,maxinbsqrtlogpe\t";
    for (int k = 0; k < 20000; ++k) {
        std::string s(gen() % 40, ' ');
        for (auto& c : s) c = (k % 2) ? static_cast<char>(gen() % 256) : alphabet[gen() % alphabet.size()];
        try {
            const Expr e = parse(s);
            try {
                e.eval(Env::txyz(0.3, -1.2, 0.5, 2.0));
            } catch (const EvalError&) {
            }
        } catch (const ParseError&) {
        }
    }
}
