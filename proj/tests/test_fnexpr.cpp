#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "mvconvex/expr.hpp"
#include "mvconvex/interval.hpp"

using namespace mvconvex;

TEST_CASE("parse builds the expected AST shapes") {
    auto e = parse("exp(x)");
    REQUIRE(e->kind == Expr::Kind::call);
    CHECK(e->fn == Builtin::exp);
    CHECK(e->a->kind == Expr::Kind::var);

    auto e2 = parse("abs(x) + 2*x^2");
    REQUIRE(e2->kind == Expr::Kind::add);
    CHECK(e2->a->kind == Expr::Kind::call);
    CHECK(e2->a->fn == Builtin::abs);
    REQUIRE(e2->b->kind == Expr::Kind::mul);
    CHECK(e2->b->a->kind == Expr::Kind::number);
    CHECK(e2->b->a->value == 2.0);
    CHECK(e2->b->b->kind == Expr::Kind::pow);
}

TEST_CASE("parse reports syntax errors with byte offsets") {
    try {
        parse("2 +");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);
        CHECK(!e.expected().empty());
    }
    CHECK_THROWS_AS(parse("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse("min(x)"), ParseError);  // wrong arity
    CHECK_THROWS_AS(parse("(x"), ParseError);
    CHECK_THROWS_AS(parse("x y"), ParseError);
}

TEST_CASE("precedence and associativity") {
    // ^ binds tighter than unary minus: -x^2 == -(x^2)
    RealFunction f = RealFunction::parse_on("-x^2", Interval::whole_line());
    CHECK(f(3.0) == -9.0);
    // ^ right-associative: 2^3^2 = 2^9 = 512
    RealFunction g = RealFunction::parse_on("2^3^2", Interval::whole_line());
    CHECK(g(0.0) == 512.0);
    // ^ tighter than *
    RealFunction h = RealFunction::parse_on("2*x^2", Interval::whole_line());
    CHECK(h(3.0) == 18.0);
}

TEST_CASE("eval basics and partial-function errors") {
    RealFunction f = RealFunction::parse_on("exp(x)", Interval::whole_line());
    CHECK(f(0.0) == 1.0);
    RealFunction s = RealFunction::parse_on("sgn(x)", Interval::whole_line());
    CHECK(s(-2.0) == -1.0);
    CHECK(s(0.0) == 0.0);
    CHECK(s(7.5) == 1.0);
    RealFunction l = RealFunction::parse_on("log(x)", Interval::whole_line());
    CHECK_THROWS_AS(l(-1.0), EvalError);
    RealFunction d = RealFunction::parse_on("1/x", Interval::whole_line());
    CHECK_THROWS_AS(d(0.0), EvalError);
    RealFunction q = RealFunction::parse_on("sqrt(x)", Interval::whole_line());
    CHECK_THROWS_AS(q(-4.0), EvalError);
    RealFunction p = RealFunction::parse_on("x^0.5", Interval::whole_line());
    CHECK_THROWS_AS(p(-4.0), EvalError);
    RealFunction mn = RealFunction::parse_on("min(x, 2)", Interval::whole_line());
    CHECK(mn(5.0) == 2.0);
    CHECK(mn(1.0) == 1.0);
}

TEST_CASE("eval respects the interval domain") {
    RealFunction f = RealFunction::parse_on("x", Interval(0.0, 1.0, true, false));
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.5) == 0.5);
    CHECK_THROWS_AS(f(1.0), EvalError);  // open endpoint
    CHECK_THROWS_AS(f(2.0), EvalError);
}

TEST_CASE("eval_grid matches pointwise eval and preserves order") {
    Interval I(-2.0, 2.0);
    Grid g = make_grid(I);
    RealFunction f = RealFunction::parse_on("x^2 - 3*x + 1", I);
    auto v = eval_grid(f, g);
    REQUIRE(v.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(v[i] == f(g[i]));
}

TEST_CASE("eval is pure: bit-identical repeats") {
    RealFunction f = RealFunction::parse_on("exp(x)*x^3 - sqrt(abs(x))", Interval::whole_line());
    for (double x : {-1.7, 0.0, 0.3, 2.0}) CHECK(f(x) == f(x));
}

TEST_CASE("printer round-trip: parse(print(parse(s))) == parse(s)") {
    std::vector<std::string> sources = {
        "exp(x)",
        "abs(x) + 2*x^2",
        "-x^2",
        "2^3^2",
        "-(x + 1)*(x - 2)",
        "min(x, max(x, 0.5))",
        "sgn(x)/(1 + x^2)",
        "1e-3*x + 2.5E2",
        "sqrt(x^2 + 1) - log(exp(x))",
        "x^(x + 1)",
        "-(-x)",
        "(x + 1)^2",
    };
    for (const auto& s : sources) {
        auto a = parse(s);
        auto b = parse(print_expr(a));
        CHECK_MESSAGE(expr_equal(a, b), "round-trip failed for: ", s,
                      " printed as: ", print_expr(a));
    }
}

TEST_CASE("grids never include endpoints; open sides shrink") {
    Interval I(0.0, 1.0, false, false);
    Grid g = make_grid(I);
    CHECK(g.points.front() > 0.0);
    CHECK(g.points.back() < 1.0);
    RealFunction l = RealFunction::parse_on("log(x)", I);
    auto v = eval_grid(l, g);
    for (double x : v) CHECK(std::isfinite(x));
}

TEST_CASE("unbounded intervals truncate to the window") {
    Grid g = make_grid(Interval::whole_line());
    CHECK(g.points.front() >= -10.0);
    CHECK(g.points.back() <= 10.0);
    GridOptions opt;
    opt.window_lo = -1.0;
    opt.window_hi = 4.0;
    Grid g2 = make_grid(Interval(0.0, kInf), opt);
    CHECK(g2.points.front() > 0.0);
    CHECK(g2.points.back() <= 4.0);
}

TEST_CASE("grid invariants: strictly increasing, at least 3 interior points") {
    Grid g = make_grid(Interval(-2.0, 2.0));
    CHECK(g.size() >= 3);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] < g[i + 1]);
    CHECK_THROWS_AS(Grid({0.5}, Interval(0.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(Grid({0.2, 0.2, 0.4}, Interval(0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("interval invariants") {
    CHECK_THROWS_AS(Interval(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Interval(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Interval(-kInf, 0.0, true, false), std::invalid_argument);
    Interval I(0.0, kInf, true, false);
    CHECK(I.contains(0.0));
    CHECK(!I.interior_contains(0.0));
}
