#pragma once

// A small real-function expression language: recursive-descent parser,
// canonical printer and evaluator. Every other component consumes
// functions only through RealFunction::operator().
//
// Grammar:
//   expr  := term (("+"|"-") term)*
//   term  := unary (("*"|"/") unary)*
//   unary := "-" unary | power
//   power := atom ("^" unary)?
//   atom  := NUMBER | "x" | IDENT "(" expr ("," expr)? ")" | "(" expr ")"
//   IDENT in {exp, log, abs, sgn, sqrt, min, max}
//
// "^" is right-associative and binds tighter than unary minus, so -x^2
// reads as -(x^2).

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "interval.hpp"

namespace mvconvex {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::string expected, const std::string& what)
        : std::runtime_error(what), offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& what, std::string subexpr = {})
        : std::runtime_error(what), subexpr_(std::move(subexpr)) {}
    const std::string& subexpr() const { return subexpr_; }

private:
    std::string subexpr_;
};

enum class Builtin { exp, log, abs, sgn, sqrt, min, max };

inline const char* builtin_name(Builtin b) {
    switch (b) {
        case Builtin::exp: return "exp";
        case Builtin::log: return "log";
        case Builtin::abs: return "abs";
        case Builtin::sgn: return "sgn";
        case Builtin::sqrt: return "sqrt";
        case Builtin::min: return "min";
        case Builtin::max: return "max";
    }
    return "?";
}

inline int builtin_arity(Builtin b) {
    return (b == Builtin::min || b == Builtin::max) ? 2 : 1;
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { number, var, neg, add, sub, mul, div, pow, call };

    Kind kind;
    double value = 0.0;           // number
    Builtin fn = Builtin::exp;    // call
    ExprPtr a, b;                 // operands

    static ExprPtr number(double v) {
        if (!std::isfinite(v))
            throw std::invalid_argument("Expr: numeric literal must be finite");
        auto e = std::make_shared<Expr>();
        e->kind = Kind::number;
        e->value = v;
        return e;
    }
    static ExprPtr var() {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::var;
        return e;
    }
    static ExprPtr unary(Kind k, ExprPtr a) {
        auto e = std::make_shared<Expr>();
        e->kind = k;
        e->a = std::move(a);
        return e;
    }
    static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b) {
        auto e = std::make_shared<Expr>();
        e->kind = k;
        e->a = std::move(a);
        e->b = std::move(b);
        return e;
    }
    static ExprPtr call(Builtin fn, ExprPtr a, ExprPtr b = nullptr) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::call;
        e->fn = fn;
        e->a = std::move(a);
        e->b = std::move(b);
        return e;
    }
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::number: return a->value == b->value;
        case Expr::Kind::var: return true;
        case Expr::Kind::call:
            if (a->fn != b->fn) return false;
            [[fallthrough]];
        default:
            return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
    }
}

// ---------------------------------------------------------------------------
// Canonical printer. print(parse(s)) re-parses to the same AST.

namespace detail {

// Precedence levels: add 1, mul 2, unary-minus 3, pow 4, atom 5.
inline int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::add:
        case Expr::Kind::sub: return 1;
        case Expr::Kind::mul:
        case Expr::Kind::div: return 2;
        case Expr::Kind::neg: return 3;
        case Expr::Kind::pow: return 4;
        default: return 5;
    }
}

inline void print_rec(const Expr& e, std::string& out);

inline void print_child(const Expr& child, int min_prec, std::string& out) {
    if (precedence(child) < min_prec) {
        out += '(';
        print_rec(child, out);
        out += ')';
    } else {
        print_rec(child, out);
    }
}

inline void print_rec(const Expr& e, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::number: {
            char buf[64];
            // shortest round-trip representation
            auto res = std::to_chars(buf, buf + sizeof(buf), e.value);
            out.append(buf, res.ptr);
            break;
        }
        case Expr::Kind::var:
            out += 'x';
            break;
        case Expr::Kind::neg:
            out += '-';
            print_child(*e.a, 3, out);
            break;
        case Expr::Kind::add:
            print_child(*e.a, 1, out);
            out += " + ";
            print_child(*e.b, 2, out);
            break;
        case Expr::Kind::sub:
            print_child(*e.a, 1, out);
            out += " - ";
            print_child(*e.b, 2, out);
            break;
        case Expr::Kind::mul:
            print_child(*e.a, 2, out);
            out += "*";
            print_child(*e.b, 3, out);
            break;
        case Expr::Kind::div:
            print_child(*e.a, 2, out);
            out += "/";
            print_child(*e.b, 3, out);
            break;
        case Expr::Kind::pow:
            // grammar requires an atom on the left of '^'
            print_child(*e.a, 5, out);
            out += "^";
            print_child(*e.b, 3, out);
            break;
        case Expr::Kind::call:
            out += builtin_name(e.fn);
            out += '(';
            print_rec(*e.a, out);
            if (e.b) {
                out += ", ";
                print_rec(*e.b, out);
            }
            out += ')';
            break;
    }
}

}  // namespace detail

inline std::string print_expr(const ExprPtr& e) {
    std::string out;
    detail::print_rec(*e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parser.

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(pos_, "end of input", err("unexpected trailing input"));
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    std::string err(const std::string& msg) const {
        return "syntax error at offset " + std::to_string(pos_) + ": " + msg;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr left = parse_term();
        for (;;) {
            if (eat('+'))
                left = Expr::binary(Expr::Kind::add, left, parse_term());
            else if (eat('-'))
                left = Expr::binary(Expr::Kind::sub, left, parse_term());
            else
                return left;
        }
    }

    ExprPtr parse_term() {
        ExprPtr left = parse_unary();
        for (;;) {
            if (eat('*'))
                left = Expr::binary(Expr::Kind::mul, left, parse_unary());
            else if (eat('/'))
                left = Expr::binary(Expr::Kind::div, left, parse_unary());
            else
                return left;
        }
    }

    ExprPtr parse_unary() {
        if (eat('-')) return Expr::unary(Expr::Kind::neg, parse_unary());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (eat('^')) return Expr::binary(Expr::Kind::pow, base, parse_unary());
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError(pos_, "number, 'x', function call or '('",
                             err("unexpected end of input"));
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!eat(')')) throw ParseError(pos_, ")", err("expected ')'"));
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(pos_, "number, 'x', function call or '('",
                         err(std::string("unexpected character '") + c + "'"));
    }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belonged to something else
            }
        }
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw ParseError(start, "number", "syntax error at offset " +
                                                  std::to_string(start) + ": bad numeric literal");
        return Expr::number(v);
    }

    ExprPtr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") return Expr::var();
        Builtin fn;
        if (name == "exp") fn = Builtin::exp;
        else if (name == "log") fn = Builtin::log;
        else if (name == "abs") fn = Builtin::abs;
        else if (name == "sgn") fn = Builtin::sgn;
        else if (name == "sqrt") fn = Builtin::sqrt;
        else if (name == "min") fn = Builtin::min;
        else if (name == "max") fn = Builtin::max;
        else
            throw ParseError(start, "exp, log, abs, sgn, sqrt, min, max or x",
                             "syntax error at offset " + std::to_string(start) +
                                 ": unknown identifier '" + std::string(name) + "'");
        if (!eat('(')) throw ParseError(pos_, "(", err("expected '(' after function name"));
        ExprPtr a = parse_expr();
        ExprPtr b;
        if (eat(',')) b = parse_expr();
        if (!eat(')')) throw ParseError(pos_, ")", err("expected ')'"));
        int got = b ? 2 : 1;
        if (got != builtin_arity(fn))
            throw ParseError(start, "correct arity",
                             "syntax error at offset " + std::to_string(start) + ": " +
                                 builtin_name(fn) + " takes " +
                                 std::to_string(builtin_arity(fn)) + " argument(s)");
        return Expr::call(fn, a, b);
    }
};

}  // namespace detail

inline ExprPtr parse(std::string_view source) { return detail::Parser(source).parse(); }

// ---------------------------------------------------------------------------
// Evaluation.

namespace detail {

inline double eval_rec(const Expr& e, double x) {
    switch (e.kind) {
        case Expr::Kind::number: return e.value;
        case Expr::Kind::var: return x;
        case Expr::Kind::neg: return -eval_rec(*e.a, x);
        case Expr::Kind::add: return eval_rec(*e.a, x) + eval_rec(*e.b, x);
        case Expr::Kind::sub: return eval_rec(*e.a, x) - eval_rec(*e.b, x);
        case Expr::Kind::mul: return eval_rec(*e.a, x) * eval_rec(*e.b, x);
        case Expr::Kind::div: {
            double num = eval_rec(*e.a, x);
            double den = eval_rec(*e.b, x);
            if (den == 0.0)
                throw EvalError("division by zero in " + print_expr(std::make_shared<Expr>(e)),
                                print_expr(e.b ? e.b : nullptr));
            return num / den;
        }
        case Expr::Kind::pow: {
            double base = eval_rec(*e.a, x);
            double ex = eval_rec(*e.b, x);
            bool integral = std::isfinite(ex) && ex == std::nearbyint(ex);
            if (base < 0.0 && !integral)
                throw EvalError("negative base with non-integer exponent",
                                print_expr(std::make_shared<Expr>(e)));
            if (base == 0.0 && ex < 0.0)
                throw EvalError("zero base with negative exponent",
                                print_expr(std::make_shared<Expr>(e)));
            return std::pow(base, ex);
        }
        case Expr::Kind::call: {
            double a = eval_rec(*e.a, x);
            switch (e.fn) {
                case Builtin::exp: return std::exp(a);
                case Builtin::log:
                    if (a <= 0.0)
                        throw EvalError("log of non-positive value",
                                        print_expr(std::make_shared<Expr>(e)));
                    return std::log(a);
                case Builtin::abs: return std::abs(a);
                case Builtin::sgn: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
                case Builtin::sqrt:
                    if (a < 0.0)
                        throw EvalError("sqrt of negative value",
                                        print_expr(std::make_shared<Expr>(e)));
                    return std::sqrt(a);
                case Builtin::min: return std::min(a, eval_rec(*e.b, x));
                case Builtin::max: return std::max(a, eval_rec(*e.b, x));
            }
        }
    }
    throw EvalError("malformed expression node");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RealFunction: an immutable function value (parsed expression or a
// constructed evaluator) together with its domain. Evaluation at interior
// points either yields a finite real or throws EvalError.

class RealFunction {
public:
    RealFunction() = default;

    RealFunction(ExprPtr body, Interval domain)
        : body_(std::move(body)), domain_(domain), label_(print_expr(body_)) {}

    static RealFunction parse_on(std::string_view source, Interval domain) {
        return RealFunction(parse(source), domain);
    }

    static RealFunction from_callable(std::string label, Interval domain,
                                      std::function<double(double)> fn,
                                      std::function<double(double)> derivative_hint = {}) {
        RealFunction f;
        f.domain_ = domain;
        f.label_ = std::move(label);
        f.callable_ = std::move(fn);
        f.derivative_hint_ = std::move(derivative_hint);
        return f;
    }

    bool valid() const { return body_ != nullptr || callable_ != nullptr; }
    const Interval& domain() const { return domain_; }
    const std::string& label() const { return label_; }
    const ExprPtr& ast() const { return body_; }

    // Exact derivative, when known by construction (e.g. the integrand of a
    // constructed antiderivative).
    const std::function<double(double)>& derivative_hint() const { return derivative_hint_; }

    double operator()(double x) const {
        if (!domain_.contains(x))
            throw EvalError("point " + std::to_string(x) + " outside domain " + domain_.str() +
                            " of " + label_);
        double v = body_ ? detail::eval_rec(*body_, x) : callable_(x);
        if (!std::isfinite(v))
            throw EvalError("non-finite value at " + std::to_string(x) + " in " + label_);
        return v;
    }

private:
    ExprPtr body_;
    Interval domain_ = Interval::whole_line();
    std::string label_;
    std::function<double(double)> callable_;
    std::function<double(double)> derivative_hint_;
};

inline double eval(const RealFunction& f, double x) { return f(x); }

inline std::vector<double> eval_grid(const RealFunction& f, const Grid& g) {
    std::vector<double> out;
    out.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        try {
            out.push_back(f(g[i]));
        } catch (const EvalError& e) {
            throw EvalError(std::string(e.what()) + " (grid index " + std::to_string(i) + ")",
                            e.subexpr());
        }
    }
    return out;
}

}  // namespace mvconvex
