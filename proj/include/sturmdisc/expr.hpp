#pragma once

// Expression trees for potentials: parsing, evaluation, printing and exact
// differentiation.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' unsigned-int)?
//   base   := number | number 'i' | 'x' | func '(' expr ')' | '(' expr ')' | '-' base
//   func   := sin | cos | exp | sinh | cosh

#include <sturmdisc/error.hpp>

#include <algorithm>
#include <charconv>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sturmdisc {

using cplx = std::complex<double>;

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sinh, Cosh };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    cplx value{};
    unsigned power = 0;
    Expr a, b;
};

namespace expr {

inline Expr make(Op op, Expr a = nullptr, Expr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline Expr constant(cplx c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = c;
    return n;
}

inline Expr variable() { return make(Op::Var); }

inline Expr power(Expr a, unsigned k) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->power = k;
    n->a = std::move(a);
    return n;
}

inline bool is_function(Op op) {
    return op == Op::Sin || op == Op::Cos || op == Op::Exp || op == Op::Sinh || op == Op::Cosh;
}

inline const char* function_name(Op op) {
    switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    default: return "";
    }
}

inline cplx ipow(cplx z, unsigned k) {
    cplx r{1.0, 0.0};
    while (k) {
        if (k & 1u) r *= z;
        z *= z;
        k >>= 1u;
    }
    return r;
}

inline cplx eval(const Node& n, cplx x) {
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x;
    case Op::Neg: return -eval(*n.a, x);
    case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::Pow: return ipow(eval(*n.a, x), n.power);
    case Op::Sin: return std::sin(eval(*n.a, x));
    case Op::Cos: return std::cos(eval(*n.a, x));
    case Op::Exp: return std::exp(eval(*n.a, x));
    case Op::Sinh: return std::sinh(eval(*n.a, x));
    case Op::Cosh: return std::cosh(eval(*n.a, x));
    }
    return {};
}

inline cplx eval(const Expr& e, double x) { return eval(*e, cplx{x, 0.0}); }

inline bool equal(const Expr& p, const Expr& q) {
    if (p == q) return true;
    if (!p || !q || p->op != q->op) return false;
    switch (p->op) {
    case Op::Const: return p->value == q->value;
    case Op::Var: return true;
    case Op::Pow: return p->power == q->power && equal(p->a, q->a);
    default: return equal(p->a, q->a) && equal(p->b, q->b);
    }
}

inline bool depends_on_x(const Expr& e) {
    if (!e) return false;
    if (e->op == Op::Var) return true;
    return depends_on_x(e->a) || depends_on_x(e->b);
}

// ---------------------------------------------------------------- printing

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_constant(cplx c) {
    double re = c.real() == 0.0 ? 0.0 : c.real();
    double im = c.imag() == 0.0 ? 0.0 : c.imag();
    if (im == 0.0) {
        if (re >= 0.0) return format_double(re);
        return "(-" + format_double(-re) + ")";
    }
    if (re == 0.0) {
        if (im >= 0.0) return format_double(im) + "i";
        return "(-" + format_double(-im) + "i)";
    }
    std::string s = "(";
    s += re >= 0.0 ? format_double(re) : "-" + format_double(-re);
    s += im >= 0.0 ? " + " : " - ";
    s += format_double(std::abs(im)) + "i)";
    return s;
}

inline std::string to_string(const Expr& e);

inline std::string to_string_base(const Expr& e) {
    if (e->op == Op::Var || is_function(e->op)) return to_string(e);
    if (e->op == Op::Const) return format_constant(e->value);
    return "(" + to_string(e) + ")";
}

inline std::string to_string(const Expr& e) {
    switch (e->op) {
    case Op::Const: return format_constant(e->value);
    case Op::Var: return "x";
    case Op::Neg: return "-" + to_string_base(e->a);
    case Op::Add: return "(" + to_string(e->a) + " + " + to_string(e->b) + ")";
    case Op::Sub: return "(" + to_string(e->a) + " - " + to_string(e->b) + ")";
    case Op::Mul: return "(" + to_string(e->a) + "*" + to_string(e->b) + ")";
    case Op::Div: return "(" + to_string(e->a) + "/" + to_string(e->b) + ")";
    case Op::Pow: return to_string_base(e->a) + "^" + std::to_string(e->power);
    default: return std::string(function_name(e->op)) + "(" + to_string(e->a) + ")";
    }
}

// ---------------------------------------------------------------- parsing

class Parser {
public:
    explicit Parser(std::string_view src) : s_(src) {}

    Expr parse() {
        skip();
        if (pos_ == s_.size()) throw ParseError(pos_, "empty input", {"expression"});
        Expr e = parse_expr();
        skip();
        if (pos_ != s_.size())
            throw ParseError(pos_, std::string("unexpected '") + s_[pos_] + "'",
                             {"operator", "end of input"});
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
            ++pos_;
    }

    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    void expect(char c) {
        skip();
        if (pos_ >= s_.size())
            throw ParseError(pos_, "unexpected end of input", {std::string("'") + c + "'"});
        if (s_[pos_] != c)
            throw ParseError(pos_, std::string("unexpected '") + s_[pos_] + "'", {std::string("'") + c + "'"});
        ++pos_;
    }

    Expr parse_expr() {
        Expr t = parse_term();
        while (true) {
            if (peek('+')) {
                ++pos_;
                t = make(Op::Add, t, parse_term());
            } else if (peek('-')) {
                ++pos_;
                t = make(Op::Sub, t, parse_term());
            } else {
                return t;
            }
        }
    }

    Expr parse_term() {
        Expr f = parse_factor();
        while (true) {
            if (peek('*')) {
                ++pos_;
                f = make(Op::Mul, f, parse_factor());
            } else if (peek('/')) {
                ++pos_;
                f = make(Op::Div, f, parse_factor());
            } else {
                return f;
            }
        }
    }

    Expr parse_factor() {
        Expr b = parse_base();
        if (peek('^')) {
            ++pos_;
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
            if (start == pos_) throw ParseError(pos_, "missing exponent", {"unsigned integer"});
            unsigned k = 0;
            auto res = std::from_chars(s_.data() + start, s_.data() + pos_, k);
            if (res.ec != std::errc() || k > 4096) throw ParseError(start, "exponent out of range");
            b = power(b, k);
        }
        return b;
    }

    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    Expr parse_base() {
        skip();
        if (pos_ >= s_.size())
            throw ParseError(pos_, "unexpected end of input", {"number", "x", "function", "'('", "'-'"});
        char c = s_[pos_];
        if (is_digit(c) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (c == '-') {
            ++pos_;
            return make(Op::Neg, parse_base());
        }
        if (is_alpha(c)) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (is_alpha(s_[pos_]) || is_digit(s_[pos_]))) ++pos_;
            std::string_view name = s_.substr(start, pos_ - start);
            if (name == "x") return variable();
            Op op;
            if (name == "sin") op = Op::Sin;
            else if (name == "cos") op = Op::Cos;
            else if (name == "exp") op = Op::Exp;
            else if (name == "sinh") op = Op::Sinh;
            else if (name == "cosh") op = Op::Cosh;
            else throw ParseError(start, "unknown identifier '" + std::string(name) + "'",
                                  {"x", "sin", "cos", "exp", "sinh", "cosh"});
            expect('(');
            Expr arg = parse_expr();
            expect(')');
            return make(op, arg);
        }
        throw ParseError(pos_, std::string("unexpected '") + c + "'", {"number", "x", "function", "'('", "'-'"});
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && is_digit(s_[pos_])) {
                while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string_view text = s_.substr(start, pos_ - start);
        if (text == ".") throw ParseError(start, "malformed number", {"digit"});
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec == std::errc::result_out_of_range) throw ParseError(start, "number out of range");
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw ParseError(start, "malformed number", {"digit"});
        if (pos_ < s_.size() && s_[pos_] == 'i') {
            ++pos_;
            return constant(cplx{0.0, v});
        }
        return constant(cplx{v, 0.0});
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline Expr parse(std::string_view src) { return Parser(src).parse(); }

// ---------------------------------------------------------------- differentiation
//
// Builders below fold constants and drop neutral elements so that repeated
// differentiation stays small. They never reorder or distribute.

inline bool is_const(const Expr& e, cplx c) { return e->op == Op::Const && e->value == c; }
inline bool is_const(const Expr& e) { return e->op == Op::Const; }

inline Expr neg(const Expr& a) {
    if (is_const(a)) return constant(-a->value);
    if (a->op == Op::Neg) return a->a;
    return make(Op::Neg, a);
}

inline Expr add(const Expr& a, const Expr& b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (is_const(a) && is_const(b)) return constant(a->value + b->value);
    return make(Op::Add, a, b);
}

inline Expr sub(const Expr& a, const Expr& b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(b);
    if (is_const(a) && is_const(b)) return constant(a->value - b->value);
    return make(Op::Sub, a, b);
}

inline Expr mul(const Expr& a, const Expr& b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_const(a) && is_const(b)) return constant(a->value * b->value);
    return make(Op::Mul, a, b);
}

inline Expr div(const Expr& a, const Expr& b) {
    if (is_const(a, 0.0)) return constant(0.0);
    if (is_const(b, 1.0)) return a;
    if (is_const(a) && is_const(b)) return constant(a->value / b->value);
    return make(Op::Div, a, b);
}

inline Expr pow(const Expr& a, unsigned k) {
    if (k == 0) return constant(1.0);
    if (k == 1) return a;
    if (is_const(a)) return constant(ipow(a->value, k));
    return power(a, k);
}

inline Expr derivative(const Expr& e) {
    switch (e->op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(1.0);
    case Op::Neg: return neg(derivative(e->a));
    case Op::Add: return add(derivative(e->a), derivative(e->b));
    case Op::Sub: return sub(derivative(e->a), derivative(e->b));
    case Op::Mul: return add(mul(derivative(e->a), e->b), mul(e->a, derivative(e->b)));
    case Op::Div:
        return div(sub(mul(derivative(e->a), e->b), mul(e->a, derivative(e->b))), pow(e->b, 2));
    case Op::Pow:
        return mul(mul(constant(double(e->power)), pow(e->a, e->power - 1)), derivative(e->a));
    case Op::Sin: return mul(make(Op::Cos, e->a), derivative(e->a));
    case Op::Cos: return neg(mul(make(Op::Sin, e->a), derivative(e->a)));
    case Op::Exp: return mul(e, derivative(e->a));
    case Op::Sinh: return mul(make(Op::Cosh, e->a), derivative(e->a));
    case Op::Cosh: return mul(make(Op::Sinh, e->a), derivative(e->a));
    }
    return constant(0.0);
}

inline Expr differentiate(const Expr& e, unsigned order) {
    Expr r = e;
    for (unsigned k = 0; k < order; ++k) r = derivative(r);
    return r;
}

// ---------------------------------------------------------------- polynomials

using Poly = std::vector<cplx>;

inline Poly poly_mul(const Poly& p, const Poly& q) {
    if (p.empty() || q.empty()) return {};
    Poly r(p.size() + q.size() - 1, cplx{});
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

inline Poly poly_add(const Poly& p, const Poly& q, double sign = 1.0) {
    Poly r(std::max(p.size(), q.size()), cplx{});
    for (std::size_t i = 0; i < p.size(); ++i) r[i] += p[i];
    for (std::size_t i = 0; i < q.size(); ++i) r[i] += sign * q[i];
    return r;
}

// Monomial coefficients when e is a polynomial in x, nullopt otherwise.
inline std::optional<Poly> as_polynomial(const Expr& e) {
    if (!depends_on_x(e)) return Poly{eval(e, 0.0)};
    switch (e->op) {
    case Op::Var: return Poly{0.0, 1.0};
    case Op::Neg: {
        auto p = as_polynomial(e->a);
        if (!p) return std::nullopt;
        for (auto& c : *p) c = -c;
        return p;
    }
    case Op::Add:
    case Op::Sub: {
        auto p = as_polynomial(e->a), q = as_polynomial(e->b);
        if (!p || !q) return std::nullopt;
        return poly_add(*p, *q, e->op == Op::Add ? 1.0 : -1.0);
    }
    case Op::Mul: {
        auto p = as_polynomial(e->a), q = as_polynomial(e->b);
        if (!p || !q) return std::nullopt;
        return poly_mul(*p, *q);
    }
    case Op::Div: {
        if (depends_on_x(e->b)) return std::nullopt;
        auto p = as_polynomial(e->a);
        if (!p) return std::nullopt;
        cplx den = eval(e->b, 0.0);
        for (auto& c : *p) c /= den;
        return p;
    }
    case Op::Pow: {
        auto p = as_polynomial(e->a);
        if (!p) return std::nullopt;
        Poly r{1.0};
        for (unsigned k = 0; k < e->power; ++k) r = poly_mul(r, *p);
        return r;
    }
    default: return std::nullopt;
    }
}

} // namespace expr
} // namespace sturmdisc
