#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/interval.hpp"
#include "foliage/linalg.hpp"

namespace foliage {

// ===================================================================
// Analytic scalar expressions in transverse coordinates y1..yq.
//
// The tree is closed under evaluation, differentiation, substitution
// and interval enclosure, which is everything the rest of the library
// needs: operator coefficients, map components and test functions are
// all Expressions.
// ===================================================================

enum class ExprKind { Const, Coord, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    double value = 0.0;  // Const
    int index = 0;       // Coord: 0-based coordinate; Pow: integer exponent
    ExprPtr a, b;
};

class Expression {
public:
    Expression() : node_(constant_node(0.0)) {}
    explicit Expression(ExprPtr n) : node_(std::move(n)) {}

    const ExprNode& node() const { return *node_; }
    const ExprPtr& ptr() const { return node_; }

    static ExprPtr constant_node(double v) {
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprKind::Const;
        n->value = v;
        return n;
    }

private:
    ExprPtr node_;
};

namespace detail {

inline ExprPtr make_node(ExprKind k, ExprPtr a = nullptr, ExprPtr b = nullptr, double v = 0.0,
                         int idx = 0) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = v;
    n->index = idx;
    return n;
}

}  // namespace detail

inline Expression lit(double v) { return Expression(Expression::constant_node(v)); }

/// Coordinate symbol y_{k+1} (0-based index k).
inline Expression coord(int k) {
    return Expression(detail::make_node(ExprKind::Coord, nullptr, nullptr, 0.0, k));
}

inline Expression operator+(const Expression& a, const Expression& b) {
    return Expression(detail::make_node(ExprKind::Add, a.ptr(), b.ptr()));
}
inline Expression operator-(const Expression& a, const Expression& b) {
    return Expression(detail::make_node(ExprKind::Sub, a.ptr(), b.ptr()));
}
inline Expression operator*(const Expression& a, const Expression& b) {
    return Expression(detail::make_node(ExprKind::Mul, a.ptr(), b.ptr()));
}
inline Expression operator/(const Expression& a, const Expression& b) {
    return Expression(detail::make_node(ExprKind::Div, a.ptr(), b.ptr()));
}
inline Expression operator+(const Expression& a, double c) { return a + lit(c); }
inline Expression operator+(double c, const Expression& a) { return lit(c) + a; }
inline Expression operator-(const Expression& a, double c) { return a - lit(c); }
inline Expression operator-(double c, const Expression& a) { return lit(c) - a; }
inline Expression operator*(const Expression& a, double c) { return a * lit(c); }
inline Expression operator*(double c, const Expression& a) { return lit(c) * a; }
inline Expression operator/(const Expression& a, double c) { return a / lit(c); }
inline Expression operator/(double c, const Expression& a) { return lit(c) / a; }
inline Expression operator-(const Expression& a) { return lit(0.0) - a; }

inline Expression pow(const Expression& a, int n) {
    return Expression(detail::make_node(ExprKind::Pow, a.ptr(), nullptr, 0.0, n));
}
inline Expression sin(const Expression& a) {
    return Expression(detail::make_node(ExprKind::Sin, a.ptr()));
}
inline Expression cos(const Expression& a) {
    return Expression(detail::make_node(ExprKind::Cos, a.ptr()));
}
inline Expression exp(const Expression& a) {
    return Expression(detail::make_node(ExprKind::Exp, a.ptr()));
}
inline Expression sqrt(const Expression& a) {
    return Expression(detail::make_node(ExprKind::Sqrt, a.ptr()));
}

// --- evaluation ----------------------------------------------------

namespace detail {

inline double eval_node(const ExprNode& n, const double* y, int q) {
    switch (n.kind) {
        case ExprKind::Const:
            return n.value;
        case ExprKind::Coord:
            if (n.index >= q)
                throw UnboundCoordinate("expression uses y" + std::to_string(n.index + 1) +
                                        " but the point has dimension " + std::to_string(q));
            return y[n.index];
        case ExprKind::Add:
            return eval_node(*n.a, y, q) + eval_node(*n.b, y, q);
        case ExprKind::Sub:
            return eval_node(*n.a, y, q) - eval_node(*n.b, y, q);
        case ExprKind::Mul:
            return eval_node(*n.a, y, q) * eval_node(*n.b, y, q);
        case ExprKind::Div: {
            const double den = eval_node(*n.b, y, q);
            if (den == 0.0) throw DivisionByZero();
            return eval_node(*n.a, y, q) / den;
        }
        case ExprKind::Pow: {
            const double base = eval_node(*n.a, y, q);
            if (n.index < 0 && base == 0.0) throw DivisionByZero("zero raised to a negative power");
            return std::pow(base, n.index);
        }
        case ExprKind::Sin:
            return std::sin(eval_node(*n.a, y, q));
        case ExprKind::Cos:
            return std::cos(eval_node(*n.a, y, q));
        case ExprKind::Exp:
            return std::exp(eval_node(*n.a, y, q));
        case ExprKind::Sqrt: {
            const double v = eval_node(*n.a, y, q);
            if (v < 0.0) throw DomainError("sqrt of a negative value");
            return std::sqrt(v);
        }
    }
    throw Error("unreachable expression kind");
}

}  // namespace detail

inline double eval(const Expression& e, const std::vector<double>& y) {
    return detail::eval_node(e.node(), y.data(), static_cast<int>(y.size()));
}

inline double eval(const Expression& e, const Vector& y) {
    return detail::eval_node(e.node(), y.data(), static_cast<int>(y.size()));
}

// --- interval enclosure --------------------------------------------

namespace detail {

inline Interval eval_interval_node(const ExprNode& n, const Box& box) {
    switch (n.kind) {
        case ExprKind::Const:
            return Interval::point(n.value);
        case ExprKind::Coord:
            if (n.index >= box.dim())
                throw UnboundCoordinate("expression uses y" + std::to_string(n.index + 1) +
                                        " outside a box of dimension " + std::to_string(box.dim()));
            return box.iv[static_cast<size_t>(n.index)];
        case ExprKind::Add:
            return eval_interval_node(*n.a, box) + eval_interval_node(*n.b, box);
        case ExprKind::Sub:
            return eval_interval_node(*n.a, box) - eval_interval_node(*n.b, box);
        case ExprKind::Mul:
            return eval_interval_node(*n.a, box) * eval_interval_node(*n.b, box);
        case ExprKind::Div:
            return eval_interval_node(*n.a, box) / eval_interval_node(*n.b, box);
        case ExprKind::Pow:
            return pow_int(eval_interval_node(*n.a, box), n.index);
        case ExprKind::Sin:
            return sin(eval_interval_node(*n.a, box));
        case ExprKind::Cos:
            return cos(eval_interval_node(*n.a, box));
        case ExprKind::Exp:
            return exp(eval_interval_node(*n.a, box));
        case ExprKind::Sqrt:
            return sqrt(eval_interval_node(*n.a, box));
    }
    throw Error("unreachable expression kind");
}

}  // namespace detail

/// Outer enclosure of e over the box. Throws IntervalUndefined when the
/// expression is not defined on the whole box.
inline Interval eval_interval(const Expression& e, const Box& box) {
    return detail::eval_interval_node(e.node(), box);
}

// --- structure helpers ---------------------------------------------

inline bool is_const(const Expression& e, double* out = nullptr) {
    if (e.node().kind != ExprKind::Const) return false;
    if (out) *out = e.node().value;
    return true;
}

inline bool is_const_value(const Expression& e, double v) {
    return e.node().kind == ExprKind::Const && e.node().value == v;
}

inline bool structurally_equal(const Expression& x, const Expression& y);

namespace detail {

inline bool equal_node(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::Const:
            return a.value == b.value;
        case ExprKind::Coord:
            return a.index == b.index;
        case ExprKind::Pow:
            return a.index == b.index && equal_node(*a.a, *b.a);
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Sqrt:
            return equal_node(*a.a, *b.a);
        default:
            return equal_node(*a.a, *b.a) && equal_node(*a.b, *b.b);
    }
}

}  // namespace detail

inline bool structurally_equal(const Expression& x, const Expression& y) {
    return detail::equal_node(x.node(), y.node());
}

inline int max_coord_index(const Expression& e) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::Const:
            return -1;
        case ExprKind::Coord:
            return n.index;
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div:
            return std::max(max_coord_index(Expression(n.a)), max_coord_index(Expression(n.b)));
        default:
            return max_coord_index(Expression(n.a));
    }
}

// --- simplification -------------------------------------------------
//
// Best-effort local rewriting: constant folding, unit/zero identities
// and reassociation of nested constant terms. This is enough to cancel
// translation words symbolically; everything else falls back to the
// numeric checks of the callers.

inline Expression simplify(const Expression& e);

namespace detail {

inline bool try_fold(ExprKind k, double av, double bv, int idx, double* out) {
    switch (k) {
        case ExprKind::Add:
            *out = av + bv;
            return true;
        case ExprKind::Sub:
            *out = av - bv;
            return true;
        case ExprKind::Mul:
            *out = av * bv;
            return true;
        case ExprKind::Div:
            if (bv == 0.0) return false;  // keep the node; eval reports the error
            *out = av / bv;
            return true;
        case ExprKind::Pow:
            if (av == 0.0 && idx < 0) return false;
            *out = std::pow(av, idx);
            return true;
        case ExprKind::Sin:
            *out = std::sin(av);
            return true;
        case ExprKind::Cos:
            *out = std::cos(av);
            return true;
        case ExprKind::Exp:
            *out = std::exp(av);
            return true;
        case ExprKind::Sqrt:
            if (av < 0.0) return false;
            *out = std::sqrt(av);
            return true;
        default:
            return false;
    }
}

}  // namespace detail

inline Expression simplify(const Expression& e) {
    const ExprNode& n = e.node();
    if (n.kind == ExprKind::Const || n.kind == ExprKind::Coord) return e;

    const Expression a = simplify(Expression(n.a));
    const Expression b = n.b ? simplify(Expression(n.b)) : Expression();

    double av = 0.0, bv = 0.0;
    const bool ac = is_const(a, &av);
    const bool bc = n.b ? is_const(b, &bv) : true;

    // full constant folding
    if (ac && (!n.b || bc)) {
        double out;
        if (detail::try_fold(n.kind, av, bv, n.index, &out)) return lit(out);
    }

    switch (n.kind) {
        case ExprKind::Add: {
            if (bc && bv == 0.0) return a;
            if (ac && av == 0.0) return b;
            if (ac) return simplify(b + av);  // constants to the right
            // (x + c1) + c2  ->  x + (c1 + c2)
            if (bc && a.node().kind == ExprKind::Add) {
                double c1;
                if (is_const(Expression(a.node().b), &c1))
                    return simplify(Expression(a.node().a) + lit(c1 + bv));
            }
            return a + b;
        }
        case ExprKind::Sub: {
            if (bc && bv == 0.0) return a;
            if (structurally_equal(a, b)) return lit(0.0);
            if (bc) return simplify(a + lit(-bv));
            return a - b;
        }
        case ExprKind::Mul: {
            if (bc && bv == 1.0) return a;
            if (ac && av == 1.0) return b;
            if ((bc && bv == 0.0) || (ac && av == 0.0)) return lit(0.0);
            if (ac) return simplify(b * av);
            // (x * c1) * c2  ->  x * (c1 * c2)
            if (bc && a.node().kind == ExprKind::Mul) {
                double c1;
                if (is_const(Expression(a.node().b), &c1))
                    return simplify(Expression(a.node().a) * lit(c1 * bv));
            }
            return a * b;
        }
        case ExprKind::Div: {
            if (bc && bv == 1.0) return a;
            if (bc && bv != 0.0) return simplify(a * lit(1.0 / bv));
            return a / b;
        }
        case ExprKind::Pow: {
            if (n.index == 0) return lit(1.0);
            if (n.index == 1) return a;
            return pow(a, n.index);
        }
        case ExprKind::Sin:
            return sin(a);
        case ExprKind::Cos:
            return cos(a);
        case ExprKind::Exp:
            return exp(a);
        case ExprKind::Sqrt:
            return sqrt(a);
        default:
            return e;
    }
}

inline bool is_zero_expression(const Expression& e) { return is_const_value(simplify(e), 0.0); }

// --- differentiation -------------------------------------------------

/// Symbolic partial derivative with respect to y_{k+1}.
inline Expression diff(const Expression& e, int k) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::Const:
            return lit(0.0);
        case ExprKind::Coord:
            return lit(n.index == k ? 1.0 : 0.0);
        case ExprKind::Add:
            return simplify(diff(Expression(n.a), k) + diff(Expression(n.b), k));
        case ExprKind::Sub:
            return simplify(diff(Expression(n.a), k) - diff(Expression(n.b), k));
        case ExprKind::Mul: {
            const Expression a(n.a), b(n.b);
            return simplify(diff(a, k) * b + a * diff(b, k));
        }
        case ExprKind::Div: {
            const Expression a(n.a), b(n.b);
            return simplify((diff(a, k) * b - a * diff(b, k)) / pow(b, 2));
        }
        case ExprKind::Pow: {
            const Expression a(n.a);
            return simplify(lit(n.index) * pow(a, n.index - 1) * diff(a, k));
        }
        case ExprKind::Sin: {
            const Expression a(n.a);
            return simplify(cos(a) * diff(a, k));
        }
        case ExprKind::Cos: {
            const Expression a(n.a);
            return simplify(lit(0.0) - sin(a) * diff(a, k));
        }
        case ExprKind::Exp: {
            const Expression a(n.a);
            return simplify(exp(a) * diff(a, k));
        }
        case ExprKind::Sqrt: {
            const Expression a(n.a);
            return simplify(diff(a, k) / (lit(2.0) * sqrt(a)));
        }
    }
    throw Error("unreachable expression kind");
}

/// Mixed partial for a multi-index s (one entry per coordinate, each >= 0).
inline Expression diff(const Expression& e, const std::vector<int>& s) {
    Expression r = e;
    for (size_t k = 0; k < s.size(); ++k)
        for (int i = 0; i < s[k]; ++i) r = diff(r, static_cast<int>(k));
    return r;
}

// --- substitution ----------------------------------------------------

namespace detail {

inline ExprPtr substitute_node(const ExprNode& n, const std::vector<Expression>& repl) {
    switch (n.kind) {
        case ExprKind::Const:
            return make_node(ExprKind::Const, nullptr, nullptr, n.value);
        case ExprKind::Coord:
            if (n.index >= static_cast<int>(repl.size()))
                throw UnboundCoordinate("substitution misses y" + std::to_string(n.index + 1));
            return repl[static_cast<size_t>(n.index)].ptr();
        case ExprKind::Pow:
            return make_node(ExprKind::Pow, substitute_node(*n.a, repl), nullptr, 0.0, n.index);
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Sqrt:
            return make_node(n.kind, substitute_node(*n.a, repl));
        default:
            return make_node(n.kind, substitute_node(*n.a, repl), substitute_node(*n.b, repl));
    }
}

}  // namespace detail

/// Composition e(y1 <- repl[0], ..., yq <- repl[q-1]).
inline Expression substitute(const Expression& e, const std::vector<Expression>& repl) {
    return simplify(Expression(detail::substitute_node(e.node(), repl)));
}

/// Composition with the affine map y -> A*y + b, one replacement per coordinate.
inline Expression compose_affine(const Expression& e, const Matrix& a, const Vector& b) {
    std::vector<Expression> repl;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        Expression r = lit(b(i));
        for (Eigen::Index j = 0; j < a.cols(); ++j) r = r + lit(a(i, j)) * coord(static_cast<int>(j));
        repl.push_back(r);
    }
    return substitute(e, repl);
}

// --- parsing / printing ----------------------------------------------
//
// Grammar for CLI/JSON payloads: infix over y1..y9, + - * / ^,
// sin cos exp sqrt, parentheses, decimal literals. Standard precedence,
// ^ right-associative with integer exponents only.

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Expression parse() {
        Expression e = sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return simplify(e);
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression parse error at position " + std::to_string(pos_) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Expression sum() {
        Expression e = product();
        while (true) {
            if (eat('+'))
                e = e + product();
            else if (eat('-'))
                e = e - product();
            else
                return e;
        }
    }

    Expression product() {
        Expression e = unary();
        while (true) {
            if (eat('*'))
                e = e * unary();
            else if (eat('/'))
                e = e / unary();
            else
                return e;
        }
    }

    Expression unary() {
        int sign = 1;
        while (true) {
            if (eat('-'))
                sign = -sign;
            else if (eat('+'))
                continue;
            else
                break;
        }
        Expression e = power();
        return sign < 0 ? lit(0.0) - e : e;
    }

    Expression power() {
        Expression base = primary();
        if (eat('^')) return pow(base, exponent());
        return base;
    }

    // integer exponent, optionally signed or parenthesized; right-assoc chains
    int exponent() {
        skip_ws();
        const bool paren = eat('(');
        int sign = 1;
        if (eat('-')) sign = -1;
        skip_ws();
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
            fail("integer exponent expected");
        long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_] - '0');
            if (v > 1000000) fail("exponent too large");
            ++pos_;
        }
        if (pos_ < s_.size() && s_[pos_] == '.') fail("integer exponents only");
        if (paren && !eat(')')) fail("expected ')' after exponent");
        long result = sign * v;
        if (eat('^')) {
            const int upper = exponent();
            if (upper < 0) fail("negative exponent in exponent tower");
            long acc = 1;
            for (int i = 0; i < upper; ++i) {
                acc *= result;
                if (std::abs(acc) > 1000000) fail("exponent tower too large");
            }
            result = acc;
        }
        return static_cast<int>(result);
    }

    Expression primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expression e = sum();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == 'y') {
            ++pos_;
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
                fail("coordinate symbol must be y1..y9");
            const int k = s_[pos_] - '0';
            if (k < 1 || k > 9) fail("coordinate symbol must be y1..y9");
            ++pos_;
            return coord(k - 1);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return function();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expression number() {
        const size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // 'e' was not an exponent marker
            }
        }
        if (pos_ == start) fail("number expected");
        try {
            return lit(std::stod(s_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            fail("malformed number");
        }
    }

    Expression function() {
        const size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (!eat('(')) fail("expected '(' after function name '" + name + "'");
        Expression arg = sum();
        if (!eat(')')) fail("expected ')' closing call of '" + name + "'");
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "exp") return exp(arg);
        if (name == "sqrt") return sqrt(arg);
        fail("unknown function '" + name + "'");
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// precedence: atoms 4, pow 3, mul/div 2, add/sub 1
inline int precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::Const:
            return n.value < 0.0 ? 0 : 4;
        case ExprKind::Coord:
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Sqrt:
            return 4;
        case ExprKind::Pow:
            return 3;
        case ExprKind::Mul:
        case ExprKind::Div:
            return 2;
        default:
            return 1;
    }
}

inline std::string print_node(const ExprNode& n);

inline std::string print_child(const ExprNode& c, int min_prec) {
    std::string s = print_node(c);
    if (precedence(c) < min_prec) return "(" + s + ")";
    return s;
}

inline std::string print_node(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::Const:
            return format_double(n.value);
        case ExprKind::Coord:
            return "y" + std::to_string(n.index + 1);
        case ExprKind::Add: {
            double c;
            if (n.b->kind == ExprKind::Const && (c = n.b->value) < 0.0)
                return print_child(*n.a, 1) + " - " + format_double(-c);
            return print_child(*n.a, 1) + " + " + print_child(*n.b, 1);
        }
        case ExprKind::Sub:
            if (n.a->kind == ExprKind::Const && n.a->value == 0.0) return "-" + print_child(*n.b, 3);
            return print_child(*n.a, 1) + " - " + print_child(*n.b, 2);
        case ExprKind::Mul:
            return print_child(*n.a, 2) + "*" + print_child(*n.b, 3);
        case ExprKind::Div:
            return print_child(*n.a, 2) + "/" + print_child(*n.b, 3);
        case ExprKind::Pow: {
            std::string base = print_child(*n.a, 4);
            if (n.index < 0) return base + "^(" + std::to_string(n.index) + ")";
            return base + "^" + std::to_string(n.index);
        }
        case ExprKind::Sin:
            return "sin(" + print_node(*n.a) + ")";
        case ExprKind::Cos:
            return "cos(" + print_node(*n.a) + ")";
        case ExprKind::Exp:
            return "exp(" + print_node(*n.a) + ")";
        case ExprKind::Sqrt:
            return "sqrt(" + print_node(*n.a) + ")";
    }
    throw Error("unreachable expression kind");
}

}  // namespace detail

inline Expression parse_expression(const std::string& s) { return detail::Parser(s).parse(); }

inline std::string to_string(const Expression& e) { return detail::print_node(e.node()); }

}  // namespace foliage
