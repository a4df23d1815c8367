#pragma once

// Scalar expressions over chart coordinates x1..xn.
//
// Grammar (whitespace insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | function '(' expr ')' | '(' expr ')'
//
// so '^' binds tighter than unary minus and associates to the right.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"

namespace dihedral {

enum class Func { sin, cos, tan, exp, log, sqrt, sinh, cosh, abs };

inline constexpr std::pair<std::string_view, Func> kFunctions[] = {
    {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},
    {"exp", Func::exp},   {"log", Func::log},   {"sqrt", Func::sqrt},
    {"sinh", Func::sinh}, {"cosh", Func::cosh}, {"abs", Func::abs},
};

inline std::string_view func_name(Func f)
{
    for (const auto& [name, id] : kFunctions)
        if (id == f) return name;
    return "?";
}

/// Formats a double so that parsing the text returns the same value.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline double checked(double v, const char* what)
{
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " produced a non-finite value");
    return v;
}

inline double apply(Func f, double a)
{
    switch (f) {
    case Func::sin: return std::sin(a);
    case Func::cos: return std::cos(a);
    case Func::tan:
        if (std::cos(a) == 0.0) throw DomainError("tan at a pole");
        return checked(std::tan(a), "tan");
    case Func::exp: return checked(std::exp(a), "exp");
    case Func::log:
        if (!(a > 0.0)) throw DomainError("log of a non-positive number");
        return std::log(a);
    case Func::sqrt:
        if (a < 0.0) throw DomainError("sqrt of a negative number");
        return std::sqrt(a);
    case Func::sinh: return checked(std::sinh(a), "sinh");
    case Func::cosh: return checked(std::cosh(a), "cosh");
    case Func::abs: return std::abs(a);
    }
    return 0.0;
}

inline Jet apply(Func f, const Jet& a)
{
    const double x = a.value();
    switch (f) {
    case Func::sin: return a.chain(std::sin(x), std::cos(x), -std::sin(x));
    case Func::cos: return a.chain(std::cos(x), -std::sin(x), -std::cos(x));
    case Func::tan: {
        const double t = apply(Func::tan, x);
        const double s = 1.0 + t * t;
        return a.chain(t, s, 2.0 * t * s);
    }
    case Func::exp: {
        const double e = apply(Func::exp, x);
        return a.chain(e, e, e);
    }
    case Func::log:
        return a.chain(apply(Func::log, x), 1.0 / x, -1.0 / (x * x));
    case Func::sqrt: {
        if (!(x > 0.0)) throw DomainError("sqrt is not differentiable at a non-positive argument");
        const double s = std::sqrt(x);
        return a.chain(s, 0.5 / s, -0.25 / (s * x));
    }
    case Func::sinh: return a.chain(apply(Func::sinh, x), std::cosh(x), std::sinh(x));
    case Func::cosh: return a.chain(apply(Func::cosh, x), std::sinh(x), std::cosh(x));
    case Func::abs: {
        const double sg = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        return a.chain(std::abs(x), sg, 0.0);
    }
    }
    return a;
}

inline double power(double a, double b)
{
    if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
    if (a < 0.0 && b != std::floor(b)) throw DomainError("negative base with a non-integer exponent");
    return checked(std::pow(a, b), "^");
}

// a^p for a constant exponent p.
inline Jet power(const Jet& a, double p)
{
    const double x = a.value();
    if (p == 0.0) return Jet(1.0, a.dim());
    const double f = power(x, p);
    const double df = p == 1.0 ? 1.0 : p * power(x, p - 1.0);
    const double d2f = (p == 1.0 || p == 2.0) ? p * (p - 1.0) : p * (p - 1.0) * power(x, p - 2.0);
    return a.chain(f, df, d2f);
}

} // namespace detail

/// Immutable expression tree. Copies share structure.
class Expr {
public:
    enum class Kind { number, variable, negate, add, sub, mul, div, pow, func };

    Expr() : Expr(number(0.0)) {}

    static Expr number(double v) { return Expr(std::make_shared<Node>(Node{Kind::number, v, 0, {}, {}})); }

    /// The coordinate x_{index+1} (index is 0-based).
    static Expr variable(int index)
    {
        return Expr(std::make_shared<Node>(Node{Kind::variable, 0.0, index, {}, {}}));
    }

    static Expr unary(Kind k, Expr a) { return Expr(std::make_shared<Node>(Node{k, 0.0, 0, a.node_, {}})); }

    static Expr binary(Kind k, Expr a, Expr b)
    {
        return Expr(std::make_shared<Node>(Node{k, 0.0, 0, a.node_, b.node_}));
    }

    static Expr call(Func f, Expr a)
    {
        return Expr(std::make_shared<Node>(Node{Kind::func, 0.0, static_cast<int>(f), a.node_, {}}));
    }

    Kind kind() const noexcept { return node_->kind; }
    double value() const noexcept { return node_->value; }
    int variable_index() const noexcept { return node_->index; }
    Func function() const noexcept { return static_cast<Func>(node_->index); }
    Expr lhs() const { return Expr(node_->lhs); }
    Expr rhs() const { return Expr(node_->rhs); }

    /// Number of coordinates the expression needs (largest variable index used).
    int arity() const { return arity(*node_); }

    /// Fully parenthesised text that parses back to an equivalent tree.
    std::string to_string() const
    {
        std::string out;
        print(*node_, out);
        return out;
    }

    /// Evaluates on doubles or jets. `x` must provide at least arity() coordinates.
    template <class T>
    T evaluate(std::span<const T> x) const
    {
        if (static_cast<int>(x.size()) < arity())
            throw InputError("expression uses x" + std::to_string(arity()) + " but the point has "
                             + std::to_string(x.size()) + " coordinates");
        return eval<T>(*node_, x);
    }

    double operator()(std::span<const double> x) const { return evaluate<double>(x); }
    double operator()(std::initializer_list<double> x) const
    {
        return evaluate<double>(std::span<const double>(x.begin(), x.size()));
    }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(Kind::add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(Kind::sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(Kind::mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(Kind::div, a, b); }
    friend Expr operator-(const Expr& a) { return unary(Kind::negate, a); }
    friend Expr pow(const Expr& a, const Expr& b) { return binary(Kind::pow, a, b); }

private:
    struct Node {
        Kind kind;
        double value;
        int index;
        std::shared_ptr<const Node> lhs, rhs;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static int arity(const Node& n)
    {
        switch (n.kind) {
        case Kind::number: return 0;
        case Kind::variable: return n.index + 1;
        case Kind::negate:
        case Kind::func: return arity(*n.lhs);
        default: return std::max(arity(*n.lhs), arity(*n.rhs));
        }
    }

    static bool constant(const Node& n) { return arity(n) == 0; }

    static void print(const Node& n, std::string& out)
    {
        switch (n.kind) {
        case Kind::number:
            if (std::signbit(n.value)) {
                out += "(-" + format_double(-n.value) + ")";
            } else {
                out += format_double(n.value);
            }
            return;
        case Kind::variable: out += "x" + std::to_string(n.index + 1); return;
        case Kind::negate:
            out += "(-";
            print(*n.lhs, out);
            out += ")";
            return;
        case Kind::func:
            out += func_name(static_cast<Func>(n.index));
            out += "(";
            print(*n.lhs, out);
            out += ")";
            return;
        default: break;
        }
        const char* op = n.kind == Kind::add ? " + "
            : n.kind == Kind::sub            ? " - "
            : n.kind == Kind::mul            ? " * "
            : n.kind == Kind::div            ? " / "
                                             : " ^ ";
        out += "(";
        print(*n.lhs, out);
        out += op;
        print(*n.rhs, out);
        out += ")";
    }

    template <class T>
    static T lift(double v, std::span<const T> x)
    {
        if constexpr (std::is_same_v<T, double>) {
            return v;
        } else {
            return T(v, x.empty() ? 0 : x[0].dim());
        }
    }

    template <class T>
    static T eval(const Node& n, std::span<const T> x)
    {
        switch (n.kind) {
        case Kind::number: return lift<T>(n.value, x);
        case Kind::variable: return x[static_cast<std::size_t>(n.index)];
        case Kind::negate: return -eval<T>(*n.lhs, x);
        case Kind::add: return eval<T>(*n.lhs, x) + eval<T>(*n.rhs, x);
        case Kind::sub: return eval<T>(*n.lhs, x) - eval<T>(*n.rhs, x);
        case Kind::mul: return eval<T>(*n.lhs, x) * eval<T>(*n.rhs, x);
        case Kind::div: {
            const T b = eval<T>(*n.rhs, x);
            if constexpr (std::is_same_v<T, double>) {
                if (b == 0.0) throw DomainError("division by zero");
            }
            return eval<T>(*n.lhs, x) / b;
        }
        case Kind::pow: {
            const T a = eval<T>(*n.lhs, x);
            if constexpr (std::is_same_v<T, double>) {
                return detail::power(a, eval<T>(*n.rhs, x));
            } else {
                if (constant(*n.rhs)) return detail::power(a, eval<double>(*n.rhs, std::span<const double>()));
                if (!(a.value() > 0.0)) throw DomainError("variable exponent needs a positive base");
                return detail::apply(Func::exp, eval<T>(*n.rhs, x) * detail::apply(Func::log, a));
            }
        }
        case Kind::func: return detail::apply(static_cast<Func>(n.index), eval<T>(*n.lhs, x));
        }
        return lift<T>(0.0, x);
    }

    std::shared_ptr<const Node> node_;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Expr parse()
    {
        skip();
        if (pos_ == s_.size()) fail("empty expression");
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, ParseError::Kind k = ParseError::Kind::syntax) const
    {
        throw ParseError(k, pos_, msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr()
    {
        Expr e = term();
        for (;;) {
            if (accept('+')) {
                e = e + term();
            } else if (accept('-')) {
                e = e - term();
            } else {
                return e;
            }
        }
    }

    Expr term()
    {
        Expr e = unary();
        for (;;) {
            if (accept('*')) {
                e = e * unary();
            } else if (accept('/')) {
                e = e / unary();
            } else {
                return e;
            }
        }
    }

    Expr unary()
    {
        if (accept('-')) return -unary();
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (accept('^')) return pow(base, unary());
        return base;
    }

    Expr primary()
    {
        skip();
        if (pos_ == s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expr number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                digits();
            }
        }
        const std::string lit(s_.substr(start, pos_ - start));
        return Expr::number(std::strtod(lit.c_str(), nullptr));
    }

    Expr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);

        if (id.size() >= 2 && id[0] == 'x' && id[1] != '0'
            && id.find_first_not_of("0123456789", 1) == std::string_view::npos && id.size() <= 4) {
            return Expr::variable(std::stoi(std::string(id.substr(1))) - 1);
        }
        for (const auto& [name, f] : kFunctions) {
            if (name != id) continue;
            skip();
            if (pos_ == s_.size() || s_[pos_] != '(') fail("expected '(' after " + std::string(id));
            ++pos_;
            skip();
            if (pos_ < s_.size() && s_[pos_] == ')')
                fail(std::string(id) + " takes exactly one argument", ParseError::Kind::arity);
            Expr arg = expr();
            skip();
            if (pos_ < s_.size() && s_[pos_] == ',')
                fail(std::string(id) + " takes exactly one argument", ParseError::Kind::arity);
            if (!accept(')')) fail("expected ')'");
            return Expr::call(f, arg);
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(id) + "'", ParseError::Kind::unknown_identifier);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses expression text. Throws ParseError carrying the byte offset of the problem.
inline Expr parse_expression(std::string_view text) { return detail::Parser(text).parse(); }

/// A partial derivative given as 0-based coordinate indices: {} is the value,
/// {i} is d/dx_{i+1}, {i, j} is the mixed second derivative.
using MultiIndex = std::vector<int>;

struct DerivativeOptions {
    enum class Method { finite_difference, autodiff };
    Method method = Method::finite_difference;
    /// Relative central-difference steps: h = scale * max(1, |x_i|).
    double first_step = 1e-6;
    double second_step = 1e-4;
};

/// Value and partial derivatives of `e` at `x`, one entry per requested multi-index.
inline std::vector<double> eval_with_derivatives(const Expr& e, std::span<const double> x,
                                                 const std::vector<MultiIndex>& wanted,
                                                 const DerivativeOptions& opt = {})
{
    const int n = static_cast<int>(x.size());
    for (const auto& m : wanted) {
        if (m.size() > 2) throw InputError("derivative order above 2 requested");
        for (int i : m)
            if (i < 0 || i >= n) throw InputError("derivative index out of range");
    }
    std::vector<double> out;
    out.reserve(wanted.size());

    if (opt.method == DerivativeOptions::Method::autodiff) {
        std::vector<Jet> xj;
        for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(x[i], i, n));
        const Jet j = e.evaluate<Jet>(xj);
        for (const auto& m : wanted) {
            if (m.empty()) out.push_back(j.value());
            else if (m.size() == 1) out.push_back(j.grad()[m[0]]);
            else out.push_back(j.hess()(m[0], m[1]));
        }
        return out;
    }

    std::vector<double> p(x.begin(), x.end());
    auto f = [&] { return e.evaluate<double>(p); };
    auto step = [&](int i, double scale) { return scale * std::max(1.0, std::abs(x[i])); };
    for (const auto& m : wanted) {
        if (m.empty()) {
            out.push_back(f());
        } else if (m.size() == 1) {
            const int i = m[0];
            const double h = step(i, opt.first_step);
            p[i] = x[i] + h;
            const double fp = f();
            p[i] = x[i] - h;
            const double fm = f();
            p[i] = x[i];
            out.push_back((fp - fm) / (2.0 * h));
        } else if (m[0] == m[1]) {
            const int i = m[0];
            const double h = step(i, opt.second_step);
            const double f0 = f();
            p[i] = x[i] + h;
            const double fp = f();
            p[i] = x[i] - h;
            const double fm = f();
            p[i] = x[i];
            out.push_back((fp - 2.0 * f0 + fm) / (h * h));
        } else {
            const int i = m[0], k = m[1];
            const double hi = step(i, opt.second_step), hk = step(k, opt.second_step);
            double acc = 0.0;
            for (int si : {1, -1})
                for (int sk : {1, -1}) {
                    p[i] = x[i] + si * hi;
                    p[k] = x[k] + sk * hk;
                    acc += si * sk * f();
                }
            p[i] = x[i];
            p[k] = x[k];
            out.push_back(acc / (4.0 * hi * hk));
        }
    }
    return out;
}

/// Value, gradient and Hessian of `e` at `x` by forward-mode differentiation.
inline Jet eval_jet(const Expr& e, std::span<const double> x)
{
    const int n = static_cast<int>(x.size());
    std::vector<Jet> xj;
    xj.reserve(x.size());
    for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(x[i], i, n));
    return e.evaluate<Jet>(xj);
}

} // namespace dihedral
