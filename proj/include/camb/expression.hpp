#pragma once

/// \file expression.hpp
/// \brief Closed-form scalar fields: parsing, printing, jet evaluation.
///
/// The expression language is deliberately small:
///
///     expr   := term (('+' | '-') term)*
///     term   := factor (('*' | '/') factor)*
///     factor := '-' factor | base ('^' integer)?
///     base   := number | ident | func '(' expr ')' | '(' expr ')'
///     func   := sin | cos | tan | exp | log | sqrt | atan
///
/// Identifiers resolve to chart coordinates, user-declared constants, or
/// the builtin `pi`.  Exponents are integer literals, so every expression
/// is smooth on its domain and jets of any supported order are exact.
/// Note the minus sign in `-x^2` applies to `x^2`: exponentiation binds
/// tighter than negation.
///
/// Fields can also be combined programmatically (sums, products, powers,
/// exp, reindexing onto a larger chart); the result is an ordinary
/// expression tree, so derived metrics keep exact jets.

#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "camb/chart.hpp"
#include "camb/errors.hpp"
#include "camb/jet.hpp"

namespace camb {

// ----- abstract syntax ---------------------------------------------------

enum class fn_kind { sin, cos, tan, exp, log, sqrt, atan };

inline const char* fn_name(fn_kind f) {
    switch (f) {
        case fn_kind::sin: return "sin";
        case fn_kind::cos: return "cos";
        case fn_kind::tan: return "tan";
        case fn_kind::exp: return "exp";
        case fn_kind::log: return "log";
        case fn_kind::sqrt: return "sqrt";
        case fn_kind::atan: return "atan";
    }
    return "?";
}

struct expr;
using expr_ptr = std::shared_ptr<const expr>;

struct expr {
    enum class kind { number, var, call, neg, add, sub, mul, div, pow };

    kind k;
    double num = 0.0;            ///< kind::number
    int var = -1;                ///< kind::var, index into the chart
    fn_kind fn = fn_kind::sin;   ///< kind::call
    int exponent = 0;            ///< kind::pow
    expr_ptr a, b;               ///< children
};

inline expr_ptr make_number(double v) {
    auto e = std::make_shared<expr>();
    e->k = expr::kind::number;
    e->num = v;
    return e;
}

inline expr_ptr make_var(int index) {
    auto e = std::make_shared<expr>();
    e->k = expr::kind::var;
    e->var = index;
    return e;
}

inline expr_ptr make_call(fn_kind f, expr_ptr arg) {
    auto e = std::make_shared<expr>();
    e->k = expr::kind::call;
    e->fn = f;
    e->a = std::move(arg);
    return e;
}

inline expr_ptr make_unary_neg(expr_ptr arg) {
    auto e = std::make_shared<expr>();
    e->k = expr::kind::neg;
    e->a = std::move(arg);
    return e;
}

inline expr_ptr make_binary(expr::kind k, expr_ptr lhs, expr_ptr rhs) {
    auto e = std::make_shared<expr>();
    e->k = k;
    e->a = std::move(lhs);
    e->b = std::move(rhs);
    return e;
}

inline expr_ptr make_pow(expr_ptr base, int exponent) {
    auto e = std::make_shared<expr>();
    e->k = expr::kind::pow;
    e->exponent = exponent;
    e->a = std::move(base);
    return e;
}

// ----- printing ----------------------------------------------------------

namespace detail {

inline int precedence(const expr& e) {
    switch (e.k) {
        case expr::kind::add:
        case expr::kind::sub: return 1;
        case expr::kind::mul:
        case expr::kind::div: return 2;
        case expr::kind::neg: return 3;
        case expr::kind::pow: return 4;
        default: return 5;
    }
}

inline void print_expr(const expr& e, std::string& out, int parent_prec) {
    const int prec = precedence(e);
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (e.k) {
        case expr::kind::number: {
            char buf[32];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, e.num,
                                         std::chars_format::general, 12);
            (void)ec;
            out.append(buf, p);
            break;
        }
        case expr::kind::var: out += "#" + std::to_string(e.var); break;
        case expr::kind::call:
            out += fn_name(e.fn);
            out += '(';
            print_expr(*e.a, out, 0);
            out += ')';
            break;
        case expr::kind::neg:
            out += '-';
            print_expr(*e.a, out, prec + 1);
            break;
        case expr::kind::add:
        case expr::kind::sub:
        case expr::kind::mul:
        case expr::kind::div: {
            const char op = e.k == expr::kind::add   ? '+'
                            : e.k == expr::kind::sub ? '-'
                            : e.k == expr::kind::mul ? '*'
                                                     : '/';
            print_expr(*e.a, out, prec);
            out += op;
            // right operand of - and / needs strictly higher precedence
            print_expr(*e.b, out, prec + (op == '-' || op == '/' ? 1 : 0));
            break;
        }
        case expr::kind::pow:
            print_expr(*e.a, out, prec + 1);
            out += '^';
            out += std::to_string(e.exponent);
            break;
    }
    if (parens) out += ')';
}

inline void print_expr_named(const expr& e, std::string& out, int parent_prec,
                             const std::vector<std::string>& names) {
    // Same traversal as print_expr but with coordinate names substituted.
    const int prec = precedence(e);
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (e.k) {
        case expr::kind::number: {
            char buf[32];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, e.num,
                                         std::chars_format::general, 12);
            (void)ec;
            out.append(buf, p);
            break;
        }
        case expr::kind::var:
            if (e.var >= 0 && e.var < static_cast<int>(names.size()))
                out += names[static_cast<std::size_t>(e.var)];
            else
                out += "#" + std::to_string(e.var);
            break;
        case expr::kind::call:
            out += fn_name(e.fn);
            out += '(';
            print_expr_named(*e.a, out, 0, names);
            out += ')';
            break;
        case expr::kind::neg:
            out += '-';
            print_expr_named(*e.a, out, prec + 1, names);
            break;
        case expr::kind::add:
        case expr::kind::sub:
        case expr::kind::mul:
        case expr::kind::div: {
            const char op = e.k == expr::kind::add   ? '+'
                            : e.k == expr::kind::sub ? '-'
                            : e.k == expr::kind::mul ? '*'
                                                     : '/';
            print_expr_named(*e.a, out, prec, names);
            out += op;
            print_expr_named(*e.b, out, prec + (op == '-' || op == '/' ? 1 : 0), names);
            break;
        }
        case expr::kind::pow:
            print_expr_named(*e.a, out, prec + 1, names);
            out += '^';
            out += std::to_string(e.exponent);
            break;
    }
    if (parens) out += ')';
}

}  // namespace detail

/// Render an expression with coordinate names taken from `chart_coords`.
inline std::string to_string(const expr& e, const std::vector<std::string>& chart_coords) {
    std::string out;
    detail::print_expr_named(e, out, 0, chart_coords);
    return out;
}

// ----- scalar fields -------------------------------------------------------

/// A scalar function on a chart, backed by an expression tree.
struct scalar_field {
    chart_ptr on;
    expr_ptr body;

    std::string text() const { return to_string(*body, on->coords); }
};

namespace detail {

inline void require_same_chart(const scalar_field& f, const scalar_field& g) {
    if (f.on != g.on)
        throw dimension_error("scalar fields combined across different charts ('" +
                              f.on->name + "' vs '" + g.on->name + "')");
}

}  // namespace detail

/// Constant field.
inline scalar_field field_constant(chart_ptr c, double v) {
    return scalar_field{std::move(c), make_number(v)};
}

/// The i-th coordinate as a field.
inline scalar_field field_coordinate(chart_ptr c, int index) {
    if (index < 0 || index >= c->dim())
        throw dimension_error("coordinate index " + std::to_string(index) +
                              " out of range on chart '" + c->name + "'");
    return scalar_field{std::move(c), make_var(index)};
}

inline scalar_field operator+(const scalar_field& f, const scalar_field& g) {
    detail::require_same_chart(f, g);
    return scalar_field{f.on, make_binary(expr::kind::add, f.body, g.body)};
}

inline scalar_field operator-(const scalar_field& f, const scalar_field& g) {
    detail::require_same_chart(f, g);
    return scalar_field{f.on, make_binary(expr::kind::sub, f.body, g.body)};
}

inline scalar_field operator*(const scalar_field& f, const scalar_field& g) {
    detail::require_same_chart(f, g);
    return scalar_field{f.on, make_binary(expr::kind::mul, f.body, g.body)};
}

inline scalar_field operator/(const scalar_field& f, const scalar_field& g) {
    detail::require_same_chart(f, g);
    return scalar_field{f.on, make_binary(expr::kind::div, f.body, g.body)};
}

inline scalar_field operator*(double s, const scalar_field& f) {
    return scalar_field{f.on, make_binary(expr::kind::mul, make_number(s), f.body)};
}

inline scalar_field operator-(const scalar_field& f) {
    return scalar_field{f.on, make_unary_neg(f.body)};
}

inline scalar_field field_pow(const scalar_field& f, int e) {
    return scalar_field{f.on, make_pow(f.body, e)};
}

inline scalar_field field_call(fn_kind fn, const scalar_field& f) {
    return scalar_field{f.on, make_call(fn, f.body)};
}

inline scalar_field field_exp(const scalar_field& f) { return field_call(fn_kind::exp, f); }

namespace detail {

inline expr_ptr reindex_expr(const expr& e, const std::vector<int>& index_map) {
    switch (e.k) {
        case expr::kind::number: return make_number(e.num);
        case expr::kind::var: return make_var(index_map[static_cast<std::size_t>(e.var)]);
        case expr::kind::call: return make_call(e.fn, reindex_expr(*e.a, index_map));
        case expr::kind::neg: return make_unary_neg(reindex_expr(*e.a, index_map));
        case expr::kind::pow: return make_pow(reindex_expr(*e.a, index_map), e.exponent);
        default:
            return make_binary(e.k, reindex_expr(*e.a, index_map),
                               reindex_expr(*e.b, index_map));
    }
}

}  // namespace detail

/// Transplant a field onto another chart: old variable i becomes
/// variable index_map[i] of `target`.  Used to lift base-manifold
/// expressions onto product charts.
inline scalar_field field_reindexed(const scalar_field& f, chart_ptr target,
                                    const std::vector<int>& index_map) {
    if (static_cast<int>(index_map.size()) != f.on->dim())
        throw dimension_error("reindex map size does not match source chart dimension");
    for (int i : index_map)
        if (i < 0 || i >= target->dim())
            throw dimension_error("reindex map entry out of range on chart '" +
                                  target->name + "'");
    return scalar_field{std::move(target), detail::reindex_expr(*f.body, index_map)};
}

// ----- parsing -------------------------------------------------------------

namespace detail {

class parser {
public:
    parser(std::string_view src, const chart& on, const std::map<std::string, double>& consts)
        : src_(src), chart_(on), consts_(consts) {}

    expr_ptr run() {
        expr_ptr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw parse_error(msg, line_, col_);
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
                src_[pos_] == '\n'))
            advance();
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }

    bool accept(char c) {
        skip_ws();
        if (!at_end() && src_[pos_] == c) {
            advance();
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
    }

    expr_ptr parse_expr() {
        expr_ptr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = make_binary(expr::kind::add, e, parse_term());
            else if (accept('-'))
                e = make_binary(expr::kind::sub, e, parse_term());
            else
                return e;
        }
    }

    expr_ptr parse_term() {
        expr_ptr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = make_binary(expr::kind::mul, e, parse_factor());
            else if (accept('/'))
                e = make_binary(expr::kind::div, e, parse_factor());
            else
                return e;
        }
    }

    expr_ptr parse_factor() {
        // Negation distributes over the whole factor, so -x^2 == -(x^2).
        if (accept('-')) return make_unary_neg(parse_factor());
        expr_ptr base = parse_base();
        if (accept('^')) return make_pow(std::move(base), parse_int_literal());
        return base;
    }

    int parse_int_literal() {
        skip_ws();
        const int line = line_, col = col_;
        std::size_t start = pos_;
        if (peek() == '-') advance();
        if (!is_digit(peek())) throw parse_error("expected an integer exponent", line, col);
        while (is_digit(peek())) advance();
        int v = 0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc())
            throw parse_error("integer exponent out of range", line, col);
        return v;
    }

    expr_ptr parse_base() {
        skip_ws();
        if (at_end()) fail("unexpected end of input");
        const char c = peek();
        if (c == '(') {
            advance();
            expr_ptr e = parse_expr();
            expect(')', "to close the parenthesis");
            return e;
        }
        if (is_digit(c) || c == '.') return parse_number();
        if (is_alpha(c)) return parse_identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    expr_ptr parse_number() {
        const int line = line_, col = col_;
        std::size_t start = pos_;
        while (is_digit(peek())) advance();
        if (peek() == '.') {
            advance();
            while (is_digit(peek())) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            advance();
            if (peek() == '+' || peek() == '-') advance();
            if (!is_digit(peek())) throw parse_error("malformed exponent in number", line_, col_);
            while (is_digit(peek())) advance();
        }
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw parse_error("malformed number literal", line, col);
        return make_number(v);
    }

    expr_ptr parse_identifier() {
        const int line = line_, col = col_;
        std::size_t start = pos_;
        while (is_alnum(peek())) advance();
        const std::string name(src_.substr(start, pos_ - start));

        // A known function name followed by '(' is a call; everything
        // else resolves against coordinates, constants, then `pi`.
        static const std::pair<const char*, fn_kind> fns[] = {
            {"sin", fn_kind::sin}, {"cos", fn_kind::cos},   {"tan", fn_kind::tan},
            {"exp", fn_kind::exp}, {"log", fn_kind::log},   {"sqrt", fn_kind::sqrt},
            {"atan", fn_kind::atan}};
        for (const auto& [fname, fk] : fns) {
            if (name == fname) {
                skip_ws();
                if (peek() == '(') {
                    advance();
                    expr_ptr arg = parse_expr();
                    expect(')', "to close the argument list");
                    return make_call(fk, std::move(arg));
                }
                break;  // fall through to identifier resolution
            }
        }

        if (int i = chart_.index_of(name); i >= 0) return make_var(i);
        if (auto it = consts_.find(name); it != consts_.end()) return make_number(it->second);
        if (name == "pi") return make_number(3.14159265358979323846);
        throw unknown_identifier_error(name, line, col);
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

    std::string_view src_;
    const chart& chart_;
    const std::map<std::string, double>& consts_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace detail

/// Parse `text` into a scalar field on `c`.  `constants` supplies named
/// values usable alongside the chart coordinates; `pi` is builtin.
/// Throws parse_error / unknown_identifier_error with 1-based location.
inline scalar_field parse_expression(chart_ptr c, std::string_view text,
                                     const std::map<std::string, double>& constants = {}) {
    detail::parser p(text, *c, constants);
    return scalar_field{std::move(c), p.run()};
}

// ----- evaluation ----------------------------------------------------------

namespace detail {

// The jet overloads already police their domains; the double overloads
// must match that behaviour instead of returning NaN/inf silently.
inline double div_checked(double a, double b) {
    if (b == 0.0) throw eval_domain_error("division by zero");
    return a / b;
}
inline jet div_checked(const jet& a, const jet& b) { return a / b; }
inline double pow_checked(double x, int e) {
    if (e < 0 && x == 0.0) throw eval_domain_error("division by zero");
    double r = 1.0, b = x;
    int k = e < 0 ? -e : e;
    for (; k > 0; k >>= 1) {
        if (k & 1) r *= b;
        if (k > 1) b *= b;
    }
    return e < 0 ? 1.0 / r : r;
}
inline jet pow_checked(const jet& x, int e) { return pow(x, e); }
inline double log_checked(double x) {
    if (x <= 0.0) throw eval_domain_error("log of a non-positive value");
    return std::log(x);
}
inline jet log_checked(const jet& x) { return log(x); }
inline double sqrt_checked(double x) {
    if (x < 0.0) throw eval_domain_error("sqrt of a non-positive value");
    return std::sqrt(x);
}
inline jet sqrt_checked(const jet& x) { return sqrt(x); }

/// Evaluate over any scalar type supporting the expression algebra
/// (double for plain values, jet for derivatives).  Domain failures are
/// annotated with the offending subexpression.
template <class T>
T eval_node(const expr& e, const std::vector<T>& vars, const T& zero,
            const std::vector<std::string>& names) {
    using std::exp;
    using std::log;
    using std::sqrt;
    using std::sin;
    using std::cos;
    using std::tan;
    using std::atan;
    switch (e.k) {
        case expr::kind::number: {
            T r = zero;
            r = r + e.num;
            return r;
        }
        case expr::kind::var: return vars[static_cast<std::size_t>(e.var)];
        case expr::kind::neg: return -eval_node(*e.a, vars, zero, names);
        case expr::kind::add:
            return eval_node(*e.a, vars, zero, names) + eval_node(*e.b, vars, zero, names);
        case expr::kind::sub:
            return eval_node(*e.a, vars, zero, names) - eval_node(*e.b, vars, zero, names);
        case expr::kind::mul:
            return eval_node(*e.a, vars, zero, names) * eval_node(*e.b, vars, zero, names);
        case expr::kind::div: {
            T num = eval_node(*e.a, vars, zero, names);
            T den = eval_node(*e.b, vars, zero, names);
            try {
                return div_checked(num, den);
            } catch (const eval_domain_error& err) {
                throw eval_domain_error(std::string(err.what()) + " in '" +
                                        to_string(e, names) + "'");
            }
        }
        case expr::kind::pow: {
            T base = eval_node(*e.a, vars, zero, names);
            try {
                return pow_checked(base, e.exponent);
            } catch (const eval_domain_error& err) {
                throw eval_domain_error(std::string(err.what()) + " in '" +
                                        to_string(e, names) + "'");
            }
        }
        case expr::kind::call: {
            T arg = eval_node(*e.a, vars, zero, names);
            try {
                switch (e.fn) {
                    case fn_kind::sin: return sin(arg);
                    case fn_kind::cos: return cos(arg);
                    case fn_kind::tan: return tan(arg);
                    case fn_kind::exp: return exp(arg);
                    case fn_kind::log: return log_checked(arg);
                    case fn_kind::sqrt: return sqrt_checked(arg);
                    case fn_kind::atan: return atan(arg);
                }
            } catch (const eval_domain_error& err) {
                throw eval_domain_error(std::string(err.what()) + " in '" +
                                        to_string(e, names) + "'");
            }
        }
    }
    throw error("corrupt expression node");
}

inline void require_field_point(const scalar_field& f, const point& p) {
    if (f.on != p.on)
        throw dimension_error("field on chart '" + f.on->name +
                              "' evaluated at a point of chart '" +
                              (p.on ? p.on->name : std::string("<null>")) + "'");
}

}  // namespace detail

/// Value evaluation against a raw coordinate vector (quadrature inner
/// loops).  The caller guarantees the coordinates belong to f's chart.
inline double eval_value_unchecked(const scalar_field& f, const std::vector<double>& x) {
    return detail::eval_node<double>(*f.body, x, 0.0, f.on->coords);
}

/// Value of the field at a point (no derivatives; fast path).
inline double eval_value(const scalar_field& f, const point& p) {
    detail::require_field_point(f, p);
    return eval_value_unchecked(f, p.x);
}

/// Jet of the field at a point, exact to roundoff.
/// \pre 0 <= order <= 3
inline jet eval_jet(const scalar_field& f, const point& p, int order) {
    detail::require_field_point(f, p);
    if (order < 0 || order > 3)
        throw dimension_error("jet order " + std::to_string(order) + " not in [0, 3]");
    const int n = f.on->dim();
    std::vector<jet> vars;
    vars.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vars.push_back(jet::variable(p[i], n, order, i));
    return detail::eval_node<jet>(*f.body, vars, jet::constant(0.0, n, order), f.on->coords);
}

/// Central finite differences of the field, for cross-checking eval_jet.
/// Supports orders 1 and 2 with the usual O(h^2) truncation error.
/// The full stencil box p ± h must stay inside the chart bounds.
inline jet finite_difference_jet(const scalar_field& f, const point& p, int order, double h) {
    detail::require_field_point(f, p);
    if (order < 1 || order > 2)
        throw dimension_error("finite differences support orders 1 and 2 only");
    if (!(h > 0.0)) throw dimension_error("finite-difference step must be positive");
    const int n = f.on->dim();
    for (int i = 0; i < n; ++i) {
        const interval& b = f.on->bounds[static_cast<std::size_t>(i)];
        if (!b.contains(p[i] - h) || !b.contains(p[i] + h))
            throw bounds_error("finite-difference stencil leaves chart bounds in coordinate '" +
                               f.on->coords[static_cast<std::size_t>(i)] + "'");
    }

    auto value_at = [&](std::vector<double> x) {
        return detail::eval_node<double>(*f.body, x, 0.0, f.on->coords);
    };

    jet r = jet::constant(value_at(p.x), n, order);
    const double f0 = r.value();
    for (int i = 0; i < n; ++i) {
        std::vector<double> xp = p.x, xm = p.x;
        xp[static_cast<std::size_t>(i)] += h;
        xm[static_cast<std::size_t>(i)] -= h;
        const double fp = value_at(xp), fm = value_at(xm);
        r.set_d1(i, (fp - fm) / (2.0 * h));
        if (order >= 2) r.set_d2(i, i, (fp - 2.0 * f0 + fm) / (h * h));
    }
    if (order >= 2) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                std::vector<double> xpp = p.x, xpm = p.x, xmp = p.x, xmm = p.x;
                xpp[static_cast<std::size_t>(i)] += h;
                xpp[static_cast<std::size_t>(j)] += h;
                xpm[static_cast<std::size_t>(i)] += h;
                xpm[static_cast<std::size_t>(j)] -= h;
                xmp[static_cast<std::size_t>(i)] -= h;
                xmp[static_cast<std::size_t>(j)] += h;
                xmm[static_cast<std::size_t>(i)] -= h;
                xmm[static_cast<std::size_t>(j)] -= h;
                r.set_d2(i, j,
                         (value_at(xpp) - value_at(xpm) - value_at(xmp) + value_at(xmm)) /
                             (4.0 * h * h));
            }
    }
    return r;
}

}  // namespace camb
