#pragma once

/// \file jet.hpp
/// \brief Truncated multivariate Taylor arithmetic up to third order.
///
/// A jet carries the value of a smooth function at a point together with
/// its partial derivatives up to a chosen order (0..3) in up to
/// kMaxJetVars variables.  Arithmetic and the elementary functions
/// propagate derivatives exactly (to roundoff), so any composite built
/// from jets is automatically differentiated — no symbolic manipulation
/// and no finite-difference truncation error.
///
/// Derivative tensors are stored fully but written canonically: mixed
/// entries are computed once for sorted index tuples and mirrored to all
/// permutations, so d2(i,j) == d2(j,i) and d3 permutations compare
/// bit-for-bit equal.

#include <array>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "camb/errors.hpp"

namespace camb {

/// Largest number of chart coordinates a jet can track.  Base charts use
/// up to 3; product charts add the scale and band coordinates (max 5);
/// one spare slot is kept for test constructions.
inline constexpr int kMaxJetVars = 6;

class jet {
public:
    /// Zero constant in zero variables.  Mostly useful as a placeholder
    /// before assignment.
    jet() = default;

    /// A constant: value v, all derivatives zero.
    static jet constant(double v, int dim, int order) {
        jet j(dim, order);
        j.v_ = v;
        return j;
    }

    /// The coordinate function number `index` seeded at value v:
    /// gradient is the index-th unit vector, higher derivatives zero.
    static jet variable(double v, int dim, int order, int index) {
        jet j(dim, order);
        j.v_ = v;
        if (index < 0 || index >= dim)
            throw dimension_error("jet::variable: index " + std::to_string(index) +
                                  " out of range for dimension " + std::to_string(dim));
        if (order >= 1) j.g_[static_cast<std::size_t>(index)] = 1.0;
        return j;
    }

    int dim() const noexcept { return dim_; }
    int order() const noexcept { return order_; }

    double value() const noexcept { return v_; }
    double d1(int i) const noexcept { return g_[idx1(i)]; }
    double d2(int i, int j) const noexcept { return h_[idx2(i, j)]; }
    double d3(int i, int j, int k) const noexcept { return t_[idx3(i, j, k)]; }

    double& value() noexcept { return v_; }

    /// Entry-wise writers for assembling a jet from externally computed
    /// coefficients (finite differences).  Mixed entries are mirrored to
    /// every index permutation, preserving the symmetric-storage invariant.
    void set_d1(int i, double x) noexcept { g_[idx1(i)] = x; }
    void set_d2(int i, int j, double x) noexcept { set2(i, j, x); }
    void set_d3(int i, int j, int k, double x) noexcept { set3(i, j, k, x); }

    /// ∂_i of this jet as a jet one order lower.
    /// \pre order() >= 1
    jet partial(int i) const {
        assert(order_ >= 1);
        jet r(dim_, order_ - 1);
        r.v_ = d1(i);
        if (r.order_ >= 1)
            for (int a = 0; a < dim_; ++a) r.g_[idx1(a)] = d2(i, a);
        if (r.order_ >= 2)
            for (int a = 0; a < dim_; ++a)
                for (int b = a; b < dim_; ++b) r.set2(a, b, d3(i, a, b));
        return r;
    }

    /// Restriction to a sub-chart: keep[a] is the old index of new
    /// variable a.  Derivatives in dropped variables are discarded.
    jet restricted(const std::vector<int>& keep) const {
        jet r(static_cast<int>(keep.size()), order_);
        r.v_ = v_;
        const int m = r.dim_;
        if (order_ >= 1)
            for (int a = 0; a < m; ++a) r.g_[idx1(a)] = d1(keep[static_cast<std::size_t>(a)]);
        if (order_ >= 2)
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b)
                    r.set2(a, b, d2(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]));
        if (order_ >= 3)
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b)
                    for (int c = b; c < m; ++c)
                        r.set3(a, b, c, d3(keep[static_cast<std::size_t>(a)],
                                           keep[static_cast<std::size_t>(b)],
                                           keep[static_cast<std::size_t>(c)]));
        return r;
    }

    /// Embedding into a larger chart: old variable a becomes new variable
    /// where[a]; derivatives in the remaining variables are zero.
    jet embedded(int new_dim, const std::vector<int>& where) const {
        assert(static_cast<int>(where.size()) == dim_);
        jet r(new_dim, order_);
        r.v_ = v_;
        if (order_ >= 1)
            for (int a = 0; a < dim_; ++a) r.g_[r.idx1(where[static_cast<std::size_t>(a)])] = d1(a);
        if (order_ >= 2)
            for (int a = 0; a < dim_; ++a)
                for (int b = a; b < dim_; ++b)
                    r.set2(where[static_cast<std::size_t>(a)], where[static_cast<std::size_t>(b)], d2(a, b));
        if (order_ >= 3)
            for (int a = 0; a < dim_; ++a)
                for (int b = a; b < dim_; ++b)
                    for (int c = b; c < dim_; ++c)
                        r.set3(where[static_cast<std::size_t>(a)], where[static_cast<std::size_t>(b)],
                               where[static_cast<std::size_t>(c)], d3(a, b, c));
        return r;
    }

    // ----- arithmetic --------------------------------------------------

    friend jet operator-(const jet& a) {
        jet r(a.dim_, a.order_);
        r.v_ = -a.v_;
        r.for_each_deriv(a, [](double x) { return -x; });
        return r;
    }

    friend jet operator+(const jet& a, const jet& b) {
        auto [n, o] = joined(a, b);
        jet r(n, o);
        r.v_ = a.v_ + b.v_;
        r.zip(a, b, [](double x, double y) { return x + y; });
        return r;
    }

    friend jet operator-(const jet& a, const jet& b) {
        auto [n, o] = joined(a, b);
        jet r(n, o);
        r.v_ = a.v_ - b.v_;
        r.zip(a, b, [](double x, double y) { return x - y; });
        return r;
    }

    /// Leibniz rule through third order:
    /// (fg)_i = f_i g + f g_i
    /// (fg)_ij = f_ij g + f_i g_j + f_j g_i + f g_ij
    /// (fg)_ijk = f_ijk g + f_ij g_k + f_ik g_j + f_jk g_i
    ///          + f_i g_jk + f_j g_ik + f_k g_ij + f g_ijk
    friend jet operator*(const jet& a, const jet& b) {
        auto [n, o] = joined(a, b);
        jet r(n, o);
        r.v_ = a.v_ * b.v_;
        if (o >= 1)
            for (int i = 0; i < n; ++i) r.g_[idx1(i)] = a.d1(i) * b.v_ + a.v_ * b.d1(i);
        if (o >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    r.set2(i, j, a.d2(i, j) * b.v_ + a.d1(i) * b.d1(j) +
                                     a.d1(j) * b.d1(i) + a.v_ * b.d2(i, j));
        if (o >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    for (int k = j; k < n; ++k)
                        r.set3(i, j, k,
                               a.d3(i, j, k) * b.v_ + a.d2(i, j) * b.d1(k) +
                                   a.d2(i, k) * b.d1(j) + a.d2(j, k) * b.d1(i) +
                                   a.d1(i) * b.d2(j, k) + a.d1(j) * b.d2(i, k) +
                                   a.d1(k) * b.d2(i, j) + a.v_ * b.d3(i, j, k));
        return r;
    }

    friend jet operator/(const jet& a, const jet& b) { return a * reciprocal(b); }

    friend jet operator+(const jet& a, double s) { return a + constant(s, a.dim_, a.order_); }
    friend jet operator+(double s, const jet& a) { return a + s; }
    friend jet operator-(const jet& a, double s) { return a + (-s); }
    friend jet operator-(double s, const jet& a) { return constant(s, a.dim_, a.order_) - a; }
    friend jet operator*(const jet& a, double s) {
        jet r(a.dim_, a.order_);
        r.v_ = a.v_ * s;
        r.for_each_deriv(a, [s](double x) { return x * s; });
        return r;
    }
    friend jet operator*(double s, const jet& a) { return a * s; }
    friend jet operator/(const jet& a, double s) { return a * (1.0 / s); }
    friend jet operator/(double s, const jet& a) { return reciprocal(a) * s; }

    jet& operator+=(const jet& b) { return *this = *this + b; }
    jet& operator-=(const jet& b) { return *this = *this - b; }
    jet& operator*=(const jet& b) { return *this = *this * b; }

    // ----- univariate composition and elementary functions -------------

    /// Faà di Bruno through third order for h = φ ∘ f, given the
    /// derivatives φ0..φ3 of φ at f.value():
    /// h_i = φ1 f_i
    /// h_ij = φ2 f_i f_j + φ1 f_ij
    /// h_ijk = φ3 f_i f_j f_k + φ2 (f_ij f_k + f_ik f_j + f_jk f_i) + φ1 f_ijk
    jet compose(double p0, double p1, double p2, double p3) const {
        const int n = dim_;
        const int o = order_;
        jet r(n, o);
        r.v_ = p0;
        if (o >= 1)
            for (int i = 0; i < n; ++i) r.g_[idx1(i)] = p1 * d1(i);
        if (o >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    r.set2(i, j, p2 * d1(i) * d1(j) + p1 * d2(i, j));
        if (o >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    for (int k = j; k < n; ++k)
                        r.set3(i, j, k,
                               p3 * d1(i) * d1(j) * d1(k) +
                                   p2 * (d2(i, j) * d1(k) + d2(i, k) * d1(j) +
                                         d2(j, k) * d1(i)) +
                                   p1 * d3(i, j, k));
        return r;
    }

    friend jet reciprocal(const jet& a) {
        const double v = a.v_;
        if (v == 0.0) throw eval_domain_error("division by zero");
        const double w = 1.0 / v;
        return a.compose(w, -w * w, 2.0 * w * w * w, -6.0 * w * w * w * w);
    }

    friend jet sin(const jet& a) {
        const double s = std::sin(a.v_), c = std::cos(a.v_);
        return a.compose(s, c, -s, -c);
    }

    friend jet cos(const jet& a) {
        const double s = std::sin(a.v_), c = std::cos(a.v_);
        return a.compose(c, -s, -c, s);
    }

    friend jet tan(const jet& a) {
        const double w = std::tan(a.v_);
        const double q = 1.0 + w * w;  // sec^2
        return a.compose(w, q, 2.0 * w * q, 2.0 * q * (1.0 + 3.0 * w * w));
    }

    friend jet exp(const jet& a) {
        const double e = std::exp(a.v_);
        return a.compose(e, e, e, e);
    }

    friend jet log(const jet& a) {
        const double v = a.v_;
        if (v <= 0.0) throw eval_domain_error("log of a non-positive value");
        const double w = 1.0 / v;
        return a.compose(std::log(v), w, -w * w, 2.0 * w * w * w);
    }

    friend jet sqrt(const jet& a) {
        const double v = a.v_;
        if (v < 0.0 || (v == 0.0 && a.order_ >= 1))
            throw eval_domain_error("sqrt of a non-positive value");
        const double s = std::sqrt(v);
        const double w = (v == 0.0) ? 0.0 : 1.0 / v;
        return a.compose(s, 0.5 * s * w, -0.25 * s * w * w, 0.375 * s * w * w * w);
    }

    friend jet atan(const jet& a) {
        const double v = a.v_;
        const double q = 1.0 / (1.0 + v * v);
        return a.compose(std::atan(v), q, -2.0 * v * q * q,
                         (6.0 * v * v - 2.0) * q * q * q);
    }

    /// Integer power; negative exponents go through the reciprocal.
    friend jet pow(const jet& a, int e) {
        if (e < 0) return reciprocal(pow(a, -e));
        jet r = constant(1.0, a.dim_, a.order_);
        jet base = a;
        for (int k = e; k > 0; k >>= 1) {
            if (k & 1) r = r * base;
            if (k > 1) base = base * base;
        }
        return r;
    }

private:
    jet(int dim, int order) : dim_(dim), order_(order) {
        if (dim < 0 || dim > kMaxJetVars)
            throw dimension_error("jet dimension " + std::to_string(dim) +
                                  " out of range [0, " + std::to_string(kMaxJetVars) + "]");
        assert(order >= 0 && order <= 3);
        g_.fill(0.0);
        h_.fill(0.0);
        t_.fill(0.0);
    }

    static std::size_t idx1(int i) noexcept { return static_cast<std::size_t>(i); }
    static std::size_t idx2(int i, int j) noexcept {
        return static_cast<std::size_t>(i * kMaxJetVars + j);
    }
    static std::size_t idx3(int i, int j, int k) noexcept {
        return static_cast<std::size_t>((i * kMaxJetVars + j) * kMaxJetVars + k);
    }

    /// Write a second-derivative entry to both index orders.
    void set2(int i, int j, double x) noexcept {
        h_[idx2(i, j)] = x;
        h_[idx2(j, i)] = x;
    }

    /// Write a third-derivative entry to all six permutations.
    void set3(int i, int j, int k, double x) noexcept {
        t_[idx3(i, j, k)] = x;
        t_[idx3(i, k, j)] = x;
        t_[idx3(j, i, k)] = x;
        t_[idx3(j, k, i)] = x;
        t_[idx3(k, i, j)] = x;
        t_[idx3(k, j, i)] = x;
    }

    static std::pair<int, int> joined(const jet& a, const jet& b) {
        if (a.dim_ != b.dim_)
            throw dimension_error("jet arithmetic on mismatched dimensions " +
                                  std::to_string(a.dim_) + " and " + std::to_string(b.dim_));
        return {a.dim_, std::min(a.order_, b.order_)};
    }

    /// r.deriv = op(a.deriv) elementwise, for same-shape unary maps.
    template <class F>
    void for_each_deriv(const jet& a, F op) noexcept {
        const int n = dim_;
        if (order_ >= 1)
            for (int i = 0; i < n; ++i) g_[idx1(i)] = op(a.g_[idx1(i)]);
        if (order_ >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) set2(i, j, op(a.h_[idx2(i, j)]));
        if (order_ >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    for (int k = j; k < n; ++k) set3(i, j, k, op(a.t_[idx3(i, j, k)]));
    }

    /// r.deriv = op(a.deriv, b.deriv) elementwise.
    template <class F>
    void zip(const jet& a, const jet& b, F op) noexcept {
        const int n = dim_;
        if (order_ >= 1)
            for (int i = 0; i < n; ++i) g_[idx1(i)] = op(a.g_[idx1(i)], b.g_[idx1(i)]);
        if (order_ >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) set2(i, j, op(a.h_[idx2(i, j)], b.h_[idx2(i, j)]));
        if (order_ >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    for (int k = j; k < n; ++k)
                        set3(i, j, k, op(a.t_[idx3(i, j, k)], b.t_[idx3(i, j, k)]));
    }

    int dim_ = 0;
    int order_ = 0;
    double v_ = 0.0;
    std::array<double, kMaxJetVars> g_{};
    std::array<double, kMaxJetVars * kMaxJetVars> h_{};
    std::array<double, kMaxJetVars * kMaxJetVars * kMaxJetVars> t_{};
};

}  // namespace camb
