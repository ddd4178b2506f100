#pragma once

/// \file metric.hpp
/// \brief Metric and tensor fields on a chart, and their jet bundles.
///
/// Components are expression-backed scalar fields, so jets of the metric
/// are exact to roundoff at any supported order.  eval_metric_jets bundles
/// everything downstream operators need at a point: component jets, the
/// inverse metric (with derivatives, via jet-valued Gauss-Jordan), and
/// Christoffel symbols one order lower.

#include <string>
#include <vector>

#include "camb/chart.hpp"
#include "camb/errors.hpp"
#include "camb/expression.hpp"
#include "camb/jet.hpp"
#include "camb/linalg.hpp"

namespace camb {

enum class signature_kind { riemannian, lorentzian };

/// Symmetric (0,2) metric field with a declared signature.
struct metric_field {
    chart_ptr on;
    signature_kind signature = signature_kind::riemannian;
    std::vector<scalar_field> comp;  ///< n*n, row-major, symmetric

    int dim() const noexcept { return on ? on->dim() : 0; }
    const scalar_field& at(int i, int j) const {
        return comp[static_cast<std::size_t>(i * dim() + j)];
    }
};

/// Build a metric from a full row-major component list.  The caller is
/// responsible for supplying a symmetric family (builders in this library
/// always do); sampled symmetry is validated by scenario loading.
inline metric_field make_metric_field(chart_ptr c, signature_kind s,
                                      std::vector<scalar_field> comps) {
    const int n = c->dim();
    if (static_cast<int>(comps.size()) != n * n)
        throw dimension_error("metric on chart '" + c->name + "' needs " +
                              std::to_string(n * n) + " components, got " +
                              std::to_string(comps.size()));
    for (const auto& f : comps)
        if (f.on != c)
            throw dimension_error("metric component lives on a different chart than '" +
                                  c->name + "'");
    return metric_field{std::move(c), s, std::move(comps)};
}

/// Diagonal shortcut: off-diagonal entries are the zero field.
inline metric_field make_diagonal_metric(chart_ptr c, signature_kind s,
                                         std::vector<scalar_field> diag) {
    const int n = c->dim();
    if (static_cast<int>(diag.size()) != n)
        throw dimension_error("diagonal metric needs one entry per coordinate");
    std::vector<scalar_field> comps;
    comps.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            comps.push_back(i == j ? diag[static_cast<std::size_t>(i)]
                                   : field_constant(c, 0.0));
    return make_metric_field(std::move(c), s, std::move(comps));
}

/// General tensor field with `rank_up` contravariant and `rank_down`
/// covariant slots; components indexed row-major, upper slots first.
struct tensor_field {
    chart_ptr on;
    int rank_up = 0;
    int rank_down = 0;
    std::vector<scalar_field> comp;

    int dim() const noexcept { return on ? on->dim() : 0; }
    int rank() const noexcept { return rank_up + rank_down; }

    const scalar_field& at(int i) const { return comp[static_cast<std::size_t>(i)]; }
    const scalar_field& at(int i, int j) const {
        return comp[static_cast<std::size_t>(i * dim() + j)];
    }
};

inline tensor_field make_tensor_field(chart_ptr c, int rank_up, int rank_down,
                                      std::vector<scalar_field> comps) {
    const int n = c->dim();
    std::size_t expect = 1;
    for (int r = 0; r < rank_up + rank_down; ++r) expect *= static_cast<std::size_t>(n);
    if (comps.size() != expect)
        throw dimension_error("tensor field needs " + std::to_string(expect) +
                              " components, got " + std::to_string(comps.size()));
    for (const auto& f : comps)
        if (f.on != c) throw dimension_error("tensor component on a different chart");
    return tensor_field{std::move(c), rank_up, rank_down, std::move(comps)};
}

/// Everything an operator needs about a metric at one point:
/// component jets of order `order`, inverse-metric jets of the same
/// order, and Christoffel symbols Γ^k_{ij} one order lower
/// (Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} - ∂_l g_{ij})).
struct metric_jets {
    int n = 0;
    int order = 0;
    std::vector<jet> g;      ///< n*n
    std::vector<jet> ginv;   ///< n*n
    std::vector<jet> gamma;  ///< n*n*n, [k][i][j], present when order >= 1

    const jet& G(int i, int j) const { return g[static_cast<std::size_t>(i * n + j)]; }
    const jet& Ginv(int i, int j) const { return ginv[static_cast<std::size_t>(i * n + j)]; }
    const jet& Gamma(int k, int i, int j) const {
        return gamma[static_cast<std::size_t>((k * n + i) * n + j)];
    }
};

inline metric_jets eval_metric_jets(const metric_field& gf, const point& p, int order) {
    const int n = gf.dim();
    metric_jets mj;
    mj.n = n;
    mj.order = order;
    mj.g.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mj.g.push_back(eval_jet(gf.at(i, j), p, order));

    std::string where = "metric on chart '" + gf.on->name + "' at (";
    for (int i = 0; i < n; ++i) where += (i ? ", " : "") + std::to_string(p[i]);
    where += ")";
    mj.ginv = invert_matrix(mj.g, n, where);

    if (order >= 1) {
        mj.gamma.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                            static_cast<std::size_t>(n),
                        jet::constant(0.0, n, order - 1));
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    jet sum = jet::constant(0.0, n, order - 1);
                    for (int l = 0; l < n; ++l)
                        sum += mj.Ginv(k, l) *
                               (mj.G(j, l).partial(i) + mj.G(i, l).partial(j) -
                                mj.G(i, j).partial(l));
                    sum = 0.5 * sum;
                    mj.gamma[static_cast<std::size_t>((k * n + i) * n + j)] = sum;
                    mj.gamma[static_cast<std::size_t>((k * n + j) * n + i)] = sum;
                }
    }
    return mj;
}

/// Metric component values only (no derivatives), row-major.
inline std::vector<double> metric_values(const metric_field& gf, const point& p) {
    const int n = gf.dim();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.push_back(eval_value(gf.at(i, j), p));
    return out;
}

/// Check the declared signature at a point by eigenvalue signs.
/// Returns the smallest |eigenvalue| so callers can also police
/// near-degeneracy; throws nothing by itself.
inline bool signature_matches(const metric_field& gf, const point& p, double floor = 1e-10) {
    const int n = gf.dim();
    const sym_eigen eig = jacobi_eigen(metric_values(gf, p), n);
    int negatives = 0;
    for (double v : eig.values) {
        if (std::abs(v) < floor) return false;
        if (v < 0.0) ++negatives;
    }
    return gf.signature == signature_kind::riemannian ? negatives == 0 : negatives == 1;
}

}  // namespace camb
