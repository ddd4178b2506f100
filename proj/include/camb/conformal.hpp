#pragma once
/// \file conformal.hpp
/// \brief Conformal rescaling, the Schouten tensor, Moebius structures with
///        their transformation law, and the Cotton-York tensor.
///
/// A Moebius structure pairs a metric g with a symmetric bilinear form P(g)
/// obeying the trace condition trace_g P = scal / (2(n-1)).  Changing the
/// representative to e^{2u} g transforms the form by
///
///     P(e^{2u}g) = P(g) - (|∇u|²/2) g - Hess(u) + du⊗du,
///
/// and the Cotton-York tensor of the structure is
///
///     C(U,V,W) = g( (∇_U P̂)V - (∇_V P̂)U , W ),    P̂ = g⁻¹ P.
///
/// The base tensor is stored as a jet source (point, order) -> jets of P_ij
/// rather than as expression components: forms produced by the transformation
/// law (which involves a Christoffel-dependent Hessian) or by differentiating
/// a metric family are available as jets but not as closed-form expressions.
/// Index raising happens pointwise through the jet-valued inverse of g; the
/// metric is never inverted symbolically.

#include "camb/curvature.hpp"

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace camb {

// ----- conformal representatives -----------------------------------------------

/// A representative e^{2u} g of a conformal class, stored as the base metric
/// g together with the logarithmic factor u.
struct conformal_rep {
    metric_field base_metric;
    scalar_field log_factor;
};

inline conformal_rep make_conformal_rep(metric_field g, scalar_field u) {
    if (g.on != u.on)
        throw dimension_error("conformal representative: metric and factor live on different charts");
    return conformal_rep{std::move(g), std::move(u)};
}

/// The metric e^{2u} g with expression-level components, ready for any
/// downstream operator (curvature, jets, ...).
inline metric_field rescale_metric(const metric_field& g, const scalar_field& u) {
    if (g.on != u.on)
        throw dimension_error("rescale_metric: metric and factor live on different charts");
    const int n = g.dim();
    const scalar_field factor = field_exp(2.0 * u);
    std::vector<scalar_field> comp;
    comp.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) comp.push_back(factor * g.at(i, j));
    return make_metric_field(g.on, g.signature, comp);
}

inline metric_field rescale_metric(const conformal_rep& rep) {
    return rescale_metric(rep.base_metric, rep.log_factor);
}

// ----- Schouten tensor ----------------------------------------------------------

/// Jets of the form P_ij = (Ric_ij - scal g_ij / (2(n-1))) / (n-2) at order
/// mj.order - 2.  Defined for n >= 3 only.
inline std::vector<jet> schouten_jets(const metric_jets& mj) {
    const int n = mj.n;
    if (n < 3) throw dimension_error("Schouten tensor requires dimension >= 3");
    const std::vector<jet> ric = ricci_jets(mj);
    const jet scal = scalar_curvature_jet(mj);
    const double trace_coef = 1.0 / (2.0 * (n - 1));
    const double norm_coef = 1.0 / (n - 2);
    std::vector<jet> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.push_back((ric[static_cast<std::size_t>(i * n + j)] -
                           scal * trace_coef * mj.G(i, j)) *
                          norm_coef);
    return out;
}

/// Schouten tensor components at a point, row-major n×n.
inline std::vector<double> schouten(const metric_field& g, const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 2);
    const std::vector<jet> pj = schouten_jets(mj);
    std::vector<double> out;
    out.reserve(pj.size());
    for (const jet& e : pj) out.push_back(e.value());
    return out;
}

// ----- Moebius structures -------------------------------------------------------

/// Source of jets for a symmetric (0,2) tensor: called with a point and a
/// requested jet order, returns the n² component jets row-major.
using sym2_jet_fn = std::function<std::vector<jet>(const point&, int)>;

/// A metric together with a compatible symmetric form P(g).  The form is
/// held as a jet source; see the header comment for why.
struct moebius_structure {
    metric_field base_metric;
    sym2_jet_fn base_tensor;
};

/// Wrap expression components into a Moebius structure.  The source
/// symmetrizes, so the symmetry invariant holds structurally.
inline moebius_structure make_moebius_structure(const metric_field& g, const tensor_field& p0) {
    if (g.on != p0.on)
        throw dimension_error("Moebius structure: metric and form live on different charts");
    if (p0.rank_up != 0 || p0.rank_down != 2)
        throw dimension_error("Moebius structure: base form must be a (0,2) tensor");
    const int n = g.dim();
    sym2_jet_fn source = [p0, n](const point& p, int order) {
        std::vector<jet> out;
        out.reserve(static_cast<std::size_t>(n * n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.push_back(0.5 * (eval_jet(p0.at(i, j), p, order) +
                                     eval_jet(p0.at(j, i), p, order)));
        return out;
    };
    return moebius_structure{g, std::move(source)};
}

/// The canonical structure P(g) = Schouten tensor, n >= 3.
inline moebius_structure moebius_from_schouten(const metric_field& g) {
    if (g.dim() < 3)
        throw dimension_error("canonical Moebius structure requires dimension >= 3");
    sym2_jet_fn source = [g](const point& p, int order) {
        return schouten_jets(eval_metric_jets(g, p, order + 2));
    };
    return moebius_structure{g, std::move(source)};
}

/// Worst sampled violation of the trace condition
/// trace_g P = scal / (2(n-1)) over the given points.
inline double moebius_trace_defect(const moebius_structure& m, const std::vector<point>& pts) {
    const int n = m.base_metric.dim();
    double worst = 0.0;
    for (const point& p : pts) {
        const metric_jets mj = eval_metric_jets(m.base_metric, p, 2);
        const std::vector<jet> pj = m.base_tensor(p, 0);
        double tr = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                tr += mj.Ginv(i, j).value() * pj[static_cast<std::size_t>(i * n + j)].value();
        const double target = scalar_curvature_jet(mj).value() / (2.0 * (n - 1));
        worst = std::max(worst, std::abs(tr - target));
    }
    return worst;
}

// ----- conformal transformation law ----------------------------------------------

namespace detail {

/// Jets of P(e^{2u}g) = P0 - (|∇u|²/2) g - Hess(u) + du⊗du at the requested
/// order (0 or 1; the Hessian consumes two derivative slots of the budget).
inline std::vector<jet> transformed_p_jets(const metric_field& g, const sym2_jet_fn& p0,
                                           const scalar_field& u, const point& p, int order) {
    if (order < 0 || order > 1)
        throw error("transformed Moebius form: jets available at orders 0 and 1 only");
    const int n = g.dim();
    const metric_jets mj = eval_metric_jets(g, p, order + 1);
    const jet uj = eval_jet(u, p, order + 2);
    const std::vector<jet> hess = hessian_jets(mj, uj);
    const jet half_grad_sq = 0.5 * grad_norm_sq_jet(mj, uj);
    const std::vector<jet> base = p0(p, order);
    std::vector<jet> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.push_back(base[static_cast<std::size_t>(i * n + j)] -
                          half_grad_sq * mj.G(i, j) -
                          hess[static_cast<std::size_t>(i * n + j)] +
                          uj.partial(i) * uj.partial(j));
    return out;
}

}  // namespace detail

/// Components of P(e^{2u}g) at p, row-major n×n.
inline std::vector<double> moebius_transform(const moebius_structure& m, const scalar_field& u,
                                             const point& p) {
    if (m.base_metric.on != u.on)
        throw dimension_error("moebius_transform: factor lives on a different chart");
    const std::vector<jet> pj = detail::transformed_p_jets(m.base_metric, m.base_tensor, u, p, 0);
    std::vector<double> out;
    out.reserve(pj.size());
    for (const jet& e : pj) out.push_back(e.value());
    return out;
}

/// The structure (e^{2u} g, P(e^{2u}g)) as a first-class object, so that
/// transformations compose and the Cotton-York tensor of the rescaled
/// representative can be evaluated.
inline moebius_structure transform_structure(const moebius_structure& m, const scalar_field& u) {
    if (m.base_metric.on != u.on)
        throw dimension_error("transform_structure: factor lives on a different chart");
    const metric_field g0 = m.base_metric;
    const sym2_jet_fn p0 = m.base_tensor;
    sym2_jet_fn source = [g0, p0, u](const point& p, int order) {
        return detail::transformed_p_jets(g0, p0, u, p, order);
    };
    return moebius_structure{rescale_metric(g0, u), std::move(source)};
}

/// Cocycle defect of the transformation law at p: rescaling by u1 and then by
/// u2 (under the rescaled metric) must agree with rescaling by u1 + u2.
/// Returns the max-abs component difference.
inline double cocycle_check(const moebius_structure& m, const scalar_field& u1,
                            const scalar_field& u2, const point& p) {
    const std::vector<double> two_step = moebius_transform(transform_structure(m, u1), u2, p);
    const std::vector<double> direct = moebius_transform(m, u1 + u2, p);
    double worst = 0.0;
    for (std::size_t k = 0; k < direct.size(); ++k)
        worst = std::max(worst, std::abs(two_step[k] - direct[k]));
    return worst;
}

// ----- Cotton-York tensor ---------------------------------------------------------

namespace detail {

/// C[u][v][w] = g( (∇_u P̂)∂_v - (∇_v P̂)∂_u , ∂_w ) from metric jets
/// (order >= 2) and jets of P (order >= 1).  Antisymmetry in (u,v) is
/// structural: entries are computed for u < v and mirrored with a sign.
inline std::vector<double> cotton_from_jets(const metric_jets& mj, const std::vector<jet>& pj) {
    const int n = mj.n;
    // P̂^i_j = g^{im} P_mj as jets of order >= 1.
    std::vector<jet> phat;
    phat.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            jet s = mj.Ginv(i, 0) * pj[static_cast<std::size_t>(j)];
            for (int msum = 1; msum < n; ++msum)
                s += mj.Ginv(i, msum) * pj[static_cast<std::size_t>(msum * n + j)];
            phat.push_back(s);
        }
    auto ph = [&](int i, int j) -> const jet& { return phat[static_cast<std::size_t>(i * n + j)]; };
    // cov[u][i][v] = (∇_u P̂)^i_v
    std::vector<double> cov(static_cast<std::size_t>(n * n * n));
    for (int u = 0; u < n; ++u)
        for (int i = 0; i < n; ++i)
            for (int v = 0; v < n; ++v) {
                double s = ph(i, v).d1(u);
                for (int msum = 0; msum < n; ++msum)
                    s += mj.Gamma(i, u, msum).value() * ph(msum, v).value() -
                         mj.Gamma(msum, u, v).value() * ph(i, msum).value();
                cov[static_cast<std::size_t>((u * n + i) * n + v)] = s;
            }
    std::vector<double> c(static_cast<std::size_t>(n * n * n), 0.0);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            for (int w = 0; w < n; ++w) {
                double s = 0.0;
                for (int i = 0; i < n; ++i)
                    s += mj.G(w, i).value() *
                         (cov[static_cast<std::size_t>((u * n + i) * n + v)] -
                          cov[static_cast<std::size_t>((v * n + i) * n + u)]);
                c[static_cast<std::size_t>((u * n + v) * n + w)] = s;
                c[static_cast<std::size_t>((v * n + u) * n + w)] = -s;
            }
    return c;
}

}  // namespace detail

/// All Cotton-York components C(∂_u, ∂_v, ∂_w) of a structure at p,
/// layout [u][v][w].
inline std::vector<double> cotton_york_components(const moebius_structure& m, const point& p) {
    const metric_jets mj = eval_metric_jets(m.base_metric, p, 2);
    const std::vector<jet> pj = m.base_tensor(p, 1);
    return detail::cotton_from_jets(mj, pj);
}

/// Convenience overload for the canonical (Schouten) structure, n >= 3.
inline std::vector<double> cotton_york_components(const metric_field& g, const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 3);
    return detail::cotton_from_jets(mj, schouten_jets(mj));
}

/// C(U, V, W) for coordinate-frame component vectors U, V, W.
inline double cotton_york(const moebius_structure& m, const point& p,
                          const std::vector<double>& U, const std::vector<double>& V,
                          const std::vector<double>& W) {
    const int n = m.base_metric.dim();
    if (static_cast<int>(U.size()) != n || static_cast<int>(V.size()) != n ||
        static_cast<int>(W.size()) != n)
        throw dimension_error("cotton_york: frame vector size does not match chart dimension");
    const std::vector<double> c = cotton_york_components(m, p);
    double s = 0.0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            for (int w = 0; w < n; ++w)
                s += c[static_cast<std::size_t>((u * n + v) * n + w)] *
                     U[static_cast<std::size_t>(u)] * V[static_cast<std::size_t>(v)] *
                     W[static_cast<std::size_t>(w)];
    return s;
}

}  // namespace camb
