#pragma once

/// \file curvature.hpp
/// \brief Levi-Civita connection and curvature operators.
///
/// Sign and index conventions, fixed once for the whole library:
///
///   R(X, Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_[X,Y] Z
///
///   riemann[a][b][c][d] = a-th component of R(∂_c, ∂_d) ∂_b
///                       = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb}
///                       + Γ^a_{cm} Γ^m_{db} − Γ^a_{dm} Γ^m_{cb}
///
///   ricci[b][d] = Σ_a riemann[a][b][a][d]
///
///   K(v, w) = g(R(v, w) w, v) / (|v|² |w|² − g(v, w)²)
///
/// With these choices the unit round sphere has K = +1, Ric = (n−1) g and
/// scal = n(n−1).  Antisymmetry in the last two slots is enforced
/// structurally: entries are computed once for c < d and mirrored with a
/// sign, so riemann[a][b][d][c] == -riemann[a][b][c][d] holds bit-exactly.

#include <cmath>
#include <string>
#include <vector>

#include "camb/chart.hpp"
#include "camb/errors.hpp"
#include "camb/expression.hpp"
#include "camb/jet.hpp"
#include "camb/linalg.hpp"
#include "camb/metric.hpp"

namespace camb {

// ----- jet-valued assemblies -------------------------------------------------
//
// These keep derivatives alive for operators that need to differentiate
// curvature again (Schouten/Cotton pipelines).  Entry orders drop by one
// per derivative taken: with metric jets of order 3, Christoffels have
// order 2, curvature order 1.

/// Riemann tensor entries as jets, layout [a][b][c][d].
/// \pre mj.order >= 2
inline std::vector<jet> riemann_jets(const metric_jets& mj) {
    const int n = mj.n;
    const int ro = mj.order - 2;
    std::vector<jet> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                             static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                         jet::constant(0.0, n, ro));
    auto put = [&](int a, int b, int c, int d, const jet& v) {
        out[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)] = v;
    };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = c + 1; d < n; ++d) {
                    jet r = mj.Gamma(a, d, b).partial(c) - mj.Gamma(a, c, b).partial(d);
                    for (int m = 0; m < n; ++m)
                        r += mj.Gamma(a, c, m) * mj.Gamma(m, d, b) -
                             mj.Gamma(a, d, m) * mj.Gamma(m, c, b);
                    put(a, b, c, d, r);
                    put(a, b, d, c, -r);
                }
    return out;
}

/// Ricci tensor as jets, layout [b][d]; Ric_{bd} = R^a_{b a d}.
/// \pre mj.order >= 2
inline std::vector<jet> ricci_jets(const metric_jets& mj) {
    const int n = mj.n;
    const std::vector<jet> riem = riemann_jets(mj);
    std::vector<jet> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                         jet::constant(0.0, n, mj.order - 2));
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
            jet s = jet::constant(0.0, n, mj.order - 2);
            for (int a = 0; a < n; ++a)
                s += riem[static_cast<std::size_t>(((a * n + b) * n + a) * n + d)];
            out[static_cast<std::size_t>(b * n + d)] = s;
        }
    return out;
}

/// Scalar curvature as a jet: scal = g^{bd} Ric_{bd}.
/// \pre mj.order >= 2
inline jet scalar_curvature_jet(const metric_jets& mj) {
    const int n = mj.n;
    const std::vector<jet> ric = ricci_jets(mj);
    jet s = jet::constant(0.0, n, mj.order - 2);
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d)
            s += mj.Ginv(b, d) * ric[static_cast<std::size_t>(b * n + d)];
    return s;
}

/// Covariant Hessian of a scalar with jets: (∇²u)_{ij} = u_{ij} − Γ^k_{ij} u_k.
/// `u` must be a jet at the same point with order >= 2.
inline std::vector<jet> hessian_jets(const metric_jets& mj, const jet& u) {
    const int n = mj.n;
    std::vector<jet> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            jet h = u.partial(i).partial(j);
            for (int k = 0; k < n; ++k) h -= mj.Gamma(k, i, j) * u.partial(k);
            out.push_back(h);
        }
    return out;
}

/// Contravariant gradient with jets: (∇u)^i = g^{ij} u_j.
inline std::vector<jet> gradient_jets(const metric_jets& mj, const jet& u) {
    const int n = mj.n;
    std::vector<jet> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        jet s = jet::constant(0.0, n, u.order() - 1);
        for (int j = 0; j < n; ++j) s += mj.Ginv(i, j) * u.partial(j);
        out.push_back(s);
    }
    return out;
}

/// |∇u|² = g^{ij} u_i u_j as a jet.
inline jet grad_norm_sq_jet(const metric_jets& mj, const jet& u) {
    const int n = mj.n;
    jet s = jet::constant(0.0, n, u.order() - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += mj.Ginv(i, j) * u.partial(i) * u.partial(j);
    return s;
}

/// Δu = g^{ij} (∇²u)_{ij} as a jet.
inline jet laplacian_jet(const metric_jets& mj, const jet& u) {
    const int n = mj.n;
    const std::vector<jet> hess = hessian_jets(mj, u);
    jet s = jet::constant(0.0, n, u.order() - 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s += mj.Ginv(i, j) * hess[static_cast<std::size_t>(i * n + j)];
    return s;
}

// ----- point-value operators --------------------------------------------------

/// Christoffel symbols Γ^k_{ij} at p, layout [k][i][j].  Symmetry in the
/// lower pair is structural (computed once per unordered pair).
inline std::vector<double> christoffel(const metric_field& g, const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 1);
    const int n = mj.n;
    std::vector<double> out;
    out.reserve(mj.gamma.size());
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.push_back(mj.Gamma(k, i, j).value());
    return out;
}

/// Riemann, Ricci and scalar curvature at a point.
struct curvature_slice {
    int n = 0;
    std::vector<double> riemann;  ///< [a][b][c][d], antisymmetric in (c, d)
    std::vector<double> ricci;    ///< [b][d]
    double scalar = 0.0;

    double riem(int a, int b, int c, int d) const {
        return riemann[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)];
    }
    double ric(int b, int d) const { return ricci[static_cast<std::size_t>(b * n + d)]; }
};

inline curvature_slice riemann(const metric_field& g, const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 2);
    const std::vector<jet> riem = riemann_jets(mj);
    const std::vector<jet> ric = ricci_jets(mj);
    const int n = mj.n;

    curvature_slice out;
    out.n = n;
    out.riemann.reserve(riem.size());
    for (const jet& j : riem) out.riemann.push_back(j.value());
    out.ricci.reserve(ric.size());
    for (const jet& j : ric) out.ricci.push_back(j.value());
    out.scalar = 0.0;
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d)
            out.scalar += mj.Ginv(b, d).value() * out.ric(b, d);
    return out;
}

inline std::vector<double> ricci(const metric_field& g, const point& p) {
    return riemann(g, p).ricci;
}

inline double scalar_curvature(const metric_field& g, const point& p) {
    return riemann(g, p).scalar;
}

/// Sectional curvature of span{v, w}.  Throws degenerate_plane_error when
/// the plane's Gram determinant vanishes (relative floor 1e-10).
inline double sectional_curvature(const metric_field& g, const point& p,
                                  const std::vector<double>& v, const std::vector<double>& w) {
    const int n = g.dim();
    if (static_cast<int>(v.size()) != n || static_cast<int>(w.size()) != n)
        throw dimension_error("sectional_curvature: vector dimension mismatch");
    const std::vector<double> gv = metric_values(g, p);
    auto ip = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += gv[static_cast<std::size_t>(i * n + j)] * a[static_cast<std::size_t>(i)] *
                     b[static_cast<std::size_t>(j)];
        return s;
    };
    const double vv = ip(v, v), ww = ip(w, w), vw = ip(v, w);
    const double gram = vv * ww - vw * vw;
    if (std::abs(gram) <= 1e-10 * std::max(1.0, std::abs(vv) * std::abs(ww)))
        throw degenerate_plane_error("sectional curvature of a degenerate plane");

    const curvature_slice cs = riemann(g, p);
    // numerator g(R(v, w) w, v): R(v,w)w has components R^a_{bcd} w^b v^c w^d.
    double num = 0.0;
    for (int a = 0; a < n; ++a) {
        double comp = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    comp += cs.riem(a, b, c, d) * w[static_cast<std::size_t>(b)] *
                            v[static_cast<std::size_t>(c)] * w[static_cast<std::size_t>(d)];
        for (int e = 0; e < n; ++e)
            num += gv[static_cast<std::size_t>(e * n + a)] * v[static_cast<std::size_t>(e)] * comp;
    }
    return num / gram;
}

/// Contravariant gradient (∇u)^i at p.
inline std::vector<double> gradient(const metric_field& g, const scalar_field& u,
                                    const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 1);
    const jet uj = eval_jet(u, p, 1);
    std::vector<double> out(static_cast<std::size_t>(mj.n), 0.0);
    for (int i = 0; i < mj.n; ++i)
        for (int j = 0; j < mj.n; ++j)
            out[static_cast<std::size_t>(i)] += mj.Ginv(i, j).value() * uj.d1(j);
    return out;
}

/// Covariant Hessian (∇²u)_{ij} at p, layout [i][j].
inline std::vector<double> hessian(const metric_field& g, const scalar_field& u,
                                   const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 2);
    const jet uj = eval_jet(u, p, 2);
    const std::vector<jet> hj = hessian_jets(mj, uj);
    std::vector<double> out;
    out.reserve(hj.size());
    for (const jet& j : hj) out.push_back(j.value());
    return out;
}

inline double laplacian(const metric_field& g, const scalar_field& u, const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 2);
    return laplacian_jet(mj, eval_jet(u, p, 2)).value();
}

inline double grad_norm_sq(const metric_field& g, const scalar_field& u, const point& p) {
    const metric_jets mj = eval_metric_jets(g, p, 1);
    return grad_norm_sq_jet(mj, eval_jet(u, p, 1)).value();
}

/// Lie derivative of the metric along a (1,0) vector field X:
/// (L_X g)_{ij} = X^k ∂_k g_{ij} + g_{kj} ∂_i X^k + g_{ik} ∂_j X^k.
inline std::vector<double> lie_derivative_metric(const metric_field& g, const tensor_field& X,
                                                 const point& p) {
    if (X.rank_up != 1 || X.rank_down != 0)
        throw dimension_error("lie_derivative_metric expects a (1,0) vector field");
    if (X.on != g.on) throw dimension_error("vector field chart differs from metric chart");
    const int n = g.dim();
    std::vector<jet> gj, xj;
    gj.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gj.push_back(eval_jet(g.at(i, j), p, 1));
    xj.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xj.push_back(eval_jet(X.at(i), p, 1));

    std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                s += xj[static_cast<std::size_t>(k)].value() *
                     gj[static_cast<std::size_t>(i * n + j)].d1(k);
                s += gj[static_cast<std::size_t>(k * n + j)].value() *
                     xj[static_cast<std::size_t>(k)].d1(i);
                s += gj[static_cast<std::size_t>(i * n + k)].value() *
                     xj[static_cast<std::size_t>(k)].d1(j);
            }
            out[static_cast<std::size_t>(i * n + j)] = s;
        }
    return out;
}

/// Covariant derivative of a (1,0), (0,2) or (1,1) tensor field at p.
/// Output layout puts the new covariant slot first:
///   (1,0):  out[k][i]   = ∇_k X^i
///   (0,2):  out[k][i][j] = ∇_k T_{ij}
///   (1,1):  out[k][i][j] = ∇_k P^i_{j}
inline std::vector<double> covariant_derivative_tensor(const metric_field& g,
                                                       const tensor_field& T, const point& p) {
    if (T.on != g.on) throw dimension_error("tensor chart differs from metric chart");
    const int n = g.dim();
    const metric_jets mj = eval_metric_jets(g, p, 1);
    auto Gam = [&](int k, int i, int j) { return mj.Gamma(k, i, j).value(); };

    std::vector<jet> tj;
    tj.reserve(T.comp.size());
    for (const auto& f : T.comp) tj.push_back(eval_jet(f, p, 1));

    if (T.rank_up == 1 && T.rank_down == 0) {
        std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) {
                double s = tj[static_cast<std::size_t>(i)].d1(k);
                for (int m = 0; m < n; ++m)
                    s += Gam(i, k, m) * tj[static_cast<std::size_t>(m)].value();
                out[static_cast<std::size_t>(k * n + i)] = s;
            }
        return out;
    }
    if (T.rank_up == 0 && T.rank_down == 2) {
        std::vector<double> out(static_cast<std::size_t>(n * n * n), 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = tj[static_cast<std::size_t>(i * n + j)].d1(k);
                    for (int m = 0; m < n; ++m)
                        s -= Gam(m, k, i) * tj[static_cast<std::size_t>(m * n + j)].value() +
                             Gam(m, k, j) * tj[static_cast<std::size_t>(i * n + m)].value();
                    out[static_cast<std::size_t>((k * n + i) * n + j)] = s;
                }
        return out;
    }
    if (T.rank_up == 1 && T.rank_down == 1) {
        std::vector<double> out(static_cast<std::size_t>(n * n * n), 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = tj[static_cast<std::size_t>(i * n + j)].d1(k);
                    for (int m = 0; m < n; ++m)
                        s += Gam(i, k, m) * tj[static_cast<std::size_t>(m * n + j)].value() -
                             Gam(m, k, j) * tj[static_cast<std::size_t>(i * n + m)].value();
                    out[static_cast<std::size_t>((k * n + i) * n + j)] = s;
                }
        return out;
    }
    throw dimension_error("covariant_derivative_tensor supports (1,0), (0,2) and (1,1) fields");
}

}  // namespace camb
