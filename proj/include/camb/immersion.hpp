#pragma once
/// \file immersion.hpp
/// \brief Codimension-two spacelike immersions of the base into the ambient
///        product, their lightlike normal frames, Weingarten endomorphisms,
///        second fundamental form, mean curvature, normal connection, and
///        the recovery / Codazzi / sectional checks built on them.
///
/// The immersion attached to a scale factor u is
///
///     Ψ: x ↦ (e^{u(x)}, 0, x),       TΨ·V = V(u) e^u ∂t + V,
///
/// with induced metric e^{2u} g.  Its normal bundle is spanned by the
/// lightlike pair
///
///     ξ = e^u ∂t,
///     η = e^{−u} (‖∇u‖²/2) ∂t − e^{−2u} ∂ρ + e^{−2u} ∇u,
///
/// normalized to G(ξ,η) = −1, and tangential projection is exact through
/// the frame identity X^⊤ = X + G(X,ξ)η + G(X,η)ξ (orthogonal projection
/// would degenerate on lightlike directions).  Closed forms implemented
/// and cross-checked against the numeric ambient connection:
///
///     A_ξ = −Id,
///     A_η = e^{−2u} [ (α̇(0) − ‖∇u‖² Id)/2 + du ⊗ ∇u − ∇∇u ],
///     II(V,W) = −e^{2u} g(A_η V, W) ξ + e^{2u} g(V,W) η,
///     H = (e^{−2u}/n) (Δu − (tr α̇(0) − (n−2)‖∇u‖²)/2) ξ + η,
///     ‖H‖² = −2 · (ξ-coefficient of H).

#include "camb/ambient.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace camb {

// ----- immersion and frame ---------------------------------------------------------

struct spacelike_immersion {
    ambient_space space;      ///< ambient product this immersion maps into
    scalar_field log_factor;  ///< u, the logarithm of the scale coordinate
    int n = 0;
};

inline spacelike_immersion immerse(const ambient_space& a, const scalar_field& u) {
    if (u.on != a.base)
        throw dimension_error("immerse: scale factor must live on the base chart");
    return spacelike_immersion{a, u, a.n};
}

/// Image point Ψ(x) = (e^{u(x)}, 0, x) on the total chart.
inline point psi_point(const spacelike_immersion& im, const point& x) {
    return lift_point(im.space, std::exp(eval_value(im.log_factor, x)), 0.0, x);
}

/// Pushforward TΨ·V as an ambient vector at Ψ(x).
inline std::vector<double> differential(const spacelike_immersion& im, const point& x,
                                        const std::vector<double>& V) {
    const int n = im.n;
    if (static_cast<int>(V.size()) != n)
        throw dimension_error("differential: V must be a base vector");
    const jet uj = eval_jet(im.log_factor, x, 1);
    double vu = 0.0;
    for (int k = 0; k < n; ++k) vu += V[static_cast<std::size_t>(k)] * uj.d1(k);
    std::vector<double> out{std::exp(uj.value()) * vu, 0.0};
    out.insert(out.end(), V.begin(), V.end());
    return out;
}

/// Lightlike normal pair with G(ξ,ξ) = G(η,η) = 0 and G(ξ,η) = −1.
struct lightlike_frame {
    std::vector<double> xi;
    std::vector<double> eta;
};

inline lightlike_frame normal_frame(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const double u = eval_value(im.log_factor, x);
    const double eu = std::exp(u);
    const std::vector<double> grad = gradient(im.space.g, im.log_factor, x);
    const double q = grad_norm_sq(im.space.g, im.log_factor, x);

    lightlike_frame f;
    f.xi.assign(static_cast<std::size_t>(N), 0.0);
    f.xi[0] = eu;
    f.eta.assign(static_cast<std::size_t>(N), 0.0);
    f.eta[0] = 0.5 * q / eu;
    f.eta[1] = -1.0 / (eu * eu);
    for (int i = 0; i < n; ++i)
        f.eta[static_cast<std::size_t>(2 + i)] = grad[static_cast<std::size_t>(i)] / (eu * eu);
    return f;
}

namespace detail {

inline double lorentz_inner(const std::vector<double>& gv, const std::vector<double>& a,
                            const std::vector<double>& b) {
    const std::size_t N = a.size();
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) s += gv[i * N + j] * a[i] * b[j];
    return s;
}

}  // namespace detail

/// Tangential part through the frame identity X^⊤ = X + G(X,ξ)η + G(X,η)ξ.
inline std::vector<double> tangential_projection(const spacelike_immersion& im, const point& x,
                                                 const std::vector<double>& X) {
    const point p = psi_point(im, x);
    const std::vector<double> gv = metric_values(im.space.ambient, p);
    const lightlike_frame f = normal_frame(im, x);
    const double cx = detail::lorentz_inner(gv, X, f.xi);
    const double ce = detail::lorentz_inner(gv, X, f.eta);
    std::vector<double> out(X);
    for (std::size_t k = 0; k < X.size(); ++k) out[k] += cx * f.eta[k] + ce * f.xi[k];
    return out;
}

/// Normal part X^⊥ = −G(X,ξ)η − G(X,η)ξ.
inline std::vector<double> normal_projection(const spacelike_immersion& im, const point& x,
                                             const std::vector<double>& X) {
    const point p = psi_point(im, x);
    const std::vector<double> gv = metric_values(im.space.ambient, p);
    const lightlike_frame f = normal_frame(im, x);
    const double cx = detail::lorentz_inner(gv, X, f.xi);
    const double ce = detail::lorentz_inner(gv, X, f.eta);
    std::vector<double> out(X.size(), 0.0);
    for (std::size_t k = 0; k < X.size(); ++k) out[k] = -cx * f.eta[k] - ce * f.xi[k];
    return out;
}

/// Max-abs difference between the pulled-back ambient metric and e^{2u} g
/// over the coordinate basis at x.
inline double induced_metric_defect(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    const point p = psi_point(im, x);
    const std::vector<double> Gv = metric_values(im.space.ambient, p);
    const std::vector<double> gv = metric_values(im.space.g, x);
    const double e2u = std::exp(2.0 * eval_value(im.log_factor, x));
    std::vector<std::vector<double>> push;
    for (int k = 0; k < n; ++k) {
        std::vector<double> ek(static_cast<std::size_t>(n), 0.0);
        ek[static_cast<std::size_t>(k)] = 1.0;
        push.push_back(differential(im, x, ek));
    }
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const double got = detail::lorentz_inner(Gv, push[static_cast<std::size_t>(k)],
                                                     push[static_cast<std::size_t>(l)]);
            worst = std::max(worst,
                             std::abs(got - e2u * gv[static_cast<std::size_t>(k * n + l)]));
        }
    return worst;
}

// ----- derivatives along the map ---------------------------------------------------

namespace detail {

/// ξ components as jets in the base variables (order 1).
inline std::vector<jet> xi_jets(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const jet uj = eval_jet(im.log_factor, x, 1);
    std::vector<jet> out(static_cast<std::size_t>(N), jet::constant(0.0, n, 1));
    out[0] = exp(uj);
    return out;
}

/// η components as jets in the base variables (order 1).
inline std::vector<jet> eta_jets(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const jet uj = eval_jet(im.log_factor, x, 2);
    const metric_jets mj = eval_metric_jets(im.space.g, x, 1);
    const std::vector<jet> grad = gradient_jets(mj, uj);
    const jet q = grad_norm_sq_jet(mj, uj);
    const jet inv_eu = exp(-1.0 * uj);
    const jet inv_e2u = inv_eu * inv_eu;
    std::vector<jet> out(static_cast<std::size_t>(N), jet::constant(0.0, n, 1));
    out[0] = 0.5 * q * inv_eu;
    out[1] = -1.0 * inv_e2u;
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(2 + i)] = inv_e2u * grad[static_cast<std::size_t>(i)];
    return out;
}

/// Covariant derivative along the map of an ambient-component field given
/// as jets in the base variables: D^A = V^k ∂_k(comp^A) + Γ̃^A_{BC} (TΨ·V)^B comp^C.
inline std::vector<double> map_derivative(const spacelike_immersion& im, const point& x,
                                          const std::vector<double>& V,
                                          const std::vector<jet>& compj) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const point p = psi_point(im, x);
    const std::vector<double> gam = christoffel(im.space.ambient, p);
    const std::vector<double> push = differential(im, x, V);
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int A = 0; A < N; ++A) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            s += V[static_cast<std::size_t>(k)] * compj[static_cast<std::size_t>(A)].d1(k);
        for (int B = 0; B < N; ++B)
            for (int C = 0; C < N; ++C)
                s += gam[static_cast<std::size_t>((A * N + B) * N + C)] *
                     push[static_cast<std::size_t>(B)] *
                     compj[static_cast<std::size_t>(C)].value();
        out[static_cast<std::size_t>(A)] = s;
    }
    return out;
}

}  // namespace detail

// ----- Weingarten endomorphisms ----------------------------------------------------

enum class normal_direction { xi, eta };

/// Numeric Weingarten matrix A^i_k (column k = A(∂_k) in base components),
/// computed as A_ν(∂_k) = −(∇̃_{TΨ·∂_k} ν)^⊤ through the frame projector.
inline std::vector<double> weingarten(const spacelike_immersion& im, const point& x,
                                      normal_direction which) {
    const int n = im.n;
    const std::vector<jet> nuj =
        which == normal_direction::xi ? detail::xi_jets(im, x) : detail::eta_jets(im, x);
    std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
    for (int k = 0; k < n; ++k) {
        std::vector<double> ek(static_cast<std::size_t>(n), 0.0);
        ek[static_cast<std::size_t>(k)] = 1.0;
        const std::vector<double> D = detail::map_derivative(im, x, ek, nuj);
        const std::vector<double> tangent = tangential_projection(im, x, D);
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i * n + k)] = -tangent[static_cast<std::size_t>(2 + i)];
    }
    return out;
}

/// Closed-form A_η = e^{−2u} [ (α̇(0) − ‖∇u‖² Id)/2 + du ⊗ ∇u − ∇∇u ].
inline std::vector<double> weingarten_eta_closed(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    const metric_field& g = im.space.g;
    const std::vector<double> adot = alpha_dot_values(im.space.alpha, 0.0, x);
    const jet uj = eval_jet(im.log_factor, x, 2);
    const metric_jets mj = eval_metric_jets(g, x, 1);
    const std::vector<jet> gradj = gradient_jets(mj, uj);
    const std::vector<jet> hessj = hessian_jets(mj, uj);
    const double q = grad_norm_sq_jet(mj, uj).value();
    const double scale = std::exp(-2.0 * uj.value());

    std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double hess_up = 0.0;  // g^{im} (∇∇u)_{mk}
            for (int m = 0; m < n; ++m)
                hess_up += mj.Ginv(i, m).value() *
                           hessj[static_cast<std::size_t>(m * n + k)].value();
            double v = 0.5 * adot[static_cast<std::size_t>(i * n + k)];
            if (i == k) v -= 0.5 * q;
            v += gradj[static_cast<std::size_t>(i)].value() * uj.d1(k);
            v -= hess_up;
            out[static_cast<std::size_t>(i * n + k)] = scale * v;
        }
    return out;
}

// ----- second fundamental form and mean curvature ----------------------------------

/// Closed-form II(V,W) = −e^{2u} g(A_η V, W) ξ + e^{2u} g(V,W) η.
inline std::vector<double> second_fundamental_form(const spacelike_immersion& im, const point& x,
                                                   const std::vector<double>& V,
                                                   const std::vector<double>& W) {
    const int n = im.n;
    if (static_cast<int>(V.size()) != n || static_cast<int>(W.size()) != n)
        throw dimension_error("second_fundamental_form: V and W must be base vectors");
    const std::vector<double> A = weingarten_eta_closed(im, x);
    const std::vector<double> gv = metric_values(im.space.g, x);
    const double e2u = std::exp(2.0 * eval_value(im.log_factor, x));
    double g_av_w = 0.0, g_vw = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double av_i = 0.0;
            for (int k = 0; k < n; ++k)
                av_i += A[static_cast<std::size_t>(i * n + k)] * V[static_cast<std::size_t>(k)];
            g_av_w += gv[static_cast<std::size_t>(i * n + j)] * av_i *
                      W[static_cast<std::size_t>(j)];
            g_vw += gv[static_cast<std::size_t>(i * n + j)] * V[static_cast<std::size_t>(i)] *
                    W[static_cast<std::size_t>(j)];
        }
    const lightlike_frame f = normal_frame(im, x);
    std::vector<double> out(f.xi.size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = -e2u * g_av_w * f.xi[k] + e2u * g_vw * f.eta[k];
    return out;
}

/// Numeric II(V,W): normal part of ∇̃_{TΨ·V}(TΨ·W) with W extended
/// coordinate-constant.
inline std::vector<double> second_fundamental_form_numeric(const spacelike_immersion& im,
                                                           const point& x,
                                                           const std::vector<double>& V,
                                                           const std::vector<double>& W) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const jet uj = eval_jet(im.log_factor, x, 2);
    jet wu = jet::constant(0.0, n, 1);
    for (int k = 0; k < n; ++k) wu += W[static_cast<std::size_t>(k)] * uj.partial(k);
    std::vector<jet> pushj(static_cast<std::size_t>(N), jet::constant(0.0, n, 1));
    pushj[0] = exp(uj) * wu;
    for (int i = 0; i < n; ++i)
        pushj[static_cast<std::size_t>(2 + i)] =
            jet::constant(W[static_cast<std::size_t>(i)], n, 1);
    const std::vector<double> D = detail::map_derivative(im, x, V, pushj);
    return normal_projection(im, x, D);
}

/// Mean curvature H = (1/n) trace_{e^{2u}g} II in closed form, plus its
/// (Lorentzian) norm square ‖H‖² = −2 · (ξ-coefficient).
struct mean_curvature_result {
    std::vector<double> H;
    double norm_sq = 0.0;
};

inline mean_curvature_result mean_curvature(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    const metric_field& g = im.space.g;
    const jet uj = eval_jet(im.log_factor, x, 2);
    const metric_jets mj = eval_metric_jets(g, x, 2);
    const double lap = laplacian_jet(mj, uj).value();
    const double q = grad_norm_sq_jet(mj, uj).value();
    const std::vector<double> adot = alpha_dot_values(im.space.alpha, 0.0, x);
    double tr = 0.0;
    for (int k = 0; k < n; ++k) tr += adot[static_cast<std::size_t>(k * n + k)];
    const double a =
        std::exp(-2.0 * uj.value()) / n * (lap - 0.5 * (tr - (n - 2) * q));
    const lightlike_frame f = normal_frame(im, x);
    mean_curvature_result out;
    out.H.assign(f.xi.size(), 0.0);
    for (std::size_t k = 0; k < out.H.size(); ++k) out.H[k] = a * f.xi[k] + f.eta[k];
    out.norm_sq = -2.0 * a;
    return out;
}

// ----- normal connection ------------------------------------------------------------

/// Frame coefficients of (∇̃_{TΨ·V} ξ)^⊥ and (∇̃_{TΨ·V} η)^⊥; both vanish
/// because the frame is parallel in the normal bundle.  Returned as the
/// max-abs frame coefficient per normal direction.
inline std::pair<double, double> normal_connection_defect(const spacelike_immersion& im,
                                                          const point& x,
                                                          const std::vector<double>& V) {
    const point p = psi_point(im, x);
    const std::vector<double> gv = metric_values(im.space.ambient, p);
    const lightlike_frame f = normal_frame(im, x);
    auto frame_size = [&](const std::vector<double>& D) {
        const double cxi = -detail::lorentz_inner(gv, D, f.eta);  // ξ-coefficient of D^⊥
        const double ceta = -detail::lorentz_inner(gv, D, f.xi);  // η-coefficient of D^⊥
        return std::max(std::abs(cxi), std::abs(ceta));
    };
    const std::vector<double> Dxi = detail::map_derivative(im, x, V, detail::xi_jets(im, x));
    const std::vector<double> Deta = detail::map_derivative(im, x, V, detail::eta_jets(im, x));
    return {frame_size(Dxi), frame_size(Deta)};
}

/// Ricci-equation instantiation: |G(R̃(TΨ·V, TΨ·W)ξ, η) + e^{2u}g([A_ξ,A_η]V, W)|
/// with numeric Weingarten endomorphisms; vanishing normal curvature.
inline double normal_curvature_defect(const spacelike_immersion& im, const point& x,
                                      const std::vector<double>& V,
                                      const std::vector<double>& W) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const point p = psi_point(im, x);
    const curvature_slice cs = riemann(im.space.ambient, p);
    const std::vector<double> gv = metric_values(im.space.ambient, p);
    const lightlike_frame f = normal_frame(im, x);
    const std::vector<double> pv = differential(im, x, V);
    const std::vector<double> pw = differential(im, x, W);

    std::vector<double> rxi(static_cast<std::size_t>(N), 0.0);
    for (int A = 0; A < N; ++A) {
        double s = 0.0;
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c)
                for (int d = 0; d < N; ++d)
                    s += cs.riem(A, b, c, d) * f.xi[static_cast<std::size_t>(b)] *
                         pv[static_cast<std::size_t>(c)] * pw[static_cast<std::size_t>(d)];
        rxi[static_cast<std::size_t>(A)] = s;
    }
    const double curvature_term = detail::lorentz_inner(gv, rxi, f.eta);

    const std::vector<double> axi = weingarten(im, x, normal_direction::xi);
    const std::vector<double> aeta = weingarten(im, x, normal_direction::eta);
    const std::vector<double> gbase = metric_values(im.space.g, x);
    const double e2u = std::exp(2.0 * eval_value(im.log_factor, x));
    // [A_ξ, A_η] V then pair with W under e^{2u} g.
    std::vector<double> cv(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            double m = 0.0;
            for (int l = 0; l < n; ++l)
                m += axi[static_cast<std::size_t>(i * n + l)] *
                         aeta[static_cast<std::size_t>(l * n + k)] -
                     aeta[static_cast<std::size_t>(i * n + l)] *
                         axi[static_cast<std::size_t>(l * n + k)];
            s += m * V[static_cast<std::size_t>(k)];
        }
        cv[static_cast<std::size_t>(i)] = s;
    }
    double pair = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pair += gbase[static_cast<std::size_t>(i * n + j)] * cv[static_cast<std::size_t>(i)] *
                    W[static_cast<std::size_t>(j)];
    return std::abs(curvature_term + e2u * pair);
}

// ----- derivative of the second fundamental form ------------------------------------

namespace detail {

/// Ambient components of II(V,W) as order-1 jets in the base variables,
/// with V, W supplied as jet-valued extensions (constant jets = the
/// coordinate-constant extension).
inline std::vector<jet> ii_jets(const spacelike_immersion& im, const point& x,
                                const std::vector<jet>& V, const std::vector<jet>& W) {
    const int n = im.n;
    const int N = im.space.total_dim();
    const metric_field& g = im.space.g;
    const jet uj = eval_jet(im.log_factor, x, 3);
    const metric_jets mj = eval_metric_jets(g, x, 2);
    const std::vector<jet> gradj = gradient_jets(mj, uj);
    const std::vector<jet> hessj = hessian_jets(mj, uj);
    const jet q = grad_norm_sq_jet(mj, uj);
    const std::vector<jet> adotj = alpha_dot0_jets(im.space.alpha, x, 1);

    // S = (α̇(0) − ‖∇u‖² Id)/2 + du ⊗ ∇u − g⁻¹ ∇∇u   (so that e^{2u} A_η = S).
    std::vector<jet> S(static_cast<std::size_t>(n * n), jet::constant(0.0, n, 1));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            jet v = 0.5 * adotj[static_cast<std::size_t>(i * n + k)];
            if (i == k) v += (-0.5) * q;
            v += gradj[static_cast<std::size_t>(i)] * uj.partial(k);
            for (int m = 0; m < n; ++m)
                v += (-1.0) * mj.Ginv(i, m) * hessj[static_cast<std::size_t>(m * n + k)];
            S[static_cast<std::size_t>(i * n + k)] = v;
        }
    jet g_sv_w = jet::constant(0.0, n, 1);
    jet g_vw = jet::constant(0.0, n, 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            jet sv_i = jet::constant(0.0, n, 1);
            for (int k = 0; k < n; ++k)
                sv_i += S[static_cast<std::size_t>(i * n + k)] * V[static_cast<std::size_t>(k)];
            g_sv_w += mj.G(i, j) * sv_i * W[static_cast<std::size_t>(j)];
            g_vw += mj.G(i, j) * V[static_cast<std::size_t>(i)] * W[static_cast<std::size_t>(j)];
        }

    // Frame jets: ξ = (e^u, 0, …), η as in the header comment.
    const jet eu = exp(uj);
    const jet inv_eu = exp(-1.0 * uj);
    const jet inv_e2u = inv_eu * inv_eu;
    const jet e2u = eu * eu;
    std::vector<jet> out(static_cast<std::size_t>(N), jet::constant(0.0, n, 1));
    // ξ-part: −g(SV,W) ξ  (the e^{2u} from the frame pairing cancels: II's
    // ξ-coefficient is −e^{2u} g(A_η V,W) = −g(SV,W)).
    out[0] = (-1.0) * g_sv_w * eu;
    // η-part: e^{2u} g(V,W) η.
    out[0] += e2u * g_vw * (0.5 * q * inv_eu);
    out[1] = e2u * g_vw * ((-1.0) * inv_e2u);
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(2 + i)] =
            e2u * g_vw * (inv_e2u * gradj[static_cast<std::size_t>(i)]);
    return out;
}

/// (∇_U II)(V,W) with jet-valued extensions of V and W:
/// ∇^⊥_U (II(V,W)) − II(∇'_U V, W) − II(V, ∇'_U W), ∇' the connection of e^{2u}g.
inline std::vector<double> ii_covariant_derivative_ext(const spacelike_immersion& im,
                                                       const point& x,
                                                       const std::vector<double>& U,
                                                       const std::vector<jet>& Vj,
                                                       const std::vector<jet>& Wj) {
    const int n = im.n;
    const std::vector<jet> iij = ii_jets(im, x, Vj, Wj);
    const std::vector<double> DU = map_derivative(im, x, U, iij);
    std::vector<double> out = normal_projection(im, x, DU);

    // Induced-connection corrections.  ∇'_U V = U^k ∂_k V + Γ'(U, V).
    const metric_field induced = rescale_metric(im.space.g, im.log_factor);
    const std::vector<double> gam = christoffel(induced, x);
    auto correct = [&](const std::vector<jet>& Aj) {  // returns ∇'_U A (values)
        std::vector<double> nab(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += U[static_cast<std::size_t>(k)] * Aj[static_cast<std::size_t>(i)].d1(k);
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    s += gam[static_cast<std::size_t>((i * n + k) * n + j)] *
                         U[static_cast<std::size_t>(k)] *
                         Aj[static_cast<std::size_t>(j)].value();
            nab[static_cast<std::size_t>(i)] = s;
        }
        return nab;
    };
    const std::vector<double> nuv = correct(Vj);
    const std::vector<double> nuw = correct(Wj);
    std::vector<double> vvals(static_cast<std::size_t>(n)), wvals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        vvals[static_cast<std::size_t>(i)] = Vj[static_cast<std::size_t>(i)].value();
        wvals[static_cast<std::size_t>(i)] = Wj[static_cast<std::size_t>(i)].value();
    }
    const std::vector<double> t1 = second_fundamental_form(im, x, nuv, wvals);
    const std::vector<double> t2 = second_fundamental_form(im, x, vvals, nuw);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= t1[k] + t2[k];
    return out;
}

}  // namespace detail

/// (∇_U II)(V,W) with V, W extended coordinate-constant.
inline std::vector<double> ii_covariant_derivative(const spacelike_immersion& im, const point& x,
                                                   const std::vector<double>& U,
                                                   const std::vector<double>& V,
                                                   const std::vector<double>& W) {
    const int n = im.n;
    std::vector<jet> Vj, Wj;
    for (int i = 0; i < n; ++i) {
        Vj.push_back(jet::constant(V[static_cast<std::size_t>(i)], n, 1));
        Wj.push_back(jet::constant(W[static_cast<std::size_t>(i)], n, 1));
    }
    return detail::ii_covariant_derivative_ext(im, x, U, Vj, Wj);
}

// ----- theorem-level defects ---------------------------------------------------------

/// n ≥ 3: max-abs difference between the Schouten tensor of e^{2u}g and
/// e^{2u} g(A_η ·, ·) with the numeric Weingarten endomorphism.
inline double schouten_recovery_defect(const spacelike_immersion& im, const point& x) {
    const int n = im.n;
    if (n < 3) throw dimension_error("schouten_recovery_defect needs dimension at least 3");
    const metric_field induced = rescale_metric(im.space.g, im.log_factor);
    const std::vector<double> lhs = schouten(induced, x);
    const std::vector<double> A = weingarten(im, x, normal_direction::eta);
    const std::vector<double> gv = metric_values(im.space.g, x);
    const double e2u = std::exp(2.0 * eval_value(im.log_factor, x));
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double rhs = 0.0;
            for (int k = 0; k < n; ++k)
                rhs += gv[static_cast<std::size_t>(i * n + k)] *
                       A[static_cast<std::size_t>(k * n + j)];
            worst = std::max(worst, std::abs(lhs[static_cast<std::size_t>(i * n + j)] -
                                             e2u * rhs));
        }
    return worst;
}

/// n = 2: max-abs difference between the transformed structure form
/// P(e^{2u}g) (from the Moebius transformation law applied to `m`) and
/// e^{2u} g(A_η ·, ·).  `m` should come from moebius_from_alpha, whose
/// certification throws on an incompatible family.
inline double moebius_recovery_defect(const spacelike_immersion& im, const moebius_structure& m,
                                      const point& x) {
    const int n = im.n;
    if (n != 2) throw dimension_error("moebius_recovery_defect is a surface check");
    const std::vector<double> lhs = moebius_transform(m, im.log_factor, x);
    const std::vector<double> A = weingarten(im, x, normal_direction::eta);
    const std::vector<double> gv = metric_values(im.space.g, x);
    const double e2u = std::exp(2.0 * eval_value(im.log_factor, x));
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double rhs = 0.0;
            for (int k = 0; k < n; ++k)
                rhs += gv[static_cast<std::size_t>(i * n + k)] *
                       A[static_cast<std::size_t>(k * n + j)];
            worst = std::max(worst, std::abs(lhs[static_cast<std::size_t>(i * n + j)] -
                                             e2u * rhs));
        }
    return worst;
}

/// Normal part of R̃(TΨ·U, TΨ·V)TΨ·W as frame coefficients (ξ-coeff, η-coeff).
inline std::pair<double, double> tangent_triple_normal_part(const spacelike_immersion& im,
                                                            const point& x,
                                                            const std::vector<double>& U,
                                                            const std::vector<double>& V,
                                                            const std::vector<double>& W) {
    const int N = im.space.total_dim();
    const point p = psi_point(im, x);
    const curvature_slice cs = riemann(im.space.ambient, p);
    const std::vector<double> gv = metric_values(im.space.ambient, p);
    const lightlike_frame f = normal_frame(im, x);
    const std::vector<double> pu = differential(im, x, U);
    const std::vector<double> pv = differential(im, x, V);
    const std::vector<double> pw = differential(im, x, W);
    std::vector<double> r(static_cast<std::size_t>(N), 0.0);
    for (int A = 0; A < N; ++A) {
        double s = 0.0;
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c)
                for (int d = 0; d < N; ++d)
                    s += cs.riem(A, b, c, d) * pw[static_cast<std::size_t>(b)] *
                         pu[static_cast<std::size_t>(c)] * pv[static_cast<std::size_t>(d)];
        r[static_cast<std::size_t>(A)] = s;
    }
    const double cxi = -detail::lorentz_inner(gv, r, f.eta);
    const double ceta = -detail::lorentz_inner(gv, r, f.xi);
    return {cxi, ceta};
}

/// n = 2 reduced Codazzi equation: the normal part of R̃ on a tangent triple
/// equals C(g)(V,U,W) ξ.  Returns max(|ξ-coeff − C|, |η-coeff|).
inline double codazzi_cotton_defect(const spacelike_immersion& im, const moebius_structure& m,
                                    const point& x, const std::vector<double>& U,
                                    const std::vector<double>& V, const std::vector<double>& W) {
    if (im.n != 2) throw dimension_error("codazzi_cotton_defect is a surface check");
    const auto [cxi, ceta] = tangent_triple_normal_part(im, x, U, V, W);
    const double cotton = cotton_york(m, x, V, U, W);
    return std::max(std::abs(cxi - cotton), std::abs(ceta));
}

/// Size of the normal part of R̃ on a tangent triple (flat-structure
/// invariance reading: zero iff R̃ preserves the tangent spaces there).
inline double curvature_invariance_defect(const spacelike_immersion& im, const point& x,
                                          const std::vector<double>& U,
                                          const std::vector<double>& V,
                                          const std::vector<double>& W) {
    const auto [cxi, ceta] = tangent_triple_normal_part(im, x, U, V, W);
    return std::max(std::abs(cxi), std::abs(ceta));
}

/// |K̃| of the spacelike tangent plane TΨ·(∂_1, ∂_2); vanishes for every u.
inline double gauss_sectional_defect(const spacelike_immersion& im, const point& x) {
    if (im.n != 2) throw dimension_error("gauss_sectional_defect is a surface check");
    const point p = psi_point(im, x);
    const std::vector<double> v = differential(im, x, {1.0, 0.0});
    const std::vector<double> w = differential(im, x, {0.0, 1.0});
    return std::abs(sectional_curvature(im.space.ambient, p, v, w));
}

}  // namespace camb
