#pragma once
/// \file ambient.hpp
/// \brief The product Lorentzian metric built from a base metric and a
///        one-parameter family of endomorphisms, together with its
///        distinguished fields, closed-form connection, Ricci restriction,
///        fiber second fundamental form, and slice diagnostics.
///
/// Given a Riemannian metric g on an n-chart and a family α(ρ) of
/// g-self-adjoint, positive endomorphisms with α(0) = Id on the band
/// |ρ| < ε, the ambient chart carries coordinates (t, ρ, x¹..xⁿ) with
/// t ∈ (0,∞), and the metric
///
///     G(∂t,∂t) = 2ρ,   G(∂t,∂ρ) = t,   G(∂ρ,∂ρ) = 0,
///     G(∂t,V) = G(∂ρ,V) = 0,           G(V,W) = t² g(α(ρ)V, W),
///
/// which is the expansion of 2 d(ρt)·dt − ... realized componentwise so that
/// jets of G are exact.  Lifted vector fields keep zero (t,ρ)-components.
///
/// Closed forms implemented here (each cross-checked against the numeric
/// Christoffels of G in the tests):
///
///     ∇∂t∂t = ∇∂ρ∂ρ = 0,          ∇∂t∂ρ = (1/t)∂ρ,
///     ∇∂t V = (1/t) V,            ∇∂ρ V = ½ α(ρ)⁻¹ α̇(ρ) V,
///     ∇_V W |ρ=0 = −(t/2) g(α̇(0)V, W) ∂t − g(V,W) ∂ρ + ∇ᵍ_V W,
///
///     Ric|ρ=0 (V,W) = Ricᵍ(V,W) − (tr α̇(0)/2) g(V,W) − ((n−2)/2) g(α̇(0)V, W),
///
///     II_F(V,W) = −(1/2t) G(α⁻¹α̇ V, W) ∂t − (1/t²)(G(V,W) − ρ G(α⁻¹α̇ V, W)) ∂ρ.

#include "camb/conformal.hpp"
#include "camb/sampling.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace camb {

// ----- generic helper -----------------------------------------------------------

/// ∇_X Y for constant component vectors: (X^i Y^j Γ^k_{ij})_k.
inline std::vector<double> christoffel_apply(const metric_field& g, const point& p,
                                             const std::vector<double>& X,
                                             const std::vector<double>& Y) {
    const int n = g.dim();
    if (static_cast<int>(X.size()) != n || static_cast<int>(Y.size()) != n)
        throw dimension_error("christoffel_apply: vector size does not match chart dimension");
    const std::vector<double> gam = christoffel(g, p);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += gam[static_cast<std::size_t>((k * n + i) * n + j)] *
                     X[static_cast<std::size_t>(i)] * Y[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(k)] = s;
    }
    return out;
}

namespace detail {

inline std::string point_text(const std::vector<double>& x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
    os << ")";
    return os.str();
}

}  // namespace detail

// ----- endomorphism family --------------------------------------------------------

/// One-parameter family of (1,1)-tensors on the base chart, with components
/// that are expressions jointly in (ρ, base coordinates).  The ρ-derivative
/// is obtained from the same jet engine in the ρ slot, so the family and its
/// rate can never drift apart.
struct alpha_family {
    chart_ptr base;                  ///< chart of the underlying manifold
    chart_ptr family;                ///< chart (ρ, x¹..xⁿ), ρ ∈ (−ε, ε)
    std::vector<scalar_field> comp;  ///< n² components, comp[i·n+j] = α^i_j
    double epsilon = 0.0;            ///< band half-width

    int dim() const { return base->dim(); }
    const scalar_field& at(int i, int j) const {
        return comp[static_cast<std::size_t>(i * dim() + j)];
    }
};

/// The chart (ρ, x¹..xⁿ) on which family components live.
inline chart_ptr make_alpha_chart(const chart_ptr& base, double epsilon) {
    if (!(epsilon > 0.0)) throw schema_error("family band half-width must be positive");
    std::vector<std::string> coords{"rho"};
    std::vector<interval> bounds{interval{-epsilon, epsilon}};
    for (int i = 0; i < base->dim(); ++i) {
        coords.push_back(base->coords[static_cast<std::size_t>(i)]);
        bounds.push_back(base->bounds[static_cast<std::size_t>(i)]);
    }
    return make_chart(base->name + "_band", coords, bounds);
}

inline alpha_family make_alpha_family(const chart_ptr& base, double epsilon,
                                      std::vector<scalar_field> comp) {
    if (!(epsilon > 0.0)) throw schema_error("family band half-width must be positive");
    const int n = base->dim();
    if (static_cast<int>(comp.size()) != n * n)
        throw dimension_error("family needs n*n components");
    const chart_ptr family = comp.front().on;
    for (const scalar_field& f : comp)
        if (f.on != family) throw dimension_error("family components live on different charts");
    if (family->dim() != n + 1 || family->coords.front() != "rho")
        throw schema_error("family components must live on a (rho, base coordinates) chart");
    for (int i = 0; i < n; ++i)
        if (family->coords[static_cast<std::size_t>(i + 1)] !=
            base->coords[static_cast<std::size_t>(i)])
            throw schema_error("family chart coordinates do not match the base chart");

    alpha_family af{base, family, std::move(comp), epsilon};

    // The family must restrict to the identity at ρ = 0; certified by
    // deterministic sampling.
    sampler rng(0x5eedf00dULL);
    for (int s = 0; s < 50; ++s) {
        const point x = rng.sample_point(base);
        std::vector<double> fx{0.0};
        fx.insert(fx.end(), x.x.begin(), x.x.end());
        const point fp = make_point(family, fx);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double expected = (i == j) ? 1.0 : 0.0;
                const double got = eval_value(af.at(i, j), fp);
                if (std::abs(got - expected) > 1e-12)
                    throw hypothesis_error(
                        "family does not restrict to the identity at rho = 0 near x = " +
                            detail::point_text(x.x),
                        std::abs(got - expected));
            }
    }
    return af;
}

/// The constant family α(ρ) = Id.
inline alpha_family identity_alpha(const chart_ptr& base, double epsilon) {
    const chart_ptr family = make_alpha_chart(base, epsilon);
    const int n = base->dim();
    std::vector<scalar_field> comp;
    comp.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            comp.push_back(field_constant(family, i == j ? 1.0 : 0.0));
    return make_alpha_family(base, epsilon, std::move(comp));
}

/// Component values of α at (ρ, x), row-major n², upper index first.
inline std::vector<double> alpha_values(const alpha_family& af, double rho, const point& x) {
    const int n = af.dim();
    std::vector<double> fx{rho};
    fx.insert(fx.end(), x.x.begin(), x.x.end());
    const point fp = make_point(af.family, fx);
    std::vector<double> out(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<std::size_t>(i * n + j)] = eval_value(af.at(i, j), fp);
    return out;
}

/// Component values of α̇ (the ρ-derivative) at (ρ, x).
inline std::vector<double> alpha_dot_values(const alpha_family& af, double rho, const point& x) {
    const int n = af.dim();
    std::vector<double> fx{rho};
    fx.insert(fx.end(), x.x.begin(), x.x.end());
    const point fp = make_point(af.family, fx);
    std::vector<double> out(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<std::size_t>(i * n + j)] = eval_jet(af.at(i, j), fp, 1).d1(0);
    return out;
}

/// Jets of α̇(0)^i_j in the base-chart variables, at the given order
/// (order + 1 must stay within the jet budget).
inline std::vector<jet> alpha_dot0_jets(const alpha_family& af, const point& x, int order) {
    const int n = af.dim();
    std::vector<double> fx{0.0};
    fx.insert(fx.end(), x.x.begin(), x.x.end());
    const point fp = make_point(af.family, fx);
    std::vector<int> keep;
    for (int i = 1; i <= n; ++i) keep.push_back(i);
    std::vector<jet> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.push_back(eval_jet(af.at(i, j), fp, order + 1).partial(0).restricted(keep));
    return out;
}

// ----- ambient space ---------------------------------------------------------------

struct ambient_space {
    chart_ptr base;        ///< chart of the underlying manifold (dim n)
    chart_ptr total;       ///< chart (t, ρ, x¹..xⁿ)
    metric_field g;        ///< base Riemannian metric
    metric_field ambient;  ///< the Lorentzian product metric
    alpha_family alpha;
    int n = 0;

    int total_dim() const { return n + 2; }
};

/// Build the ambient space, certifying the family against the base metric:
/// self-adjointness within 1e-10 and positivity (eigenvalue floor 1e-8) at
/// 200 deterministic (ρ, x) samples, then Lorentzian signature of the
/// product metric at 50 band points.  Violations carry a witness location.
inline ambient_space build_ambient(const metric_field& g, const alpha_family& af) {
    if (g.on != af.base)
        throw dimension_error("ambient construction: metric and family charts differ");
    if (g.signature != signature_kind::riemannian)
        throw dimension_error("ambient construction expects a Riemannian base metric");
    const int n = g.dim();
    if (n + 2 > kMaxJetVars)
        throw dimension_error("ambient chart would exceed the supported number of variables");

    // --- certification of the family against g -------------------------------
    sampler rng(0xa1b2c3d4ULL);
    const interval band{-af.epsilon, af.epsilon};
    for (int s = 0; s < 200; ++s) {
        const double rho = rng.draw(band);
        const point x = rng.sample_point(af.base);
        const std::vector<double> A = alpha_values(af, rho, x);
        const std::vector<double> gv = metric_values(g, x);
        std::vector<double> M(static_cast<std::size_t>(n * n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double m = 0.0;
                for (int k = 0; k < n; ++k)
                    m += gv[static_cast<std::size_t>(i * n + k)] *
                         A[static_cast<std::size_t>(k * n + j)];
                M[static_cast<std::size_t>(i * n + j)] = m;
            }
        double asym = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                asym = std::max(asym, std::abs(M[static_cast<std::size_t>(i * n + j)] -
                                               M[static_cast<std::size_t>(j * n + i)]));
        if (asym > 1e-10)
            throw hypothesis_error("family is not self-adjoint for the base metric at rho = " +
                                       std::to_string(rho) + ", x = " + detail::point_text(x.x),
                                   asym);
        std::vector<double> S(M);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                S[static_cast<std::size_t>(i * n + j)] =
                    0.5 * (M[static_cast<std::size_t>(i * n + j)] +
                           M[static_cast<std::size_t>(j * n + i)]);
        const sym_eigen eig = jacobi_eigen(S, n);
        if (eig.values.front() < 1e-8)
            throw hypothesis_error("family loses positivity inside the band at rho = " +
                                       std::to_string(rho) + ", x = " + detail::point_text(x.x),
                                   eig.values.front());
    }

    // --- product chart and metric --------------------------------------------
    std::vector<std::string> coords{"t", "rho"};
    std::vector<interval> bounds{interval{0.0, std::numeric_limits<double>::infinity()},
                                 interval{-af.epsilon, af.epsilon}};
    for (int i = 0; i < n; ++i) {
        coords.push_back(af.base->coords[static_cast<std::size_t>(i)]);
        bounds.push_back(af.base->bounds[static_cast<std::size_t>(i)]);
    }
    const chart_ptr total = make_chart(af.base->name + "_ambient", coords, bounds);

    std::vector<int> base_map, family_map{1};
    for (int i = 0; i < n; ++i) {
        base_map.push_back(2 + i);
        family_map.push_back(2 + i);
    }
    const scalar_field t = field_coordinate(total, 0);
    const scalar_field rho = field_coordinate(total, 1);
    const scalar_field zero = field_constant(total, 0.0);
    const scalar_field t_sq = field_pow(t, 2);

    const int N = n + 2;
    std::vector<scalar_field> comp(static_cast<std::size_t>(N * N), zero);
    auto put = [&](int a, int b, const scalar_field& f) {
        comp[static_cast<std::size_t>(a * N + b)] = f;
    };
    put(0, 0, 2.0 * rho);
    put(0, 1, t);
    put(1, 0, t);
    // Lower block: t² g(α(ρ)·,·), symmetrized so the stored components are
    // exchange-invariant even before self-adjointness is certified exactly.
    std::vector<scalar_field> alpha_lift, g_lift;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            alpha_lift.push_back(field_reindexed(af.at(i, j), total, family_map));
            g_lift.push_back(field_reindexed(g.at(i, j), total, base_map));
        }
    auto lifted = [&](const std::vector<scalar_field>& v, int i, int j) -> const scalar_field& {
        return v[static_cast<std::size_t>(i * n + j)];
    };
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            scalar_field s = lifted(alpha_lift, 0, i) * lifted(g_lift, 0, j) +
                             lifted(alpha_lift, 0, j) * lifted(g_lift, 0, i);
            for (int k = 1; k < n; ++k)
                s = s + lifted(alpha_lift, k, i) * lifted(g_lift, k, j) +
                    lifted(alpha_lift, k, j) * lifted(g_lift, k, i);
            const scalar_field entry = t_sq * (0.5 * s);
            put(2 + i, 2 + j, entry);
            put(2 + j, 2 + i, entry);
        }
    const metric_field ambient = make_metric_field(total, signature_kind::lorentzian, comp);

    ambient_space a{af.base, total, g, ambient, af, n};

    // --- sampled signature check ----------------------------------------------
    for (int s = 0; s < 50; ++s) {
        std::vector<double> c{rng.sample_t(), rng.draw(band)};
        for (int i = 0; i < n; ++i)
            c.push_back(rng.draw(af.base->bounds[static_cast<std::size_t>(i)]));
        const point p = make_point(total, c);
        if (!signature_matches(ambient, p))
            throw hypothesis_error(
                "product metric is not Lorentzian at " + detail::point_text(c), 1.0);
    }
    return a;
}

// ----- points and lifts --------------------------------------------------------------

inline point lift_point(const ambient_space& a, double t, double rho, const point& x) {
    if (x.on != a.base) throw dimension_error("lift_point: base point on wrong chart");
    std::vector<double> c{t, rho};
    c.insert(c.end(), x.x.begin(), x.x.end());
    return make_point(a.total, c);
}

inline point slice_lift(const ambient_space& a, double t, const point& x) {
    return lift_point(a, t, 0.0, x);
}

inline point base_of(const ambient_space& a, const point& p) {
    if (p.on != a.total) throw dimension_error("base_of: point on wrong chart");
    return make_point(a.base, std::vector<double>(p.x.begin() + 2, p.x.end()));
}

inline bool on_slice(const point& p) { return std::abs(p.x[1]) <= 1e-12; }

inline void require_slice(const point& p, const char* what) {
    if (!on_slice(p))
        throw bounds_error(std::string(what) + " is available on the rho = 0 slice only");
}

/// Base vector as an ambient vector with zero (t,ρ)-components.
inline std::vector<double> lift_vector(const ambient_space& a, const std::vector<double>& V) {
    if (static_cast<int>(V.size()) != a.n)
        throw dimension_error("lift_vector: size does not match base dimension");
    std::vector<double> out{0.0, 0.0};
    out.insert(out.end(), V.begin(), V.end());
    return out;
}

/// Deterministic band point with the scale coordinate in the pinned window.
inline point sample_band_point(sampler& rng, const ambient_space& a,
                               double margin = kSampleMargin) {
    std::vector<double> c{rng.sample_t(), rng.draw(a.total->bounds[1], margin)};
    for (int i = 0; i < a.n; ++i)
        c.push_back(rng.draw(a.base->bounds[static_cast<std::size_t>(i)], margin));
    return make_point(a.total, c);
}

inline point sample_slice_point(sampler& rng, const ambient_space& a,
                                double margin = kSampleMargin) {
    std::vector<double> c{rng.sample_t(), 0.0};
    for (int i = 0; i < a.n; ++i)
        c.push_back(rng.draw(a.base->bounds[static_cast<std::size_t>(i)], margin));
    return make_point(a.total, c);
}

// ----- distinguished fields ------------------------------------------------------------

/// The Euler-type field Z = t ∂t generating the scaling action.
inline tensor_field fundamental_field(const ambient_space& a) {
    std::vector<scalar_field> comp{field_coordinate(a.total, 0)};
    for (int k = 1; k < a.total_dim(); ++k) comp.push_back(field_constant(a.total, 0.0));
    return make_tensor_field(a.total, 1, 0, comp);
}

/// Timelike unit-type frame vector: T = (1/t)∂t − (1 + ρ/t²)∂ρ, G(T,T) = −2.
inline std::vector<double> frame_T(const ambient_space& a, const point& p) {
    const double t = p.x[0], rho = p.x[1];
    std::vector<double> out(static_cast<std::size_t>(a.total_dim()), 0.0);
    out[0] = 1.0 / t;
    out[1] = -(1.0 + rho / (t * t));
    return out;
}

/// Spacelike partner: E = (1/t)∂t + (1 − ρ/t²)∂ρ, G(E,E) = 2, G(T,E) = 0.
inline std::vector<double> frame_E(const ambient_space& a, const point& p) {
    const double t = p.x[0], rho = p.x[1];
    std::vector<double> out(static_cast<std::size_t>(a.total_dim()), 0.0);
    out[0] = 1.0 / t;
    out[1] = 1.0 - rho / (t * t);
    return out;
}

/// The 1-form ω = G(Z, ·); componentwise (2tρ, t², 0, …).
inline std::vector<double> omega_values(const ambient_space& a, const point& p) {
    const int N = a.total_dim();
    const std::vector<double> gv = metric_values(a.ambient, p);
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int b = 0; b < N; ++b) out[static_cast<std::size_t>(b)] = p.x[0] * gv[static_cast<std::size_t>(b * N)];
    return out;
}

/// Exterior derivative (dω)_{AB} = ∂_A ω_B − ∂_B ω_A, row-major N².
inline std::vector<double> omega_exterior_derivative(const ambient_space& a, const point& p) {
    const int N = a.total_dim();
    const metric_jets mj = eval_metric_jets(a.ambient, p, 1);
    const jet tj = jet::variable(p.x[0], N, 1, 0);
    std::vector<jet> om;
    om.reserve(static_cast<std::size_t>(N));
    for (int b = 0; b < N; ++b) om.push_back(mj.G(b, 0) * tj);
    std::vector<double> out(static_cast<std::size_t>(N * N), 0.0);
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y)
            out[static_cast<std::size_t>(x * N + y)] = om[static_cast<std::size_t>(y)].d1(x) -
                                                       om[static_cast<std::size_t>(x)].d1(y);
    return out;
}

inline std::pair<std::vector<double>, std::vector<double>> omega_and_exterior_derivative(
    const ambient_space& a, const point& p) {
    return {omega_values(a, p), omega_exterior_derivative(a, p)};
}

// ----- closed-form connection -------------------------------------------------------------

enum class connection_case {
    dt_dt,      ///< ∇_{∂t} ∂t = 0
    drho_drho,  ///< ∇_{∂ρ} ∂ρ = 0
    dt_drho,    ///< ∇_{∂t} ∂ρ = (1/t) ∂ρ
    dt_lift,    ///< ∇_{∂t} V = (1/t) V
    drho_lift,  ///< ∇_{∂ρ} V = ½ α⁻¹ α̇ V
    lift_lift   ///< ∇_V W on the slice (three-term formula)
};

/// Closed-form covariant derivative for the six structural direction pairs.
/// V and W are base vectors (needed for the lift cases); the lift-lift
/// formula is only available on the ρ = 0 slice.
inline std::vector<double> closed_form_connection(const ambient_space& a, const point& p,
                                                  connection_case which,
                                                  const std::vector<double>& V = {},
                                                  const std::vector<double>& W = {}) {
    if (p.on != a.total) throw dimension_error("closed_form_connection: point on wrong chart");
    const int n = a.n;
    const int N = a.total_dim();
    const double t = p.x[0], rho = p.x[1];
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    auto need_v = [&]() {
        if (static_cast<int>(V.size()) != n)
            throw dimension_error("closed_form_connection: V must be a base vector");
    };
    switch (which) {
        case connection_case::dt_dt:
        case connection_case::drho_drho:
            return out;
        case connection_case::dt_drho:
            out[1] = 1.0 / t;
            return out;
        case connection_case::dt_lift: {
            need_v();
            for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(2 + k)] = V[static_cast<std::size_t>(k)] / t;
            return out;
        }
        case connection_case::drho_lift: {
            need_v();
            const point x = base_of(a, p);
            const std::vector<double> A = alpha_values(a.alpha, rho, x);
            const std::vector<double> Adot = alpha_dot_values(a.alpha, rho, x);
            const std::vector<double> Ainv = invert_matrix(A, n, "family endomorphism");
            std::vector<double> y(static_cast<std::size_t>(n), 0.0);
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int k = 0; k < n; ++k)
                    for (int j = 0; j < n; ++j)
                        s += Ainv[static_cast<std::size_t>(i * n + k)] *
                             Adot[static_cast<std::size_t>(k * n + j)] * V[static_cast<std::size_t>(j)];
                y[static_cast<std::size_t>(i)] = s;
            }
            for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(2 + k)] = 0.5 * y[static_cast<std::size_t>(k)];
            return out;
        }
        case connection_case::lift_lift: {
            need_v();
            if (static_cast<int>(W.size()) != n)
                throw dimension_error("closed_form_connection: W must be a base vector");
            require_slice(p, "the lift-lift connection formula");
            const point x = base_of(a, p);
            const std::vector<double> gv = metric_values(a.g, x);
            const std::vector<double> Adot = alpha_dot_values(a.alpha, 0.0, x);
            double g_vw = 0.0, g_adot_vw = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    g_vw += gv[static_cast<std::size_t>(i * n + j)] * V[static_cast<std::size_t>(i)] *
                            W[static_cast<std::size_t>(j)];
                    for (int k = 0; k < n; ++k)
                        g_adot_vw += gv[static_cast<std::size_t>(k * n + j)] *
                                     Adot[static_cast<std::size_t>(k * n + i)] *
                                     V[static_cast<std::size_t>(i)] * W[static_cast<std::size_t>(j)];
                }
            out[0] = -0.5 * t * g_adot_vw;
            out[1] = -g_vw;
            const std::vector<double> nab = christoffel_apply(a.g, x, V, W);
            for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(2 + k)] = nab[static_cast<std::size_t>(k)];
            return out;
        }
    }
    throw error("closed_form_connection: unknown case");
}

// ----- Ricci restricted to the slice ------------------------------------------------------

/// Ric(V,W) of the ambient metric along the ρ = 0 slice, by the closed form
///   Ricᵍ(V,W) − (tr α̇(0)/2) g(V,W) − ((n−2)/2) g(α̇(0)V, W).
inline double ricci_along_Q(const ambient_space& a, const point& p,
                            const std::vector<double>& V, const std::vector<double>& W) {
    if (p.on != a.total) throw dimension_error("ricci_along_Q: point on wrong chart");
    require_slice(p, "the Ricci restriction formula");
    const int n = a.n;
    if (static_cast<int>(V.size()) != n || static_cast<int>(W.size()) != n)
        throw dimension_error("ricci_along_Q: V and W must be base vectors");
    const point x = base_of(a, p);
    const std::vector<double> ric = ricci(a.g, x);
    const std::vector<double> gv = metric_values(a.g, x);
    const std::vector<double> Adot = alpha_dot_values(a.alpha, 0.0, x);
    double tr = 0.0;
    for (int k = 0; k < n; ++k) tr += Adot[static_cast<std::size_t>(k * n + k)];
    double ric_vw = 0.0, g_vw = 0.0, g_adot_vw = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ric_vw += ric[static_cast<std::size_t>(i * n + j)] * V[static_cast<std::size_t>(i)] *
                      W[static_cast<std::size_t>(j)];
            g_vw += gv[static_cast<std::size_t>(i * n + j)] * V[static_cast<std::size_t>(i)] *
                    W[static_cast<std::size_t>(j)];
            for (int k = 0; k < n; ++k)
                g_adot_vw += gv[static_cast<std::size_t>(k * n + j)] *
                             Adot[static_cast<std::size_t>(k * n + i)] *
                             V[static_cast<std::size_t>(i)] * W[static_cast<std::size_t>(j)];
        }
    return ric_vw - 0.5 * tr * g_vw - 0.5 * (n - 2) * g_adot_vw;
}

// ----- fiber second fundamental form --------------------------------------------------------

/// Closed-form second fundamental form of the fiber {(t,ρ)} × M for base
/// vectors V, W, returned as an ambient vector.
inline std::vector<double> fiber_second_fundamental_form(const ambient_space& a, const point& p,
                                                         const std::vector<double>& V,
                                                         const std::vector<double>& W) {
    if (p.on != a.total) throw dimension_error("fiber form: point on wrong chart");
    const int n = a.n;
    if (static_cast<int>(V.size()) != n || static_cast<int>(W.size()) != n)
        throw dimension_error("fiber form: V and W must be base vectors");
    const int N = a.total_dim();
    const double t = p.x[0], rho = p.x[1];
    const point x = base_of(a, p);
    const std::vector<double> A = alpha_values(a.alpha, rho, x);
    const std::vector<double> Adot = alpha_dot_values(a.alpha, rho, x);
    const std::vector<double> Ainv = invert_matrix(A, n, "family endomorphism");
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);  // α⁻¹ α̇ V
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                s += Ainv[static_cast<std::size_t>(i * n + k)] *
                     Adot[static_cast<std::size_t>(k * n + j)] * V[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    const std::vector<double> Gv = metric_values(a.ambient, p);
    auto fiber_inner = [&](const std::vector<double>& u, const std::vector<double>& w) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += Gv[static_cast<std::size_t>((2 + i) * N + (2 + j))] *
                     u[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)];
        return s;
    };
    const double s1 = fiber_inner(y, W);
    const double s0 = fiber_inner(V, W);
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    out[0] = -s1 / (2.0 * t);
    out[1] = -(s0 - rho * s1) / (t * t);
    return out;
}

/// Numeric second fundamental form: normal projection of the ambient
/// covariant derivative of lifted fields, using the (T, E) normal frame of
/// the fiber:  D^⊥ = −½ G(D,T) T + ½ G(D,E) E.
inline std::vector<double> fiber_ii_numeric(const ambient_space& a, const point& p,
                                            const std::vector<double>& V,
                                            const std::vector<double>& W) {
    const int N = a.total_dim();
    const std::vector<double> D =
        christoffel_apply(a.ambient, p, lift_vector(a, V), lift_vector(a, W));
    const std::vector<double> Gv = metric_values(a.ambient, p);
    auto inner = [&](const std::vector<double>& u, const std::vector<double>& w) {
        double s = 0.0;
        for (int x = 0; x < N; ++x)
            for (int y = 0; y < N; ++y)
                s += Gv[static_cast<std::size_t>(x * N + y)] * u[static_cast<std::size_t>(x)] *
                     w[static_cast<std::size_t>(y)];
        return s;
    };
    const std::vector<double> T = frame_T(a, p);
    const std::vector<double> E = frame_E(a, p);
    const double ct = -0.5 * inner(D, T);
    const double ce = 0.5 * inner(D, E);
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int k = 0; k < N; ++k)
        out[static_cast<std::size_t>(k)] =
            ct * T[static_cast<std::size_t>(k)] + ce * E[static_cast<std::size_t>(k)];
    return out;
}

/// Max-abs deviation of the fiber form from a multiple of the induced metric,
/// measured over an induced-orthonormal basis.  Vanishes exactly when
/// α⁻¹ α̇ is a multiple of the identity at the point.
inline double fiber_umbilicality_defect(const ambient_space& a, const point& p) {
    const int n = a.n;
    const int N = a.total_dim();
    const std::vector<double> Gv = metric_values(a.ambient, p);
    std::vector<double> M(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M[static_cast<std::size_t>(i * n + j)] =
                Gv[static_cast<std::size_t>((2 + i) * N + (2 + j))];
    const std::vector<double> basis = gram_schmidt_basis(M, n);
    auto basis_vec = [&](int k) {
        return std::vector<double>(basis.begin() + k * n, basis.begin() + (k + 1) * n);
    };
    // Mean normal over the orthonormal basis.
    std::vector<double> mean(static_cast<std::size_t>(N), 0.0);
    std::vector<std::vector<double>> ii(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ii[static_cast<std::size_t>(i * n + j)] =
                fiber_second_fundamental_form(a, p, basis_vec(i), basis_vec(j));
            if (i == j)
                for (int k = 0; k < N; ++k)
                    mean[static_cast<std::size_t>(k)] +=
                        ii[static_cast<std::size_t>(i * n + j)][static_cast<std::size_t>(k)] / n;
        }
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < N; ++k) {
                const double diff =
                    ii[static_cast<std::size_t>(i * n + j)][static_cast<std::size_t>(k)] -
                    (i == j ? mean[static_cast<std::size_t>(k)] : 0.0);
                worst = std::max(worst, std::abs(diff));
            }
    return worst;
}

// ----- slice diagnostics ----------------------------------------------------------------------

/// View of the ρ = 0 hypersurface with its scale embedding (t, x) ↦ (t, 0, x).
struct scale_slice {
    const ambient_space* space = nullptr;
    point embed(double t, const point& x) const { return slice_lift(*space, t, x); }
};

inline scale_slice make_scale_slice(const ambient_space& a) { return scale_slice{&a}; }

/// Defect of the induced tensor on the slice against its target
/// (zero scale-direction rows, t²g on the base block).
inline double slice_pullback_defect(const ambient_space& a, double t, const point& x) {
    const int n = a.n;
    const int N = a.total_dim();
    const point p = slice_lift(a, t, x);
    const std::vector<double> Gv = metric_values(a.ambient, p);
    const std::vector<double> gv = metric_values(a.g, x);
    double worst = 0.0;
    // directions: e0 = ∂t, e_{1+i} = lifted ∂_{x_i}
    auto idx = [&](int q) { return q == 0 ? 0 : 1 + q; };  // ambient coefficient index
    for (int q = 0; q <= n; ++q)
        for (int r = 0; r <= n; ++r) {
            const double got = Gv[static_cast<std::size_t>(idx(q) * N + idx(r))];
            const double target =
                (q > 0 && r > 0) ? t * t * gv[static_cast<std::size_t>((q - 1) * n + (r - 1))] : 0.0;
            worst = std::max(worst, std::abs(got - target));
        }
    return worst;
}

/// Spectral diagnosis of the induced Gram on the slice: its radical must be
/// exactly one-dimensional and aligned with Z.
struct radical_diagnosis {
    double smallest = 0.0;   ///< least |eigenvalue|
    double next = 0.0;       ///< second-least |eigenvalue|
    double alignment = 0.0;  ///< |cos| between the kernel direction and Z
};

inline radical_diagnosis slice_radical(const ambient_space& a, double t, const point& x) {
    const int n = a.n;
    const int N = a.total_dim();
    const point p = slice_lift(a, t, x);
    const std::vector<double> Gv = metric_values(a.ambient, p);
    const int m = n + 1;
    std::vector<double> ind(static_cast<std::size_t>(m * m));
    auto idx = [&](int q) { return q == 0 ? 0 : 1 + q; };
    for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
            ind[static_cast<std::size_t>(q * m + r)] =
                Gv[static_cast<std::size_t>(idx(q) * N + idx(r))];
    const sym_eigen eig = jacobi_eigen(ind, m);
    int kmin = 0;
    for (int k = 1; k < m; ++k)
        if (std::abs(eig.values[static_cast<std::size_t>(k)]) <
            std::abs(eig.values[static_cast<std::size_t>(kmin)]))
            kmin = k;
    double next = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k)
        if (k != kmin) next = std::min(next, std::abs(eig.values[static_cast<std::size_t>(k)]));
    radical_diagnosis d;
    d.smallest = std::abs(eig.values[static_cast<std::size_t>(kmin)]);
    d.next = next;
    // Z = t ∂t points along the first induced direction.
    d.alignment = std::abs(eig.vectors[static_cast<std::size_t>(kmin * m)]);
    return d;
}

// ----- flat-model cross-check (two-sphere base) -----------------------------------------------

/// The reference immersion (t, ρ, θ, φ) ↦ ((1−ρ/2)t, (1+ρ/2)t s(θ,φ)) into
/// flat Lorentzian 4-space, where s is the unit sphere embedding.
inline std::vector<double> minkowski_immersion(const ambient_space& a, const point& p) {
    if (a.n != 2) throw dimension_error("flat-model cross-check needs a two-sphere base");
    if (p.on != a.total) throw dimension_error("flat-model cross-check: point on wrong chart");
    const double t = p.x[0], rho = p.x[1], th = p.x[2], ph = p.x[3];
    const double rin = (1.0 - 0.5 * rho) * t;
    const double rout = (1.0 + 0.5 * rho) * t;
    return {rin, rout * std::sin(th) * std::cos(ph), rout * std::sin(th) * std::sin(ph),
            rout * std::cos(th)};
}

/// Max-abs defect between the pullback of diag(−1,1,1,1) under the reference
/// immersion and the ambient metric at p.
inline double minkowski_cross_check(const ambient_space& a, const point& p) {
    if (a.n != 2) throw dimension_error("flat-model cross-check needs a two-sphere base");
    if (p.on != a.total) throw dimension_error("flat-model cross-check: point on wrong chart");
    const chart_ptr c = a.total;
    const scalar_field t = field_coordinate(c, 0);
    const scalar_field rho = field_coordinate(c, 1);
    const scalar_field th = field_coordinate(c, 2);
    const scalar_field ph = field_coordinate(c, 3);
    const scalar_field one = field_constant(c, 1.0);
    const scalar_field rin = (one - 0.5 * rho) * t;
    const scalar_field rout = (one + 0.5 * rho) * t;
    const std::vector<scalar_field> F = {
        rin, rout * field_call(fn_kind::sin, th) * field_call(fn_kind::cos, ph),
        rout * field_call(fn_kind::sin, th) * field_call(fn_kind::sin, ph),
        rout * field_call(fn_kind::cos, th)};
    const int N = 4;
    std::vector<jet> Fj;
    for (const scalar_field& f : F) Fj.push_back(eval_jet(f, p, 1));
    const std::vector<double> Gv = metric_values(a.ambient, p);
    const std::array<double, 4> eta{-1.0, 1.0, 1.0, 1.0};
    double worst = 0.0;
    for (int A = 0; A < N; ++A)
        for (int B = 0; B < N; ++B) {
            double pull = 0.0;
            for (int mu = 0; mu < 4; ++mu)
                pull += eta[static_cast<std::size_t>(mu)] *
                        Fj[static_cast<std::size_t>(mu)].d1(A) *
                        Fj[static_cast<std::size_t>(mu)].d1(B);
            worst = std::max(worst, std::abs(pull - Gv[static_cast<std::size_t>(A * N + B)]));
        }
    return worst;
}

/// Flat inner product of the reference immersion with itself; equals 2ρt²
/// (and 0 on the slice, where the image lies on the lightlike cone).
inline double minkowski_cone_value(const ambient_space& a, const point& p) {
    const std::vector<double> F = minkowski_immersion(a, p);
    return -F[0] * F[0] + F[1] * F[1] + F[2] * F[2] + F[3] * F[3];
}

// ----- Moebius structure from the family ------------------------------------------------------

/// The structure whose form is P(g) = ½ g(α̇(0)·,·), after certifying the
/// compatibility hypothesis at 100 deterministic sample points:
/// tr α̇(0) = 2K for surfaces, g(α̇(0)·,·) = 2P(g) in higher dimension
/// (tolerance 1e-6).  The returned jets are exact (no finite differences).
inline moebius_structure moebius_from_alpha(const metric_field& g, const alpha_family& af) {
    if (g.on != af.base)
        throw dimension_error("moebius_from_alpha: metric and family charts differ");
    const int n = g.dim();
    sampler rng(0xc0ffee11ULL);
    double worst = 0.0;
    std::vector<double> worst_at;
    for (int s = 0; s < 100; ++s) {
        const point x = rng.sample_point(af.base);
        const std::vector<double> Adot = alpha_dot_values(af, 0.0, x);
        const std::vector<double> gv = metric_values(g, x);
        double defect = 0.0;
        if (n == 2) {
            double tr = Adot[0] + Adot[3];
            const double gauss = 0.5 * scalar_curvature(g, x);
            defect = std::abs(tr - 2.0 * gauss);
        } else {
            const std::vector<double> P = schouten(g, x);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double m = 0.0;
                    for (int k = 0; k < n; ++k)
                        m += gv[static_cast<std::size_t>(i * n + k)] *
                             Adot[static_cast<std::size_t>(k * n + j)];
                    defect = std::max(
                        defect, std::abs(m - 2.0 * P[static_cast<std::size_t>(i * n + j)]));
                }
        }
        if (defect > worst) {
            worst = defect;
            worst_at = x.x;
        }
    }
    if (worst > 1e-6)
        throw hypothesis_error(
            "family rate is not compatible with the base curvature (worst at x = " +
                detail::point_text(worst_at) + ")",
            worst);

    sym2_jet_fn source = [g, af, n](const point& x, int order) {
        const metric_jets mj = eval_metric_jets(g, x, order);
        const std::vector<jet> Adot = alpha_dot0_jets(af, x, order);
        std::vector<jet> out;
        out.reserve(static_cast<std::size_t>(n * n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                jet s = mj.G(i, 0) * Adot[static_cast<std::size_t>(j)];
                for (int k = 1; k < n; ++k)
                    s += mj.G(i, k) * Adot[static_cast<std::size_t>(k * n + j)];
                jet t = mj.G(j, 0) * Adot[static_cast<std::size_t>(i)];
                for (int k = 1; k < n; ++k)
                    t += mj.G(j, k) * Adot[static_cast<std::size_t>(k * n + i)];
                out.push_back(0.25 * (s + t));
            }
        return out;
    };
    return moebius_structure{g, std::move(source)};
}

}  // namespace camb
