/// \file ambient_test.cpp
/// \brief Product Lorentzian metric: construction pins, frame products,
///        homothety of the scaling field, closed-form connection and Ricci
///        against numeric Christoffels, fiber second fundamental form,
///        flat-model cross-check, and slice diagnostics.

#include "camb/ambient.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace camb;

// ===== reference geometries =================================================

chart_ptr flat_chart() {
    return make_chart("plane", {"x", "y"}, {interval{-1.0, 1.0}, interval{-1.0, 1.0}});
}

metric_field flat_metric(const chart_ptr& c) {
    return make_diagonal_metric(c, signature_kind::riemannian,
                                {parse_expression(c, "1"), parse_expression(c, "1")});
}

chart_ptr sphere_chart() {
    return make_chart("sphere", {"theta", "phi"},
                      {interval{0.0, 3.14159265358979323846},
                       interval{0.0, 6.28318530717958647692}});
}

metric_field sphere_metric(const chart_ptr& c) {
    return make_diagonal_metric(c, signature_kind::riemannian,
                                {parse_expression(c, "1"), parse_expression(c, "sin(theta)^2")});
}

chart_ptr s3_chart() {
    return make_chart("s3", {"chi", "theta", "phi"},
                      {interval{0.0, 3.14159265358979323846},
                       interval{0.0, 3.14159265358979323846},
                       interval{0.0, 6.28318530717958647692}});
}

metric_field s3_metric(const chart_ptr& c) {
    return make_diagonal_metric(c, signature_kind::riemannian,
                                {parse_expression(c, "1"), parse_expression(c, "sin(chi)^2"),
                                 parse_expression(c, "sin(chi)^2*sin(theta)^2")});
}

// ===== family builders ======================================================

/// Family f(rho) * Id with a scalar factor parsed on the band chart.
alpha_family scaled_identity_family(const chart_ptr& base, double epsilon,
                                    const std::string& factor) {
    const chart_ptr band = make_alpha_chart(base, epsilon);
    const int n = base->dim();
    std::vector<scalar_field> comp;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            comp.push_back(i == j ? parse_expression(band, factor)
                                  : field_constant(band, 0.0));
    return make_alpha_family(base, epsilon, comp);
}

/// Family from explicit component texts (row-major).
alpha_family family_from_texts(const chart_ptr& base, double epsilon,
                               const std::vector<std::string>& texts) {
    const chart_ptr band = make_alpha_chart(base, epsilon);
    std::vector<scalar_field> comp;
    for (const std::string& t : texts) comp.push_back(parse_expression(band, t));
    return make_alpha_family(base, epsilon, comp);
}

ambient_space flat_identity_space() {
    const auto c = flat_chart();
    return build_ambient(flat_metric(c), identity_alpha(c, 1.0));
}

ambient_space sphere_space() {
    const auto c = sphere_chart();
    return build_ambient(sphere_metric(c), scaled_identity_family(c, 2.0, "(1+rho/2)^2"));
}

ambient_space s3_space() {
    const auto c = s3_chart();
    return build_ambient(s3_metric(c), scaled_identity_family(c, 2.0, "(1+rho/2)^2"));
}

/// Flat base with a trace-free, x-dependent shear family (non-umbilical).
ambient_space shear_space() {
    const auto c = flat_chart();
    return build_ambient(flat_metric(c),
                         family_from_texts(c, 0.4, {"1+2*rho*x", "0", "0", "1-2*rho*x"}));
}

std::vector<double> random_vector(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = d(rng);
    return v;
}

double ambient_inner(const ambient_space& a, const point& p, const std::vector<double>& u,
                     const std::vector<double>& w) {
    const int N = a.total_dim();
    const std::vector<double> gv = metric_values(a.ambient, p);
    double s = 0.0;
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y)
            s += gv[static_cast<std::size_t>(x * N + y)] * u[static_cast<std::size_t>(x)] *
                 w[static_cast<std::size_t>(y)];
    return s;
}

// ===== construction =========================================================

TEST(ambient_build, flat_identity_matrix_pin) {
    const ambient_space a = flat_identity_space();
    ASSERT_EQ(a.total->coords[0], "t");
    ASSERT_EQ(a.total->coords[1], "rho");
    ASSERT_EQ(a.total->coords[2], "x");
    ASSERT_EQ(a.total_dim(), 4);

    const double t = 1.7, rho = 0.35;
    const point p = make_point(a.total, {t, rho, 0.2, -0.6});
    const std::vector<double> gv = metric_values(a.ambient, p);
    const double expected[4][4] = {{2.0 * rho, t, 0.0, 0.0},
                                   {t, 0.0, 0.0, 0.0},
                                   {0.0, 0.0, t * t, 0.0},
                                   {0.0, 0.0, 0.0, t * t}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            EXPECT_NEAR(gv[static_cast<std::size_t>(i * 4 + j)], expected[i][j], 1e-15)
                << "entry " << i << "," << j;
}

TEST(ambient_build, scale_coordinate_is_positive_half_line) {
    const ambient_space a = flat_identity_space();
    const point x = make_point(a.base, {0.1, 0.1});
    EXPECT_NO_THROW(lift_point(a, 42.0, 0.0, x));
    EXPECT_THROW(lift_point(a, -1.0, 0.0, x), bounds_error);
    EXPECT_THROW(lift_point(a, 0.0, 0.0, x), bounds_error);
    EXPECT_THROW(lift_point(a, 1.0, 2.0, x), bounds_error);  // outside the band
}

TEST(ambient_build, sphere_lower_block_is_scaled_metric) {
    const ambient_space a = sphere_space();
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> dt(0.3, 4.0), dr(-1.9, 1.9), dth(0.2, 2.9),
        dph(0.1, 6.1);
    for (int s = 0; s < 20; ++s) {
        const double t = dt(rng), rho = dr(rng), th = dth(rng);
        const point p = make_point(a.total, {t, rho, th, dph(rng)});
        const std::vector<double> gv = metric_values(a.ambient, p);
        const double f = t * t * (1.0 + 0.5 * rho) * (1.0 + 0.5 * rho);
        EXPECT_NEAR(gv[2 * 4 + 2], f, 1e-12);
        EXPECT_NEAR(gv[3 * 4 + 3], f * std::sin(th) * std::sin(th), 1e-12);
        EXPECT_NEAR(gv[2 * 4 + 3], 0.0, 1e-15);
        EXPECT_TRUE(signature_matches(a.ambient, p));
    }
}

TEST(ambient_build, rejects_family_not_identity_at_zero) {
    const auto c = flat_chart();
    try {
        scaled_identity_family(c, 1.0, "1.1+rho");
        FAIL() << "expected hypothesis_error";
    } catch (const hypothesis_error& e) {
        EXPECT_NEAR(e.defect(), 0.1, 1e-12);
    }
}

TEST(ambient_build, rejects_non_self_adjoint_family) {
    const auto c = flat_chart();
    const alpha_family af = family_from_texts(c, 1.0, {"1", "2*rho", "0", "1"});
    try {
        build_ambient(flat_metric(c), af);
        FAIL() << "expected hypothesis_error";
    } catch (const hypothesis_error& e) {
        EXPECT_NE(std::string(e.what()).find("self-adjoint"), std::string::npos);
        EXPECT_GT(e.defect(), 1e-10);
    }
}

TEST(ambient_build, rejects_family_losing_positivity) {
    const auto c = flat_chart();
    const alpha_family af = scaled_identity_family(c, 1.0, "1+3*rho");
    try {
        build_ambient(flat_metric(c), af);
        FAIL() << "expected hypothesis_error";
    } catch (const hypothesis_error& e) {
        EXPECT_NE(std::string(e.what()).find("positivity"), std::string::npos);
        EXPECT_LT(e.defect(), 1e-8);
    }
}

TEST(ambient_build, rejects_mismatched_or_non_riemannian_input) {
    const auto c = flat_chart();
    const auto other = sphere_chart();
    EXPECT_THROW(build_ambient(sphere_metric(other), identity_alpha(c, 1.0)), dimension_error);
    const metric_field bad = make_diagonal_metric(
        c, signature_kind::lorentzian, {parse_expression(c, "0-1"), parse_expression(c, "1")});
    EXPECT_THROW(build_ambient(bad, identity_alpha(c, 1.0)), dimension_error);
}

// ===== family evaluation helpers ============================================

TEST(alpha_family_ops, values_rate_and_slice_jets) {
    const auto c = sphere_chart();
    const alpha_family af = scaled_identity_family(c, 2.0, "(1+rho/2)^2");
    const point x = make_point(c, {1.1, 2.3});

    const std::vector<double> A = alpha_values(af, 0.6, x);
    const std::vector<double> Adot = alpha_dot_values(af, 0.6, x);
    const double f = 1.3 * 1.3;
    EXPECT_NEAR(A[0], f, 1e-14);
    EXPECT_NEAR(A[3], f, 1e-14);
    EXPECT_NEAR(A[1], 0.0, 1e-15);
    EXPECT_NEAR(Adot[0], 1.3, 1e-13);  // d/drho (1+rho/2)^2 = 1+rho/2
    EXPECT_NEAR(Adot[3], 1.3, 1e-13);

    const std::vector<jet> J = alpha_dot0_jets(af, x, 1);
    ASSERT_EQ(J.size(), 4u);
    EXPECT_NEAR(J[0].value(), 1.0, 1e-14);
    EXPECT_NEAR(J[0].d1(0), 0.0, 1e-14);
    EXPECT_NEAR(J[0].d1(1), 0.0, 1e-14);
    EXPECT_EQ(J[0].dim(), 2);

    const alpha_family id = identity_alpha(c, 1.0);
    const std::vector<double> Aid = alpha_values(id, 0.4, x);
    const std::vector<double> Adot_id = alpha_dot_values(id, 0.4, x);
    EXPECT_EQ(Aid[0], 1.0);
    EXPECT_EQ(Adot_id[0], 0.0);
}

TEST(alpha_family_ops, shear_family_rate_depends_on_position) {
    const auto c = flat_chart();
    const alpha_family af =
        family_from_texts(c, 0.4, {"1+2*rho*x", "0", "0", "1-2*rho*x"});
    const point x = make_point(c, {0.5, -0.3});
    const std::vector<double> Adot = alpha_dot_values(af, 0.1, x);
    EXPECT_NEAR(Adot[0], 1.0, 1e-14);   // 2x at x = 0.5
    EXPECT_NEAR(Adot[3], -1.0, 1e-14);
    const std::vector<jet> J = alpha_dot0_jets(af, x, 1);
    EXPECT_NEAR(J[0].d1(0), 2.0, 1e-14);  // d/dx (2x)
    EXPECT_NEAR(J[0].d1(1), 0.0, 1e-14);
    EXPECT_NEAR(J[3].d1(0), -2.0, 1e-14);
}

// ===== distinguished fields =================================================

TEST(ambient_frames, lightcone_complement_products) {
    const ambient_space a = sphere_space();
    sampler rng(11);
    for (int s = 0; s < 100; ++s) {
        const point p = sample_band_point(rng, a);
        const std::vector<double> T = frame_T(a, p);
        const std::vector<double> E = frame_E(a, p);
        EXPECT_NEAR(ambient_inner(a, p, T, T), -2.0, 1e-12);
        EXPECT_NEAR(ambient_inner(a, p, E, E), 2.0, 1e-12);
        EXPECT_NEAR(ambient_inner(a, p, T, E), 0.0, 1e-12);
    }
}

TEST(ambient_frames, scaling_field_is_homothetic) {
    for (const ambient_space& a : {flat_identity_space(), sphere_space()}) {
        const tensor_field Z = fundamental_field(a);
        sampler rng(17);
        for (int s = 0; s < 200; ++s) {
            const point p = sample_band_point(rng, a);
            const std::vector<double> lie = lie_derivative_metric(a.ambient, Z, p);
            const std::vector<double> gv = metric_values(a.ambient, p);
            for (std::size_t k = 0; k < gv.size(); ++k)
                EXPECT_NEAR(lie[k], 2.0 * gv[k], 1e-9) << "entry " << k;
        }
    }
}

TEST(ambient_frames, canonical_one_form_and_its_exterior_derivative) {
    for (const ambient_space& a : {flat_identity_space(), sphere_space()}) {
        const int N = a.total_dim();
        sampler rng(23);
        for (int s = 0; s < 100; ++s) {
            const point p = sample_band_point(rng, a);
            const auto [om, dom] = omega_and_exterior_derivative(a, p);
            const double t = p.x[0], rho = p.x[1];
            EXPECT_NEAR(om[0], 2.0 * t * rho, 1e-12);
            EXPECT_NEAR(om[1], t * t, 1e-12);
            for (int k = 2; k < N; ++k) EXPECT_EQ(om[static_cast<std::size_t>(k)], 0.0);
            for (int x = 0; x < N; ++x)
                for (int y = 0; y < N; ++y)
                    EXPECT_NEAR(dom[static_cast<std::size_t>(x * N + y)], 0.0, 1e-10);
        }
    }
}

// ===== connection ===========================================================

TEST(ambient_connection, closed_forms_match_numeric_christoffels) {
    std::mt19937 vrng(31);
    for (const ambient_space& a : {sphere_space(), shear_space()}) {
        const int n = a.n;
        const int N = a.total_dim();
        std::vector<double> et(static_cast<std::size_t>(N), 0.0), erho = et;
        et[0] = 1.0;
        erho[1] = 1.0;
        sampler rng(37);
        for (int s = 0; s < 40; ++s) {
            const point p = sample_band_point(rng, a);
            const std::vector<double> V = random_vector(vrng, n);

            auto check = [&](connection_case which, const std::vector<double>& X,
                             const std::vector<double>& Y, const std::vector<double>& bv,
                             const std::vector<double>& bw) {
                const std::vector<double> closed = closed_form_connection(a, p, which, bv, bw);
                const std::vector<double> numeric = christoffel_apply(a.ambient, p, X, Y);
                for (int k = 0; k < N; ++k)
                    EXPECT_NEAR(closed[static_cast<std::size_t>(k)],
                                numeric[static_cast<std::size_t>(k)], 1e-8)
                        << "case " << static_cast<int>(which) << " comp " << k;
            };
            check(connection_case::dt_dt, et, et, {}, {});
            check(connection_case::drho_drho, erho, erho, {}, {});
            check(connection_case::dt_drho, et, erho, {}, {});
            check(connection_case::dt_lift, et, lift_vector(a, V), V, {});
            check(connection_case::drho_lift, erho, lift_vector(a, V), V, {});
        }
        // Lift-lift is a slice formula.
        sampler srng(41);
        for (int s = 0; s < 40; ++s) {
            const point p = sample_slice_point(srng, a);
            const std::vector<double> V = random_vector(vrng, n);
            const std::vector<double> W = random_vector(vrng, n);
            const std::vector<double> closed =
                closed_form_connection(a, p, connection_case::lift_lift, V, W);
            const std::vector<double> numeric =
                christoffel_apply(a.ambient, p, lift_vector(a, V), lift_vector(a, W));
            for (int k = 0; k < N; ++k)
                EXPECT_NEAR(closed[static_cast<std::size_t>(k)],
                            numeric[static_cast<std::size_t>(k)], 1e-8);
        }
    }
}

TEST(ambient_connection, pins) {
    const ambient_space a = flat_identity_space();
    const point x = make_point(a.base, {0.2, -0.4});

    // ∇_∂t ∂ρ = (1/t) ∂ρ at t = 2.
    const point p = lift_point(a, 2.0, 0.3, x);
    const std::vector<double> mixed =
        closed_form_connection(a, p, connection_case::dt_drho);
    EXPECT_EQ(mixed[0], 0.0);
    EXPECT_NEAR(mixed[1], 0.5, 1e-15);
    EXPECT_EQ(mixed[2], 0.0);

    // Identity family: ∇_∂ρ V = 0.
    const std::vector<double> rad =
        closed_form_connection(a, p, connection_case::drho_lift, {0.7, -0.2});
    for (double comp : rad) EXPECT_NEAR(comp, 0.0, 1e-15);

    // Flat base, identity family: ∇_V W = −g(V,W) ∂ρ on the slice.
    const point q = lift_point(a, 1.5, 0.0, x);
    const std::vector<double> vw =
        closed_form_connection(a, q, connection_case::lift_lift, {0.7, -0.2}, {0.5, 0.3});
    EXPECT_NEAR(vw[0], 0.0, 1e-14);
    EXPECT_NEAR(vw[1], -(0.7 * 0.5 + (-0.2) * 0.3), 1e-14);
    EXPECT_NEAR(vw[2], 0.0, 1e-14);
    EXPECT_NEAR(vw[3], 0.0, 1e-14);
}

TEST(ambient_connection, lift_lift_requires_slice) {
    const ambient_space a = flat_identity_space();
    const point p = make_point(a.total, {1.0, 0.3, 0.1, 0.1});
    EXPECT_THROW(closed_form_connection(a, p, connection_case::lift_lift, {1.0, 0.0}, {0.0, 1.0}),
                 bounds_error);
    EXPECT_THROW(closed_form_connection(a, p, connection_case::dt_lift, {1.0}), dimension_error);
}

// ===== Ricci along the slice ================================================

TEST(ambient_ricci, vanishes_for_compatible_families) {
    std::mt19937 vrng(43);
    for (const ambient_space& a : {flat_identity_space(), sphere_space(), s3_space()}) {
        sampler rng(47);
        for (int s = 0; s < 60; ++s) {
            const point p = sample_slice_point(rng, a);
            const std::vector<double> V = random_vector(vrng, a.n);
            const std::vector<double> W = random_vector(vrng, a.n);
            EXPECT_NEAR(ricci_along_Q(a, p, V, W), 0.0, 1e-10);
        }
    }
}

TEST(ambient_ricci, closed_form_matches_numeric_curvature) {
    // (1+rho)^2 on the round 3-sphere: Ric restricted to the slice is −2g,
    // nonzero, so the comparison is not between two zeros.
    const auto c = s3_chart();
    const ambient_space a =
        build_ambient(s3_metric(c), scaled_identity_family(c, 0.5, "(1+rho)^2"));
    std::mt19937 vrng(53);
    sampler rng(59);
    for (int s = 0; s < 15; ++s) {
        const point p = sample_slice_point(rng, a);
        const point x = base_of(a, p);
        const std::vector<double> gv = metric_values(a.g, x);
        const std::vector<double> ric_amb = ricci(a.ambient, p);
        const std::vector<double> V = random_vector(vrng, a.n);
        const std::vector<double> W = random_vector(vrng, a.n);

        double numeric = 0.0, g_vw = 0.0;
        const int N = a.total_dim();
        for (int i = 0; i < a.n; ++i)
            for (int j = 0; j < a.n; ++j) {
                numeric += ric_amb[static_cast<std::size_t>((2 + i) * N + (2 + j))] *
                           V[static_cast<std::size_t>(i)] * W[static_cast<std::size_t>(j)];
                g_vw += gv[static_cast<std::size_t>(i * a.n + j)] *
                        V[static_cast<std::size_t>(i)] * W[static_cast<std::size_t>(j)];
            }
        const double closed = ricci_along_Q(a, p, V, W);
        EXPECT_NEAR(closed, numeric, 1e-7);
        EXPECT_NEAR(closed, -2.0 * g_vw, 1e-9);
    }
}

TEST(ambient_ricci, scale_direction_row_vanishes) {
    for (const ambient_space& a : {sphere_space(), s3_space()}) {
        const int N = a.total_dim();
        sampler rng(61);
        for (int s = 0; s < 15; ++s) {
            const point p = sample_band_point(rng, a);
            const std::vector<double> ric_amb = ricci(a.ambient, p);
            for (int A = 0; A < N; ++A)
                EXPECT_NEAR(ric_amb[static_cast<std::size_t>(A)], 0.0, 1e-8) << "column " << A;
        }
    }
}

TEST(ambient_ricci, mixed_scale_band_identity) {
    // G(R(∂t,V)W, ∂ρ) + G(R(∂ρ,V)W, ∂t) = 0 for lifted V, W.
    const ambient_space a = sphere_space();
    const int N = a.total_dim();
    std::mt19937 vrng(67);
    sampler rng(71);
    for (int s = 0; s < 25; ++s) {
        const point p = sample_band_point(rng, a);
        const curvature_slice cs = riemann(a.ambient, p);
        const std::vector<double> gv = metric_values(a.ambient, p);
        const std::vector<double> V = random_vector(vrng, a.n);
        const std::vector<double> W = random_vector(vrng, a.n);
        double total = 0.0;
        for (int A = 0; A < N; ++A) {
            double comp_t = 0.0, comp_rho = 0.0;
            for (int i = 0; i < a.n; ++i)
                for (int j = 0; j < a.n; ++j) {
                    comp_t += cs.riem(A, 2 + j, 0, 2 + i) * V[static_cast<std::size_t>(i)] *
                              W[static_cast<std::size_t>(j)];
                    comp_rho += cs.riem(A, 2 + j, 1, 2 + i) * V[static_cast<std::size_t>(i)] *
                                W[static_cast<std::size_t>(j)];
                }
            total += comp_t * gv[static_cast<std::size_t>(A * N + 1)] +
                     comp_rho * gv[static_cast<std::size_t>(A * N + 0)];
        }
        EXPECT_NEAR(total, 0.0, 1e-8);
    }
}

TEST(ambient_ricci, identity_family_on_sphere_violates) {
    const auto c = sphere_chart();
    const ambient_space a = build_ambient(sphere_metric(c), identity_alpha(c, 1.0));
    sampler rng(73);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const point p = sample_slice_point(rng, a);
        // Unit vector along ∂θ: the closed form gives Ric = g on the slice.
        const double defect = std::abs(ricci_along_Q(a, p, {1.0, 0.0}, {1.0, 0.0}) - 0.0);
        worst = std::max(worst, defect);
        EXPECT_NEAR(ricci_along_Q(a, p, {1.0, 0.0}, {1.0, 0.0}), 1.0, 1e-10);
    }
    EXPECT_GE(worst, 0.5);
}

TEST(ambient_ricci, off_slice_throws) {
    const ambient_space a = flat_identity_space();
    const point p = make_point(a.total, {1.0, 0.2, 0.0, 0.0});
    EXPECT_THROW(ricci_along_Q(a, p, {1.0, 0.0}, {0.0, 1.0}), bounds_error);
}

// ===== fiber geometry =======================================================

TEST(ambient_fibers, closed_form_matches_normal_projection) {
    std::mt19937 vrng(79);
    for (const ambient_space& a : {sphere_space(), shear_space()}) {
        sampler rng(83);
        for (int s = 0; s < 60; ++s) {
            const point p = sample_band_point(rng, a);
            const std::vector<double> V = random_vector(vrng, a.n);
            const std::vector<double> W = random_vector(vrng, a.n);
            const std::vector<double> closed = fiber_second_fundamental_form(a, p, V, W);
            const std::vector<double> numeric = fiber_ii_numeric(a, p, V, W);
            for (int k = 0; k < a.total_dim(); ++k)
                EXPECT_NEAR(closed[static_cast<std::size_t>(k)],
                            numeric[static_cast<std::size_t>(k)], 1e-7);
        }
    }
}

TEST(ambient_fibers, identity_family_pin) {
    const ambient_space a = flat_identity_space();
    const point p = make_point(a.total, {1.7, 0.25, 0.1, -0.3});
    const std::vector<double> V{0.6, -0.1}, W{0.4, 0.8};
    const std::vector<double> ii = fiber_second_fundamental_form(a, p, V, W);
    // α̇ = 0, so II = −(1/t²) G(V,W) ∂ρ = −(V·W) ∂ρ for the flat base.
    EXPECT_NEAR(ii[0], 0.0, 1e-14);
    EXPECT_NEAR(ii[1], -(0.6 * 0.4 + (-0.1) * 0.8), 1e-13);
    EXPECT_NEAR(ii[2], 0.0, 1e-14);
    EXPECT_NEAR(fiber_umbilicality_defect(a, p), 0.0, 1e-12);
}

TEST(ambient_fibers, conformal_family_slice_pin) {
    const ambient_space a = sphere_space();
    const point x = make_point(a.base, {1.2, 0.8});
    const point p = slice_lift(a, 1.0, x);
    std::mt19937 vrng(89);
    for (int s = 0; s < 10; ++s) {
        const std::vector<double> V = random_vector(vrng, 2);
        const std::vector<double> W = random_vector(vrng, 2);
        const double gvw = ambient_inner(a, p, lift_vector(a, V), lift_vector(a, W));
        const std::vector<double> ii = fiber_second_fundamental_form(a, p, V, W);
        // α⁻¹α̇ = Id at ρ = 0: II = −½ G(V,W) ∂t − G(V,W) ∂ρ at t = 1.
        EXPECT_NEAR(ii[0], -0.5 * gvw, 1e-12);
        EXPECT_NEAR(ii[1], -gvw, 1e-12);
        EXPECT_NEAR(ii[2], 0.0, 1e-14);
        EXPECT_NEAR(ii[3], 0.0, 1e-14);
    }
    // A conformal family is umbilical at every band point.
    sampler rng(97);
    for (int s = 0; s < 20; ++s)
        EXPECT_NEAR(fiber_umbilicality_defect(a, sample_band_point(rng, a)), 0.0, 1e-12);
}

TEST(ambient_fibers, shear_family_is_non_umbilical_with_exact_trace_split) {
    const ambient_space a = shear_space();
    const point probe = make_point(a.total, {1.0, 0.2, 0.5, 0.0});
    EXPECT_GT(fiber_umbilicality_defect(a, probe), 1e-3);

    // II(V,W) − G(V,W) N̄ = G(D₀V, W) · (−1/(2t), ρ/t², 0, …) with
    // D = α⁻¹α̇ and D₀ its trace-free part; N̄ is the fiber mean normal.
    std::mt19937 vrng(101);
    for (const ambient_space& space : {sphere_space(), shear_space()}) {
        const int n = space.n;
        const int N = space.total_dim();
        sampler rng(103);
        for (int s = 0; s < 40; ++s) {
            const point p = sample_band_point(rng, space);
            const double t = p.x[0], rho = p.x[1];
            const point x = base_of(space, p);
            const std::vector<double> A = alpha_values(space.alpha, rho, x);
            const std::vector<double> Adot = alpha_dot_values(space.alpha, rho, x);
            const std::vector<double> Ainv = invert_matrix(A, n, "family");
            std::vector<double> D(static_cast<std::size_t>(n * n), 0.0);
            double trD = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double d = 0.0;
                    for (int k = 0; k < n; ++k)
                        d += Ainv[static_cast<std::size_t>(i * n + k)] *
                             Adot[static_cast<std::size_t>(k * n + j)];
                    D[static_cast<std::size_t>(i * n + j)] = d;
                    if (i == j) trD += d;
                }
            const std::vector<double> V = random_vector(vrng, n);
            const std::vector<double> W = random_vector(vrng, n);
            std::vector<double> D0V(static_cast<std::size_t>(n), 0.0);
            for (int i = 0; i < n; ++i) {
                double d = -trD / n * V[static_cast<std::size_t>(i)];
                for (int j = 0; j < n; ++j)
                    d += D[static_cast<std::size_t>(i * n + j)] * V[static_cast<std::size_t>(j)];
                D0V[static_cast<std::size_t>(i)] = d;
            }
            const double g_d0vw =
                ambient_inner(space, p, lift_vector(space, D0V), lift_vector(space, W));
            const double g_vw =
                ambient_inner(space, p, lift_vector(space, V), lift_vector(space, W));

            // Independent mean normal from the derived closed form.
            std::vector<double> mean(static_cast<std::size_t>(N), 0.0);
            mean[0] = -trD / (2.0 * t * n);
            mean[1] = -(1.0 - rho * trD / n) / (t * t);

            const std::vector<double> ii = fiber_second_fundamental_form(space, p, V, W);
            std::vector<double> expected(static_cast<std::size_t>(N), 0.0);
            expected[0] = g_vw * mean[0] + g_d0vw * (-1.0 / (2.0 * t));
            expected[1] = g_vw * mean[1] + g_d0vw * (rho / (t * t));
            for (int k = 0; k < N; ++k)
                EXPECT_NEAR(ii[static_cast<std::size_t>(k)],
                            expected[static_cast<std::size_t>(k)], 1e-8);
        }
    }
}

// ===== flat-model cross-check ===============================================

TEST(ambient_minkowski, pullback_reproduces_product_metric) {
    const ambient_space a = sphere_space();
    sampler rng(107);
    for (int s = 0; s < 100; ++s)
        EXPECT_NEAR(minkowski_cross_check(a, sample_band_point(rng, a)), 0.0, 1e-9);
}

TEST(ambient_minkowski, cone_value_and_scale_equivariance) {
    const ambient_space a = sphere_space();
    sampler rng(109);
    for (int s = 0; s < 50; ++s) {
        const point p = sample_band_point(rng, a);
        const double t = p.x[0], rho = p.x[1];
        EXPECT_NEAR(minkowski_cone_value(a, p), 2.0 * rho * t * t, 1e-10);

        const double tau = 1.7;
        const point q = make_point(a.total, {tau * t, rho, p.x[2], p.x[3]});
        const std::vector<double> F = minkowski_immersion(a, p);
        const std::vector<double> Fq = minkowski_immersion(a, q);
        for (int mu = 0; mu < 4; ++mu)
            EXPECT_NEAR(Fq[static_cast<std::size_t>(mu)],
                        tau * F[static_cast<std::size_t>(mu)], 1e-12);
    }
    // On the slice the image lies on the lightlike cone.
    const point x = make_point(a.base, {0.9, 1.4});
    EXPECT_NEAR(minkowski_cone_value(a, slice_lift(a, 2.2, x)), 0.0, 1e-12);
}

TEST(ambient_minkowski, requires_surface_base) {
    const ambient_space a = s3_space();
    sampler rng(113);
    EXPECT_THROW(minkowski_cross_check(a, sample_band_point(rng, a)), dimension_error);
}

// ===== scale slice ==========================================================

TEST(ambient_slice, pullback_is_scaled_base_metric) {
    for (const ambient_space& a : {sphere_space(), s3_space()}) {
        sampler rng(127);
        for (int s = 0; s < 50; ++s) {
            const point x = rng.sample_point(a.base);
            EXPECT_NEAR(slice_pullback_defect(a, rng.sample_t(), x), 0.0, 1e-10);
        }
    }
    const ambient_space a = flat_identity_space();
    const scale_slice slice = make_scale_slice(a);
    const point x = make_point(a.base, {0.3, -0.7});
    const point p = slice.embed(1.4, x);
    EXPECT_EQ(p.x[0], 1.4);
    EXPECT_EQ(p.x[1], 0.0);
    const point back = base_of(a, p);
    EXPECT_EQ(back.x[0], 0.3);
    EXPECT_EQ(back.x[1], -0.7);
}

TEST(ambient_slice, radical_is_one_dimensional_along_scale_direction) {
    for (const ambient_space& a : {sphere_space(), s3_space()}) {
        sampler rng(131);
        for (int s = 0; s < 25; ++s) {
            const radical_diagnosis d = slice_radical(a, rng.sample_t(), rng.sample_point(a.base));
            EXPECT_LE(d.smallest, 1e-9);
            EXPECT_GT(d.next, 1e-6);
            EXPECT_GT(d.alignment, 1.0 - 1e-9);
        }
    }
}

// ===== structure induced by the family ======================================

TEST(family_structure, conformal_sphere_satisfies_trace_condition) {
    const auto c = sphere_chart();
    const metric_field g = sphere_metric(c);
    const moebius_structure m = moebius_from_alpha(g, scaled_identity_family(c, 2.0, "(1+rho/2)^2"));
    sampler rng(137);
    EXPECT_LE(moebius_trace_defect(m, rng.sample_points(c, 30)), 1e-10);

    // α̇(0) = Id, so the induced form is g/2.
    const point x = make_point(c, {1.3, 0.4});
    const std::vector<jet> P = m.base_tensor(x, 0);
    const std::vector<double> gv = metric_values(g, x);
    for (int k = 0; k < 4; ++k)
        EXPECT_NEAR(P[static_cast<std::size_t>(k)].value(), 0.5 * gv[static_cast<std::size_t>(k)],
                    1e-13);
}

TEST(family_structure, s3_family_form_matches_schouten) {
    const auto c = s3_chart();
    const metric_field g = s3_metric(c);
    const moebius_structure m = moebius_from_alpha(g, scaled_identity_family(c, 2.0, "(1+rho/2)^2"));
    sampler rng(139);
    for (const point& x : rng.sample_points(c, 15)) {
        const std::vector<jet> P = m.base_tensor(x, 1);
        const std::vector<double> S = schouten(g, x);
        for (int k = 0; k < 9; ++k)
            EXPECT_NEAR(P[static_cast<std::size_t>(k)].value(), S[static_cast<std::size_t>(k)],
                        1e-10);
    }
}

TEST(family_structure, shear_family_form_and_cotton_pin) {
    const auto c = flat_chart();
    const metric_field g = flat_metric(c);
    const moebius_structure m = moebius_from_alpha(
        g, family_from_texts(c, 0.4, {"1+2*rho*x", "0", "0", "1-2*rho*x"}));

    const point x = make_point(c, {0.37, -0.58});
    const std::vector<jet> P = m.base_tensor(x, 1);
    EXPECT_NEAR(P[0].value(), 0.37, 1e-13);   // P = diag(x, −x)
    EXPECT_NEAR(P[3].value(), -0.37, 1e-13);
    EXPECT_NEAR(P[1].value(), 0.0, 1e-14);
    EXPECT_NEAR(P[0].d1(0), 1.0, 1e-13);
    EXPECT_NEAR(P[0].d1(1), 0.0, 1e-13);
    EXPECT_NEAR(P[3].d1(0), -1.0, 1e-13);

    // The induced structure feeds straight into the conformal machinery.
    const std::vector<double> C = cotton_york_components(m, x);
    const int n = 2;
    auto at = [&](int u, int v, int w) {
        return C[static_cast<std::size_t>((u * n + v) * n + w)];
    };
    EXPECT_NEAR(at(0, 1, 1), -1.0, 1e-12);
    EXPECT_NEAR(at(1, 0, 1), 1.0, 1e-12);
    EXPECT_NEAR(at(0, 1, 0), 0.0, 1e-12);
}

TEST(family_structure, flat_identity_form_vanishes) {
    const auto c = flat_chart();
    const moebius_structure m = moebius_from_alpha(flat_metric(c), identity_alpha(c, 1.0));
    const std::vector<jet> P = m.base_tensor(make_point(c, {0.1, 0.2}), 1);
    for (const jet& j : P) {
        EXPECT_EQ(j.value(), 0.0);
        EXPECT_EQ(j.d1(0), 0.0);
    }
}

TEST(family_structure, incompatible_rate_throws_with_witness_defect) {
    const auto c = sphere_chart();
    try {
        moebius_from_alpha(sphere_metric(c), identity_alpha(c, 1.0));
        FAIL() << "expected hypothesis_error";
    } catch (const hypothesis_error& e) {
        // tr α̇(0) = 0 but twice the Gauss curvature is 2.
        EXPECT_NEAR(e.defect(), 2.0, 1e-9);
    }
}

}  // namespace
