/// \file jet_test.cpp
/// \brief Unit and property tests for truncated Taylor (jet) arithmetic.
///
/// Expected derivative values are hand-derived for small closed forms and
/// frozen here; property tests check the algebra laws (linearity, the
/// Leibniz rule, symmetry of mixed partials, order truncation).

#include "camb/jet.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using camb::jet;

constexpr double kTight = 1e-12;

// ===== seeding and accessors ===============================================

TEST(jet, constant_has_zero_derivatives) {
    const jet c = jet::constant(2.5, 3, 3);
    EXPECT_EQ(c.dim(), 3);
    EXPECT_EQ(c.order(), 3);
    EXPECT_DOUBLE_EQ(c.value(), 2.5);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(c.d1(i), 0.0);
        for (int j = 0; j < 3; ++j) {
            EXPECT_DOUBLE_EQ(c.d2(i, j), 0.0);
            for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(c.d3(i, j, k), 0.0);
        }
    }
}

TEST(jet, variable_seeds_unit_gradient) {
    const jet x = jet::variable(1.25, 2, 2, 0);
    EXPECT_DOUBLE_EQ(x.value(), 1.25);
    EXPECT_DOUBLE_EQ(x.d1(0), 1.0);
    EXPECT_DOUBLE_EQ(x.d1(1), 0.0);
    EXPECT_DOUBLE_EQ(x.d2(0, 0), 0.0);
}

TEST(jet, variable_index_out_of_range_throws) {
    EXPECT_THROW(jet::variable(0.0, 2, 2, 2), camb::dimension_error);
    EXPECT_THROW(jet::variable(0.0, 2, 2, -1), camb::dimension_error);
}

TEST(jet, dimension_above_capacity_throws) {
    EXPECT_THROW(jet::constant(0.0, camb::kMaxJetVars + 1, 1), camb::dimension_error);
}

// ===== polynomial exactness ================================================

// f(x, y) = x^2 y + 3 y at (2, -1).
// f = -7, f_x = 2xy = -4, f_y = x^2+3 = 7, f_xx = 2y = -2, f_xy = 2x = 4,
// f_yy = 0, f_xxy = 2, all other third partials 0.
TEST(jet, polynomial_derivatives_are_exact) {
    const jet x = jet::variable(2.0, 2, 3, 0);
    const jet y = jet::variable(-1.0, 2, 3, 1);
    const jet f = x * x * y + 3.0 * y;

    EXPECT_DOUBLE_EQ(f.value(), -7.0);
    EXPECT_DOUBLE_EQ(f.d1(0), -4.0);
    EXPECT_DOUBLE_EQ(f.d1(1), 7.0);
    EXPECT_DOUBLE_EQ(f.d2(0, 0), -2.0);
    EXPECT_DOUBLE_EQ(f.d2(0, 1), 4.0);
    EXPECT_DOUBLE_EQ(f.d2(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(f.d3(0, 0, 1), 2.0);
    EXPECT_DOUBLE_EQ(f.d3(0, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(f.d3(0, 1, 1), 0.0);
    EXPECT_DOUBLE_EQ(f.d3(1, 1, 1), 0.0);
}

// f(x, y) = x / y at (1, 2).
// f = 1/2, f_x = 1/y = 1/2, f_y = -x/y^2 = -1/4, f_xy = -1/y^2 = -1/4,
// f_yy = 2x/y^3 = 1/4, f_xyy = 2/y^3 = 1/4, f_yyy = -6x/y^4 = -3/8.
TEST(jet, quotient_derivatives_are_exact) {
    const jet x = jet::variable(1.0, 2, 3, 0);
    const jet y = jet::variable(2.0, 2, 3, 1);
    const jet f = x / y;

    EXPECT_NEAR(f.value(), 0.5, kTight);
    EXPECT_NEAR(f.d1(0), 0.5, kTight);
    EXPECT_NEAR(f.d1(1), -0.25, kTight);
    EXPECT_NEAR(f.d2(0, 0), 0.0, kTight);
    EXPECT_NEAR(f.d2(0, 1), -0.25, kTight);
    EXPECT_NEAR(f.d2(1, 1), 0.25, kTight);
    EXPECT_NEAR(f.d3(0, 1, 1), 0.25, kTight);
    EXPECT_NEAR(f.d3(1, 1, 1), -0.375, kTight);
    EXPECT_NEAR(f.d3(0, 0, 0), 0.0, kTight);
    EXPECT_NEAR(f.d3(0, 0, 1), 0.0, kTight);
}

// ===== elementary functions ================================================

// g(x) = exp(sin(x)) at 0: successive derivatives 1, 1, 1, 0.
TEST(jet, exp_of_sin_composition) {
    const jet x = jet::variable(0.0, 1, 3, 0);
    const jet g = exp(sin(x));
    EXPECT_NEAR(g.value(), 1.0, kTight);
    EXPECT_NEAR(g.d1(0), 1.0, kTight);
    EXPECT_NEAR(g.d2(0, 0), 1.0, kTight);
    EXPECT_NEAR(g.d3(0, 0, 0), 0.0, kTight);
}

TEST(jet, sqrt_derivatives) {
    // sqrt at 4: value 2, then 1/4, -1/32, 3/256.
    const jet f = sqrt(jet::variable(4.0, 1, 3, 0));
    EXPECT_NEAR(f.value(), 2.0, kTight);
    EXPECT_NEAR(f.d1(0), 0.25, kTight);
    EXPECT_NEAR(f.d2(0, 0), -1.0 / 32.0, kTight);
    EXPECT_NEAR(f.d3(0, 0, 0), 3.0 / 256.0, kTight);
}

TEST(jet, log_derivatives) {
    // log at 2: value ln 2, then 1/2, -1/4, 1/4.
    const jet f = log(jet::variable(2.0, 1, 3, 0));
    EXPECT_NEAR(f.value(), std::log(2.0), kTight);
    EXPECT_NEAR(f.d1(0), 0.5, kTight);
    EXPECT_NEAR(f.d2(0, 0), -0.25, kTight);
    EXPECT_NEAR(f.d3(0, 0, 0), 0.25, kTight);
}

TEST(jet, atan_derivatives) {
    // atan at 1: value pi/4, then 1/2, -1/2, 1/2.
    const jet f = atan(jet::variable(1.0, 1, 3, 0));
    EXPECT_NEAR(f.value(), std::atan(1.0), kTight);
    EXPECT_NEAR(f.d1(0), 0.5, kTight);
    EXPECT_NEAR(f.d2(0, 0), -0.5, kTight);
    EXPECT_NEAR(f.d3(0, 0, 0), 0.5, kTight);
}

TEST(jet, tan_derivatives) {
    // tan at pi/4: value 1, then 2, 4, 16.
    const jet f = tan(jet::variable(std::atan(1.0), 1, 3, 0));
    EXPECT_NEAR(f.value(), 1.0, kTight);
    EXPECT_NEAR(f.d1(0), 2.0, 1e-11);
    EXPECT_NEAR(f.d2(0, 0), 4.0, 1e-11);
    EXPECT_NEAR(f.d3(0, 0, 0), 16.0, 1e-10);
}

TEST(jet, negative_integer_power) {
    // x^-2 at 2: value 1/4, then -1/4, 3/8, -3/4.
    const jet f = pow(jet::variable(2.0, 1, 3, 0), -2);
    EXPECT_NEAR(f.value(), 0.25, kTight);
    EXPECT_NEAR(f.d1(0), -0.25, kTight);
    EXPECT_NEAR(f.d2(0, 0), 0.375, kTight);
    EXPECT_NEAR(f.d3(0, 0, 0), -0.75, kTight);
}

TEST(jet, zeroth_power_is_one) {
    const jet f = pow(jet::variable(3.0, 1, 3, 0), 0);
    EXPECT_DOUBLE_EQ(f.value(), 1.0);
    EXPECT_DOUBLE_EQ(f.d1(0), 0.0);
}

// ===== algebra laws =========================================================

class jet_property_test : public ::testing::Test {
protected:
    // Deterministic sample jets with dense derivative entries: products of
    // transcendental seeds keep all slots populated.
    std::vector<jet> samples() {
        std::vector<jet> out;
        std::mt19937 rng(20240817u);
        std::uniform_real_distribution<double> box(0.3, 1.7);
        for (int s = 0; s < 24; ++s) {
            const jet x = jet::variable(box(rng), 3, 3, 0);
            const jet y = jet::variable(box(rng), 3, 3, 1);
            const jet z = jet::variable(box(rng), 3, 3, 2);
            out.push_back(exp(0.3 * x) * sin(y) + z * x);
            out.push_back(log(x + 2.0) * atan(y * z));
            out.push_back(sqrt(x * x + y * y + 0.5) / (z + 2.0));
        }
        return out;
    }

    static double max_entry_diff(const jet& a, const jet& b) {
        double m = std::abs(a.value() - b.value());
        for (int i = 0; i < a.dim(); ++i) {
            m = std::max(m, std::abs(a.d1(i) - b.d1(i)));
            for (int j = 0; j < a.dim(); ++j) {
                m = std::max(m, std::abs(a.d2(i, j) - b.d2(i, j)));
                for (int k = 0; k < a.dim(); ++k)
                    m = std::max(m, std::abs(a.d3(i, j, k) - b.d3(i, j, k)));
            }
        }
        return m;
    }

    static double max_entry_abs(const jet& a) {
        return max_entry_diff(a, jet::constant(0.0, a.dim(), a.order()));
    }
};

TEST_F(jet_property_test, linearity) {
    const auto js = samples();
    for (std::size_t i = 0; i + 1 < js.size(); i += 2) {
        const jet& f = js[i];
        const jet& g = js[i + 1];
        const jet lhs = 2.5 * f - 0.75 * g;
        const jet alt = (f + f) + 0.5 * f - 0.75 * g;
        const double scale = std::max(1.0, std::max(max_entry_abs(lhs), max_entry_abs(alt)));
        EXPECT_LE(max_entry_diff(lhs, alt) / scale, kTight);
    }
}

TEST_F(jet_property_test, leibniz_rule_via_partial) {
    // d/dx_i distributes over products: (fg)_i = f_i g + f g_i as jets.
    const auto js = samples();
    for (std::size_t i = 0; i + 1 < js.size(); i += 2) {
        const jet& f = js[i];
        const jet& g = js[i + 1];
        const jet prod = f * g;
        for (int d = 0; d < 3; ++d) {
            const jet lhs = prod.partial(d);
            const jet rhs = f.partial(d) * g + f * g.partial(d);
            const double scale = std::max(1.0, max_entry_abs(lhs));
            EXPECT_LE(max_entry_diff(lhs, rhs) / scale, kTight);
        }
    }
}

TEST_F(jet_property_test, chain_rule_via_partial) {
    // (exp f)_i = f_i exp f, sliced through partial().
    for (const jet& f : samples()) {
        const jet ef = exp(f);
        for (int d = 0; d < 3; ++d) {
            const jet lhs = ef.partial(d);
            const jet rhs = f.partial(d) * exp(f);  // product truncates to order 2
            const double scale = std::max(1.0, max_entry_abs(lhs));
            EXPECT_LE(max_entry_diff(lhs, rhs) / scale, kTight);
        }
    }
}

TEST_F(jet_property_test, mixed_partials_bit_exact_symmetry) {
    for (const jet& f : samples()) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                EXPECT_EQ(f.d2(i, j), f.d2(j, i));
                for (int k = 0; k < 3; ++k) {
                    EXPECT_EQ(f.d3(i, j, k), f.d3(i, k, j));
                    EXPECT_EQ(f.d3(i, j, k), f.d3(j, i, k));
                    EXPECT_EQ(f.d3(i, j, k), f.d3(k, j, i));
                }
            }
    }
}

TEST(jet, order_truncates_to_minimum) {
    const jet a = jet::variable(1.0, 2, 3, 0);
    const jet b = jet::variable(2.0, 2, 1, 1);
    EXPECT_EQ((a * b).order(), 1);
    EXPECT_EQ((a + b).order(), 1);
    EXPECT_EQ(a.partial(0).order(), 2);
}

TEST(jet, restriction_and_embedding_roundtrip) {
    const jet x = jet::variable(0.7, 2, 3, 0);
    const jet y = jet::variable(-0.4, 2, 3, 1);
    const jet f = sin(x) * y + x * y * y;

    // Embed (x, y) as variables 2 and 3 of a 5-variable chart, restrict back.
    const jet lifted = f.embedded(5, {2, 3});
    EXPECT_DOUBLE_EQ(lifted.d1(0), 0.0);
    EXPECT_DOUBLE_EQ(lifted.d1(2), f.d1(0));
    EXPECT_DOUBLE_EQ(lifted.d2(2, 3), f.d2(0, 1));
    EXPECT_DOUBLE_EQ(lifted.d3(2, 3, 3), f.d3(0, 1, 1));

    const jet back = lifted.restricted({2, 3});
    EXPECT_DOUBLE_EQ(back.value(), f.value());
    EXPECT_DOUBLE_EQ(back.d1(1), f.d1(1));
    EXPECT_DOUBLE_EQ(back.d3(0, 1, 1), f.d3(0, 1, 1));
}

// ===== domain and shape errors =============================================

TEST(jet, domain_errors) {
    const jet neg = jet::constant(-1.0, 1, 3);
    const jet zero = jet::constant(0.0, 1, 3);
    EXPECT_THROW(log(neg), camb::eval_domain_error);
    EXPECT_THROW(sqrt(neg), camb::eval_domain_error);
    EXPECT_THROW(reciprocal(zero), camb::eval_domain_error);
    EXPECT_THROW(neg / zero, camb::eval_domain_error);
    EXPECT_THROW(pow(zero, -1), camb::eval_domain_error);
}

TEST(jet, sqrt_at_zero_allowed_only_for_values) {
    EXPECT_DOUBLE_EQ(sqrt(jet::constant(0.0, 1, 0)).value(), 0.0);
    EXPECT_THROW(sqrt(jet::constant(0.0, 1, 1)), camb::eval_domain_error);
}

TEST(jet, mismatched_dimensions_throw) {
    const jet a = jet::variable(1.0, 2, 2, 0);
    const jet b = jet::variable(1.0, 3, 2, 0);
    EXPECT_THROW(a + b, camb::dimension_error);
    EXPECT_THROW(a * b, camb::dimension_error);
}

}  // namespace
