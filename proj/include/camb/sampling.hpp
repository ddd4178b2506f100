#pragma once
/// \file sampling.hpp
/// \brief Deterministic point sampling for property checks.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// standard; the uniform transform uses the top 53 bits directly because the
/// std distributions are implementation-defined and would break byte-for-byte
/// reproducibility of reports across toolchains.

#include "camb/chart.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace camb {

/// Relative inset from the open ends of an interval when sampling, so all
/// sampled points stay strictly interior.
inline constexpr double kSampleMargin = 1e-2;

/// Scale-coordinate sampling range.  The verified identities are equivariant
/// in the scale coordinate, so a well-conditioned window (keeping 1/t and
/// 1/t² tame) loses no coverage.
inline constexpr double kSampleTMin = 0.2;
inline constexpr double kSampleTMax = 5.0;

/// Fallback half-width used when a chart interval is unbounded.
inline constexpr double kSampleClamp = 10.0;

class sampler {
  public:
    explicit sampler(std::uint64_t seed) : rng_(seed) {}

    /// Uniform in [0, 1): the top 53 bits of one engine draw.
    double next01() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

    /// Uniform draw from one interval, inset by `margin` of the (clamped)
    /// width on both sides.
    double draw(const interval& iv, double margin = kSampleMargin) {
        const double lo = std::isfinite(iv.lo) ? iv.lo : -kSampleClamp;
        const double hi = std::isfinite(iv.hi) ? iv.hi : kSampleClamp;
        const double inset = margin * (hi - lo);
        return uniform(lo + inset, hi - inset);
    }

    /// Strictly interior point of the chart's box.
    point sample_point(const chart_ptr& c, double margin = kSampleMargin) {
        std::vector<double> x;
        x.reserve(static_cast<std::size_t>(c->dim()));
        for (const interval& iv : c->bounds) x.push_back(draw(iv, margin));
        return make_point(c, x);
    }

    std::vector<point> sample_points(const chart_ptr& c, int count,
                                     double margin = kSampleMargin) {
        std::vector<point> pts;
        pts.reserve(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) pts.push_back(sample_point(c, margin));
        return pts;
    }

    /// Scale coordinate in the pinned well-conditioned window.
    double sample_t() { return uniform(kSampleTMin, kSampleTMax); }

  private:
    std::mt19937_64 rng_;
};

}  // namespace camb
