#pragma once

/// \file chart.hpp
/// \brief Coordinate charts and points.
///
/// A chart is an ordered list of named coordinates together with an open
/// box of validity.  All fields, metrics and operators in this library
/// live on a single fixed chart; points carry a pointer to theirs so
/// mismatches are caught early.

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "camb/errors.hpp"

namespace camb {

/// Open interval; endpoints may be ±infinity.
struct interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return x > lo && x < hi; }
    bool finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
};

struct chart;
using chart_ptr = std::shared_ptr<const chart>;

struct chart {
    std::string name;
    std::vector<std::string> coords;
    std::vector<interval> bounds;  ///< one open interval per coordinate

    int dim() const noexcept { return static_cast<int>(coords.size()); }

    /// Index of a coordinate name, or -1 when absent.
    int index_of(const std::string& coord) const noexcept {
        for (int i = 0; i < dim(); ++i)
            if (coords[static_cast<std::size_t>(i)] == coord) return i;
        return -1;
    }

    bool contains(const std::vector<double>& x) const noexcept {
        if (static_cast<int>(x.size()) != dim()) return false;
        for (int i = 0; i < dim(); ++i)
            if (!bounds[static_cast<std::size_t>(i)].contains(x[static_cast<std::size_t>(i)]))
                return false;
        return true;
    }
};

/// Validating factory.  Throws on empty coordinate lists, duplicate or
/// empty names, and empty intervals.
inline chart_ptr make_chart(std::string name, std::vector<std::string> coords,
                            std::vector<interval> bounds) {
    if (coords.empty()) throw dimension_error("chart '" + name + "' has no coordinates");
    if (coords.size() != bounds.size())
        throw dimension_error("chart '" + name + "': " + std::to_string(coords.size()) +
                              " coordinates but " + std::to_string(bounds.size()) + " bounds");
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i].empty()) throw schema_error("chart '" + name + "': empty coordinate name");
        for (std::size_t j = i + 1; j < coords.size(); ++j)
            if (coords[i] == coords[j])
                throw schema_error("chart '" + name + "': duplicate coordinate '" + coords[i] + "'");
        if (!(bounds[i].lo < bounds[i].hi))
            throw schema_error("chart '" + name + "': empty interval for coordinate '" +
                               coords[i] + "'");
    }
    auto c = std::make_shared<chart>();
    c->name = std::move(name);
    c->coords = std::move(coords);
    c->bounds = std::move(bounds);
    return c;
}

/// A point of a chart, always strictly inside the chart's open box.
struct point {
    chart_ptr on;
    std::vector<double> x;

    int dim() const noexcept { return static_cast<int>(x.size()); }
    double operator[](int i) const noexcept { return x[static_cast<std::size_t>(i)]; }
};

/// Validating factory: checks dimension and strict bounds containment.
inline point make_point(chart_ptr c, std::vector<double> x) {
    if (!c) throw dimension_error("point on a null chart");
    if (static_cast<int>(x.size()) != c->dim())
        throw dimension_error("point dimension " + std::to_string(x.size()) +
                              " does not match chart '" + c->name + "' dimension " +
                              std::to_string(c->dim()));
    if (!c->contains(x)) {
        std::string s = "point (";
        for (std::size_t i = 0; i < x.size(); ++i)
            s += (i ? ", " : "") + std::to_string(x[i]);
        throw bounds_error(s + ") outside the open box of chart '" + c->name + "'");
    }
    return point{std::move(c), std::move(x)};
}

}  // namespace camb
