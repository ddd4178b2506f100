#pragma once

/// \file errors.hpp
/// \brief Exception types thrown by the camb library.
///
/// Every failure mode has a dedicated type so callers (and the CLI) can
/// distinguish bad input (parse/schema/bounds) from numerical degeneracy
/// (singular metrics, degenerate planes) and from violated hypotheses.

#include <stdexcept>
#include <string>

namespace camb {

/// Base class for all camb errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed expression or scenario text.  Carries 1-based line/column.
class parse_error : public error {
public:
    parse_error(const std::string& what, int line, int column)
        : error(what + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// An identifier that is neither a chart coordinate, a declared constant,
/// nor a builtin.
class unknown_identifier_error : public parse_error {
public:
    unknown_identifier_error(const std::string& name, int line, int column)
        : parse_error("unknown identifier '" + name + "'", line, column),
          name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Evaluation hit a point outside a function's domain (log of a
/// non-positive value, division by zero, ...).  The message names the
/// offending subexpression.
class eval_domain_error : public error {
public:
    explicit eval_domain_error(const std::string& what) : error(what) {}
};

/// A point (or finite-difference stencil) left the open chart box.
class bounds_error : public error {
public:
    explicit bounds_error(const std::string& what) : error(what) {}
};

/// Metric matrix not invertible at a point (pivot below threshold).
class singular_metric_error : public error {
public:
    explicit singular_metric_error(const std::string& what) : error(what) {}
};

/// Operation invoked with incompatible dimensions or tensor ranks.
class dimension_error : public error {
public:
    explicit dimension_error(const std::string& what) : error(what) {}
};

/// Sectional curvature of a plane whose Gram determinant vanishes.
class degenerate_plane_error : public error {
public:
    explicit degenerate_plane_error(const std::string& what) : error(what) {}
};

/// A construction hypothesis failed a sampled validation (carries the
/// worst sampled defect so the caller can report a witness).
class hypothesis_error : public error {
public:
    hypothesis_error(const std::string& what, double defect)
        : error(what), defect_(defect) {}

    double defect() const noexcept { return defect_; }

private:
    double defect_ = 0.0;
};

/// Scenario file is syntactically fine but semantically invalid
/// (missing section, bad key, inconsistent sizes, ...).
class schema_error : public error {
public:
    explicit schema_error(const std::string& what) : error(what) {}
};

}  // namespace camb
