#pragma once
/// \file report.hpp
/// \brief Renderers for verification reports: canonical JSON, terminal text,
///        and per-sample CSV for plotting.
///
/// The JSON form is canonical when timing is excluded: keys are emitted in
/// sorted order, numbers round-trip exactly, and every field is derived from
/// the deterministic run, so two runs of the same scenario produce
/// byte-identical documents.

#include "camb/suites.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

namespace camb {

namespace detail {

/// Non-finite defects (evaluation errors) are encoded as the string "inf"
/// so the document stays valid JSON and byte-stable.
inline nlohmann::json defect_json(double d) {
    if (std::isfinite(d)) return d;
    return "inf";
}

inline std::string defect_text(double d) {
    if (!std::isfinite(d)) return "inf";
    std::ostringstream os;
    os << std::scientific << std::setprecision(3) << d;
    return os.str();
}

inline std::string full_precision(double d) {
    if (!std::isfinite(d)) return "inf";
    std::ostringstream os;
    os << std::setprecision(17) << d;
    return os.str();
}

/// CSV field quoting: always quoted, embedded quotes doubled.
inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

/// Render the report as JSON.  With include_timing false the document is
/// canonical: repeated runs of the same scenario are byte-identical.
inline std::string render_json(const verification_report& report, bool include_timing) {
    nlohmann::json doc;
    doc["scenario"] = report.scenario;
    doc["seed"] = report.seed;
    doc["samples"] = report.samples;
    doc["suites"] = report.suites;
    doc["passed"] = report.passed;
    doc["versions"] = {{"library", kLibraryVersion}, {"report_schema", kReportSchema}};
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& kv : report.overrides) overrides[kv.first] = kv.second;
    doc["overrides"] = overrides;
    nlohmann::json checks = nlohmann::json::array();
    for (const check_result& c : report.checks) {
        nlohmann::json jc;
        jc["id"] = c.id;
        jc["statement"] = c.statement;
        jc["samples"] = static_cast<int>(c.samples.size());
        jc["max_defect"] = detail::defect_json(c.max_defect);
        jc["tolerance"] = c.tolerance;
        jc["tolerance_overridden"] = c.tolerance_overridden;
        jc["passed"] = c.passed;
        if (!c.passed) {
            nlohmann::json witness;
            witness["where"] = c.witness_where;
            witness["scale"] = c.witness_scale;
            witness["note"] = c.witness_note;
            jc["witness"] = witness;
        }
        checks.push_back(std::move(jc));
    }
    doc["checks"] = checks;
    if (include_timing) doc["wall_ms"] = report.wall_ms;
    return doc.dump(2) + "\n";
}

/// Render the report as human-readable text, one line per check.
inline std::string render_text(const verification_report& report) {
    std::ostringstream os;
    os << "scenario: " << report.scenario << "\n";
    os << "seed: " << report.seed << "  samples: " << report.samples << "\n";
    os << "suites:";
    for (const std::string& s : report.suites) os << " " << s;
    os << "\n\n";
    std::size_t width = 0;
    for (const check_result& c : report.checks) width = std::max(width, c.id.size());
    int passed = 0;
    for (const check_result& c : report.checks) {
        os << (c.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width))
           << c.id << std::right << "  max defect " << detail::defect_text(c.max_defect)
           << "  (tol " << detail::defect_text(c.tolerance)
           << (c.tolerance_overridden ? ", overridden" : "") << ", " << c.samples.size()
           << " samples)\n";
        if (!c.passed) {
            if (!c.witness_where.empty()) {
                os << "      worst at (";
                for (std::size_t k = 0; k < c.witness_where.size(); ++k)
                    os << (k ? ", " : "") << detail::full_precision(c.witness_where[k]);
                os << ")\n";
            }
            if (!c.witness_scale.empty()) os << "      scale: " << c.witness_scale << "\n";
            if (!c.witness_note.empty()) os << "      note: " << c.witness_note << "\n";
        }
        passed += c.passed ? 1 : 0;
    }
    os << "\n" << passed << "/" << report.checks.size() << " checks passed\n";
    os << "wall time: " << std::fixed << std::setprecision(1) << report.wall_ms << " ms\n";
    return os.str();
}

/// Render every retained sample as CSV (check id, scale, coordinates,
/// defect), one row per evaluation, for external plotting.
inline std::string render_csv(const verification_report& report) {
    std::ostringstream os;
    os << "check,scale,coords,defect\n";
    for (const check_result& c : report.checks)
        for (const sample_record& rec : c.samples) {
            os << c.id << "," << detail::csv_quote(rec.scale) << ",\"";
            for (std::size_t k = 0; k < rec.where.size(); ++k)
                os << (k ? " " : "") << detail::full_precision(rec.where[k]);
            os << "\"," << detail::full_precision(rec.defect) << "\n";
        }
    return os.str();
}

}  // namespace camb
