#pragma once
/// \file scenario.hpp
/// \brief Sectioned plain-text scenario files: a chart with metric component
///        expressions, a one-parameter family of endomorphisms with its band
///        half-width, a list of scale functions, a suite selection, and
///        sampling controls.  Expressions are stored as strings so scenario
///        files stay portable; they are parsed against the declared chart.
///
/// Format (lines; '#' starts a comment; blank lines ignored):
///
///     [manifold]
///     name   = sphere_example
///     coords = theta, phi
///     bounds = (0, pi), (0, 2*pi)
///     g.theta.theta = 1
///     g.phi.phi     = sin(theta)^2      # off-diagonal entries default to 0
///
///     [alpha]
///     epsilon       = 2
///     a.theta.theta = (1+rho/2)^2       # defaults: diagonal 1, off-diagonal 0
///     a.phi.phi     = (1+rho/2)^2
///
///     [scale]
///     u = 0                             # repeated lines form the list
///     u = 0.1*sin(theta)*cos(phi)
///
///     [suites]
///     run = ambient_axioms, connection, ricci_Q
///
///     [sampling]
///     seed    = 20260819
///     samples = 200
///     tolerance.ricci_q.closed_form = 1e-7
///
///     [constants]
///     k = 1                             # usable in any expression; pi is built in
///
/// Errors are reported as schema_error with "<origin>:<line>:" context;
/// expression errors are forwarded with the offending key.

#include "camb/ambient.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace camb {

/// Suite names accepted by the [suites] block, in canonical order.
inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{
        "ambient_axioms", "connection", "ricci_Q",  "weingarten", "recovery",
        "cotton",         "gauss",      "fibers",   "minkowski",  "gauss_bonnet"};
    return names;
}

struct scenario_spec {
    std::string name;
    chart_ptr base;
    chart_ptr band;                        ///< base chart extended by the band coordinate
    metric_field g;
    std::vector<scalar_field> alpha_comp;  ///< n^2 family components on the band chart
    double epsilon = 0.0;
    std::vector<scalar_field> scales;
    std::vector<std::string> scale_texts;
    std::vector<std::string> suites;       ///< validated, canonical order
    std::uint64_t seed = 20260819ull;
    int samples = 100;
    std::map<std::string, double> tolerance_overrides;  ///< check id -> tolerance
};

namespace detail {

struct scn_entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

inline std::string scn_trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> scn_split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(scn_trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(scn_trim(cur));
    return out;
}

[[noreturn]] inline void scn_fail(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw schema_error(os.str());
}

inline bool scn_is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
    return true;
}

/// Evaluate a constants-only expression ("2", "pi", "2*pi", "-1") by parsing
/// it against a throwaway one-coordinate chart.
inline double scn_constant(const std::string& text, const std::map<std::string, double>& consts,
                           const std::string& origin, int line, const std::string& what) {
    static const chart_ptr scratch =
        make_chart("constant_scratch", {"__zz"}, {interval{-1.0, 1.0}});
    try {
        const scalar_field f = parse_expression(scratch, text, consts);
        return eval_value(f, make_point(scratch, {0.0}));
    } catch (const error& e) {
        scn_fail(origin, line, what + ": " + e.what());
    }
}

/// "(lo, hi), (lo, hi), ..." -> list of intervals.
inline std::vector<interval> scn_bounds(const std::string& text,
                                        const std::map<std::string, double>& consts,
                                        const std::string& origin, int line) {
    std::vector<interval> out;
    std::size_t i = 0;
    const auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= text.size()) break;
        if (text[i] != '(') scn_fail(origin, line, "bounds: expected '(' in interval list");
        const std::size_t close = text.find(')', i);
        if (close == std::string::npos) scn_fail(origin, line, "bounds: unbalanced '('");
        const std::vector<std::string> parts =
            scn_split(text.substr(i + 1, close - i - 1), ',');
        if (parts.size() != 2)
            scn_fail(origin, line, "bounds: each interval needs exactly two endpoints");
        const double lo = scn_constant(parts[0], consts, origin, line, "bounds lower endpoint");
        const double hi = scn_constant(parts[1], consts, origin, line, "bounds upper endpoint");
        if (!(lo < hi)) scn_fail(origin, line, "bounds: lower endpoint must be below upper");
        out.push_back(interval{lo, hi});
        i = close + 1;
        skip_ws();
        if (i < text.size()) {
            if (text[i] != ',') scn_fail(origin, line, "bounds: expected ',' between intervals");
            ++i;
        }
    }
    if (out.empty()) scn_fail(origin, line, "bounds: empty interval list");
    return out;
}

inline scalar_field scn_expression(const chart_ptr& c, const std::string& text,
                                   const std::map<std::string, double>& consts,
                                   const std::string& origin, int line,
                                   const std::string& key) {
    try {
        return parse_expression(c, text, consts);
    } catch (const error& e) {
        scn_fail(origin, line, "key '" + key + "': " + e.what());
    }
}

}  // namespace detail

/// Parse scenario text; `origin` names the source in error messages.
inline scenario_spec parse_scenario(const std::string& text, const std::string& origin) {
    using detail::scn_entry;
    using detail::scn_fail;
    using detail::scn_split;
    using detail::scn_trim;

    static const std::set<std::string> known_sections{"manifold", "alpha",    "scale",
                                                      "suites",   "sampling", "constants"};

    // ----- tokenize into (section, key, value, line) entries -----
    std::vector<scn_entry> entries;
    {
        std::istringstream in(text);
        std::string raw, section;
        int line_no = 0, section_line = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const std::size_t hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const std::string line = scn_trim(raw);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') scn_fail(origin, line_no, "unterminated section header");
                section = scn_trim(line.substr(1, line.size() - 2));
                section_line = line_no;
                if (!known_sections.count(section))
                    scn_fail(origin, line_no, "unknown section [" + section + "]");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                scn_fail(origin, line_no, "expected 'key = value', got '" + line + "'");
            if (section.empty()) scn_fail(origin, line_no, "entry before any section header");
            scn_entry e;
            e.section = section;
            e.key = scn_trim(line.substr(0, eq));
            e.value = scn_trim(line.substr(eq + 1));
            e.line = line_no;
            if (e.key.empty()) scn_fail(origin, line_no, "empty key");
            if (e.value.empty()) scn_fail(origin, line_no, "empty value for key '" + e.key + "'");
            entries.push_back(std::move(e));
        }
        (void)section_line;
    }
    const auto in_section = [&](const std::string& s) {
        std::vector<const scn_entry*> out;
        for (const scn_entry& e : entries)
            if (e.section == s) out.push_back(&e);
        return out;
    };

    // ----- constants (needed before any expression parses) -----
    std::map<std::string, double> consts{{"pi", 3.14159265358979323846}};
    for (const scn_entry* e : in_section("constants")) {
        if (!detail::scn_is_identifier(e->key))
            scn_fail(origin, e->line, "constant name '" + e->key + "' is not an identifier");
        if (consts.count(e->key))
            scn_fail(origin, e->line, "constant '" + e->key + "' defined twice (pi is built in)");
        consts[e->key] = detail::scn_constant(e->value, consts, origin, e->line,
                                              "constant '" + e->key + "'");
    }

    // ----- manifold -----
    scenario_spec spec;
    spec.name = "scenario";
    std::vector<std::string> coords;
    std::vector<interval> bounds;
    std::map<std::string, int> coord_index;
    std::vector<const scn_entry*> metric_entries;
    int manifold_line = 0;
    for (const scn_entry* e : in_section("manifold")) {
        manifold_line = manifold_line ? manifold_line : e->line;
        if (e->key == "name") {
            spec.name = e->value;
        } else if (e->key == "coords") {
            for (const std::string& c : scn_split(e->value, ',')) {
                if (!detail::scn_is_identifier(c))
                    scn_fail(origin, e->line, "coordinate '" + c + "' is not an identifier");
                if (c == "t" || c == "rho")
                    scn_fail(origin, e->line,
                             "coordinate '" + c + "' is reserved for the ambient chart");
                if (coord_index.count(c))
                    scn_fail(origin, e->line, "coordinate '" + c + "' repeated");
                coord_index[c] = static_cast<int>(coords.size());
                coords.push_back(c);
            }
        } else if (e->key == "bounds") {
            bounds = detail::scn_bounds(e->value, consts, origin, e->line);
        } else if (e->key.rfind("g.", 0) == 0) {
            metric_entries.push_back(e);
        } else {
            scn_fail(origin, e->line, "unknown manifold key '" + e->key + "'");
        }
    }
    if (coords.empty()) scn_fail(origin, manifold_line, "manifold block needs 'coords'");
    if (bounds.size() != coords.size())
        scn_fail(origin, manifold_line, "manifold needs one bounds interval per coordinate");
    const int n = static_cast<int>(coords.size());
    spec.base = make_chart(spec.name, coords, bounds);

    // Metric components: diagonal required, off-diagonal defaults to zero,
    // each unordered pair given at most once.
    std::vector<scalar_field> gcomp(
        static_cast<std::size_t>(n * n),
        detail::scn_expression(spec.base, "0", consts, origin, manifold_line, "g"));
    std::vector<bool> gseen(static_cast<std::size_t>(n * n), false);
    for (const scn_entry* e : metric_entries) {
        const std::vector<std::string> parts = scn_split(e->key, '.');
        if (parts.size() != 3 || !coord_index.count(parts[1]) || !coord_index.count(parts[2]))
            scn_fail(origin, e->line, "metric key must be g.<coord>.<coord>, got '" + e->key +
                                          "'");
        const int i = coord_index[parts[1]];
        const int j = coord_index[parts[2]];
        if (gseen[static_cast<std::size_t>(i * n + j)] ||
            gseen[static_cast<std::size_t>(j * n + i)])
            scn_fail(origin, e->line, "metric component '" + e->key + "' given twice");
        const scalar_field f =
            detail::scn_expression(spec.base, e->value, consts, origin, e->line, e->key);
        gcomp[static_cast<std::size_t>(i * n + j)] = f;
        gcomp[static_cast<std::size_t>(j * n + i)] = f;
        gseen[static_cast<std::size_t>(i * n + j)] = true;
        gseen[static_cast<std::size_t>(j * n + i)] = true;
    }
    for (int i = 0; i < n; ++i)
        if (!gseen[static_cast<std::size_t>(i * n + i)])
            scn_fail(origin, manifold_line,
                     "missing diagonal metric component g." + coords[static_cast<std::size_t>(i)] +
                         "." + coords[static_cast<std::size_t>(i)]);
    spec.g = make_metric_field(spec.base, signature_kind::riemannian, gcomp);

    // ----- alpha -----
    bool have_epsilon = false;
    std::vector<const scn_entry*> alpha_entries;
    int alpha_line = 0;
    for (const scn_entry* e : in_section("alpha")) {
        alpha_line = alpha_line ? alpha_line : e->line;
        if (e->key == "epsilon") {
            spec.epsilon =
                detail::scn_constant(e->value, consts, origin, e->line, "epsilon");
            have_epsilon = true;
        } else if (e->key.rfind("a.", 0) == 0) {
            alpha_entries.push_back(e);
        } else {
            scn_fail(origin, e->line, "unknown alpha key '" + e->key + "'");
        }
    }
    if (!have_epsilon) scn_fail(origin, alpha_line, "alpha block needs 'epsilon'");
    if (!(spec.epsilon > 0.0))
        scn_fail(origin, alpha_line, "epsilon must be positive");
    spec.band = make_alpha_chart(spec.base, spec.epsilon);
    spec.alpha_comp.clear();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            spec.alpha_comp.push_back(detail::scn_expression(
                spec.band, i == j ? "1" : "0", consts, origin, alpha_line, "a"));
    std::vector<bool> aseen(static_cast<std::size_t>(n * n), false);
    for (const scn_entry* e : alpha_entries) {
        const std::vector<std::string> parts = scn_split(e->key, '.');
        if (parts.size() != 3 || !coord_index.count(parts[1]) || !coord_index.count(parts[2]))
            scn_fail(origin, e->line, "family key must be a.<coord>.<coord>, got '" + e->key +
                                          "'");
        const int i = coord_index[parts[1]];
        const int j = coord_index[parts[2]];
        if (aseen[static_cast<std::size_t>(i * n + j)])
            scn_fail(origin, e->line, "family component '" + e->key + "' given twice");
        spec.alpha_comp[static_cast<std::size_t>(i * n + j)] =
            detail::scn_expression(spec.band, e->value, consts, origin, e->line, e->key);
        aseen[static_cast<std::size_t>(i * n + j)] = true;
    }

    // ----- scale -----
    for (const scn_entry* e : in_section("scale")) {
        if (e->key != "u") scn_fail(origin, e->line, "scale block accepts only 'u' keys");
        spec.scales.push_back(
            detail::scn_expression(spec.base, e->value, consts, origin, e->line, "u"));
        spec.scale_texts.push_back(e->value);
    }
    if (spec.scales.empty()) {
        spec.scales.push_back(field_constant(spec.base, 0.0));
        spec.scale_texts.push_back("0");
    }

    // ----- suites -----
    std::vector<std::string> requested;
    for (const scn_entry* e : in_section("suites")) {
        if (e->key != "run") scn_fail(origin, e->line, "suites block accepts only 'run'");
        for (const std::string& s : scn_split(e->value, ',')) {
            bool known = false;
            for (const std::string& k : suite_names()) known = known || k == s;
            if (!known) scn_fail(origin, e->line, "unknown suite '" + s + "'");
            requested.push_back(s);
        }
    }
    if (requested.empty()) {
        requested = {"ambient_axioms", "connection", "ricci_Q", "weingarten",
                     "recovery",       "gauss",      "fibers"};
        if (n == 2) requested.push_back("cotton");
    }
    for (const std::string& k : suite_names()) {  // canonical order, deduplicated
        bool wanted = false;
        for (const std::string& s : requested) wanted = wanted || s == k;
        if (wanted) spec.suites.push_back(k);
    }

    // ----- sampling -----
    for (const scn_entry* e : in_section("sampling")) {
        if (e->key == "seed") {
            try {
                std::size_t pos = 0;
                spec.seed = std::stoull(e->value, &pos);
                if (pos != e->value.size()) throw std::invalid_argument("trailing text");
            } catch (const std::exception&) {
                scn_fail(origin, e->line, "seed must be a nonnegative integer");
            }
        } else if (e->key == "samples") {
            try {
                std::size_t pos = 0;
                spec.samples = std::stoi(e->value, &pos);
                if (pos != e->value.size()) throw std::invalid_argument("trailing text");
            } catch (const std::exception&) {
                spec.samples = 0;
            }
            if (spec.samples <= 0)
                scn_fail(origin, e->line, "samples must be a positive integer");
        } else if (e->key.rfind("tolerance.", 0) == 0) {
            const std::string id = e->key.substr(std::string("tolerance.").size());
            if (id.empty()) scn_fail(origin, e->line, "tolerance key needs a check id");
            spec.tolerance_overrides[id] =
                detail::scn_constant(e->value, consts, origin, e->line, "tolerance");
            if (!(spec.tolerance_overrides[id] > 0.0))
                scn_fail(origin, e->line, "tolerance must be positive");
        } else {
            scn_fail(origin, e->line, "unknown sampling key '" + e->key + "'");
        }
    }
    return spec;
}

/// Load and parse a scenario file.
inline scenario_spec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error(path + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

}  // namespace camb
