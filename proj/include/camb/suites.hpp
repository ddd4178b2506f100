#pragma once
/// \file suites.hpp
/// \brief Check registry and suite runner: samples seeded points for every
///        selected check, measures the defect of the identity it states, and
///        assembles a deterministic verification report.
///
/// Determinism contract: all random draws happen in a single-threaded
/// pre-pass, one generator per check seeded from (scenario seed, check id),
/// so reports are identical across suite subsets and thread counts.  The
/// CAMB_THREADS environment variable only parallelizes the defect
/// evaluations; reductions are fixed-order scans.
///
/// Checks whose hypothesis does not hold for the scenario (a structure
/// recovery that fails, a family that is not pointwise conformal, a curved
/// structure where a flat one is needed) are omitted from the plan rather
/// than reported as failures of a statement that was never claimed; whenever
/// a structure was needed but could not be recovered, the diagnostic check
/// recovery.hypothesis is pulled into the plan so the report always shows
/// why.

#include "camb/immersion.hpp"
#include "camb/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <utility>

namespace camb {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

// ----- report types ------------------------------------------------------------------

/// One defect evaluation, kept for plot output.
struct sample_record {
    std::vector<double> where;  ///< coordinates of the sampled point (may be empty)
    std::string scale;          ///< scale expression for scale-dependent checks, else ""
    double defect = 0.0;
};

struct check_result {
    std::string id;
    std::string statement;
    double tolerance = 0.0;
    bool tolerance_overridden = false;
    double max_defect = 0.0;
    bool passed = false;
    std::vector<double> witness_where;  ///< argmax sample; meaningful when !passed
    std::string witness_scale;
    std::string witness_note;           ///< present when an evaluation threw
    std::vector<sample_record> samples;
};

struct verification_report {
    std::string scenario;
    std::uint64_t seed = 0;
    int samples = 0;
    std::vector<std::string> suites;
    std::map<std::string, double> overrides;  ///< applied tolerance overrides
    std::vector<check_result> checks;         ///< sorted by id
    bool passed = false;
    double wall_ms = 0.0;
};

// ----- check registry ----------------------------------------------------------------

struct check_info {
    const char* id;
    const char* statement;
    double tolerance;
};

inline const std::vector<check_info>& check_registry() {
    static const std::vector<check_info> table{
        {"ambient.family_admissible",
         "family is metric self-adjoint and positive on the band and restricts to the "
         "identity at the slice",
         1e-9},
        {"ambient.frame_products",
         "diagonal frame has self-pairings -2 and 2 and vanishing cross pairing", 1e-10},
        {"ambient.homothety",
         "Lie derivative of the product metric along the scaling field is twice the metric",
         1e-9},
        {"ambient.radical_line",
         "degenerate direction of the ray-slice pullback is exactly the scale line", 1e-8},
        {"ambient.scale_form",
         "pairing form of the scaling field has components (2 t rho, t^2, 0, ...) and is "
         "closed",
         1e-9},
        {"ambient.scale_slice_pullback",
         "ray-slice pullback of the product metric is the degenerate block t^2 g", 1e-10},
        {"connection.mixed",
         "covariant derivatives of lifted fields along the scale and band directions match "
         "their closed forms",
         1e-8},
        {"connection.scale_directions",
         "covariant derivatives among the scale and band directions match their closed forms",
         1e-8},
        {"connection.tangent",
         "slice covariant derivative of lifted fields matches the three-term closed form",
         1e-8},
        {"cotton.antisymmetry",
         "curvature form is antisymmetric in its first two arguments", 1e-10},
        {"cotton.codazzi_identity",
         "normal part of ambient curvature on tangent triples is the curvature form times "
         "the scale normal",
         1e-6},
        {"cotton.conformal_invariance",
         "curvature form components are unchanged by transforming the structure", 1e-6},
        {"cotton.flat_invariance",
         "flat structures leave immersed tangent spaces curvature-invariant", 1e-7},
        {"fibers.closed_vs_numeric",
         "fiber second fundamental form matches its closed form", 1e-7},
        {"fibers.trace_split",
         "fiber second fundamental form splits into mean-normal and trace-free rate parts",
         1e-8},
        {"fibers.umbilical", "pointwise conformal families have umbilical fibers", 1e-9},
        {"gauss.mean_curvature_norm",
         "squared mean curvature equals scalar curvature of the rescaled metric over n(n-1)",
         1e-6},
        {"gauss.mean_curvature_trace",
         "mean curvature is the rescaled-metric trace of the second fundamental form over n",
         1e-8},
        {"gauss.sectional_vanishing",
         "ambient sectional curvature of immersed tangent planes vanishes", 1e-6},
        {"gauss.trace_identity",
         "rescaled curvature equals the rescaled trace of the transformed structure tensor",
         1e-6},
        {"gauss_bonnet.total_curvature",
         "total curvature of the deformed sphere is 4 pi (relative defect)", 1e-3},
        {"minkowski.cone_quadric",
         "flat-model image lies on the quadric of value 2 rho t^2", 1e-10},
        {"minkowski.equivariance",
         "flat-model immersion is equivariant under scaling the first coordinate", 1e-12},
        {"minkowski.pullback",
         "flat-model immersion pulls the Minkowski metric back to the product metric", 1e-9},
        {"minkowski.slice_to_cone",
         "flat-model immersion maps the slice into the lightlike cone", 1e-10},
        {"recovery.cocycle",
         "structure transformation law composes additively in the scale", 1e-7},
        {"recovery.hypothesis",
         "family rate at the slice reproduces the structure tensor of the base metric", 1e-6},
        {"recovery.moebius",
         "rescaled shape-operator pairing recovers the transformed structure tensor", 1e-6},
        {"recovery.schouten",
         "rescaled shape-operator pairing recovers the Schouten tensor of the rescaled "
         "metric",
         1e-6},
        {"ricci_q.closed_form",
         "Ricci on lifted directions at the slice matches the curvature-plus-rate closed "
         "form",
         1e-7},
        {"ricci_q.scale_row", "Ricci pairs to zero with the scale direction", 1e-8},
        {"ricci_q.vanishing_on_slice",
         "Ricci of the product metric vanishes on slice-tangent directions along the ray "
         "slice",
         1e-7},
        {"weingarten.eta_closed_form",
         "shape operator of the transverse normal matches its rate-gradient-Hessian closed "
         "form",
         1e-8},
        {"weingarten.normal_curvature",
         "normal-bundle curvature vanishes: ambient curvature paired through the frame "
         "cancels the shape-operator commutator",
         1e-8},
        {"weingarten.normal_frame",
         "normal frame is lightlike, normalized to -1, orthogonal to the image, and the "
         "induced metric is the rescaled base metric",
         1e-9},
        {"weingarten.normal_parallel",
         "normal frame is parallel in the normal bundle: derivatives of the frame fields "
         "along the immersion have no normal part",
         1e-8},
        {"weingarten.second_form_pairing",
         "second fundamental form pairs with the frame through the shape operators", 1e-9},
        {"weingarten.self_adjoint",
         "shape operators are self-adjoint for the induced metric", 1e-9},
        {"weingarten.xi_minus_identity",
         "shape operator of the scale-direction normal is minus the identity", 1e-9},
    };
    return table;
}

inline const check_info& find_check(const std::string& id) {
    for (const check_info& c : check_registry())
        if (id == c.id) return c;
    throw schema_error("unknown check id '" + id + "'");
}

namespace detail {

// ----- deterministic seeding ---------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t check_seed(std::uint64_t base, const std::string& id) {
    return splitmix64(base ^ fnv1a64(id));
}

inline int thread_count() {
    const char* env = std::getenv("CAMB_THREADS");
    if (!env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<int>(std::min<long>(v, 64));
}

// ----- generic sampled-check evaluation ------------------------------------------------

/// Pre-generated evaluation input: a point, optional auxiliary random
/// vectors/numbers, and the index of the scale function it belongs to.
struct sample_input {
    point p;
    std::vector<double> where;              ///< report coordinates; p.x when empty
    std::vector<std::vector<double>> vecs;  ///< auxiliary random base vectors
    double aux = 0.0;                       ///< auxiliary random number
    int scale_index = -1;
};

inline std::vector<double> random_base_vector(sampler& rng, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& c : v) c = rng.uniform(-1.0, 1.0);
    return v;
}

/// Evaluate one check over pre-generated inputs.  A defect evaluation that
/// throws records an infinite defect and keeps the message as the witness
/// note, so hypothesis violations surface as failed checks.
inline check_result evaluate_check(const scenario_spec& spec, const std::string& id,
                                   const std::vector<sample_input>& inputs,
                                   const std::function<double(const sample_input&)>& defect_fn) {
    const check_info& info = find_check(id);
    check_result out;
    out.id = id;
    out.statement = info.statement;
    out.tolerance = info.tolerance;
    const auto ov = spec.tolerance_overrides.find(id);
    if (ov != spec.tolerance_overrides.end()) {
        out.tolerance = ov->second;
        out.tolerance_overridden = true;
    }

    const std::size_t count = inputs.size();
    std::vector<double> defects(count, 0.0);
    std::vector<std::string> notes(count);
    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            try {
                defects[k] = defect_fn(inputs[k]);
            } catch (const error& e) {
                defects[k] = std::numeric_limits<double>::infinity();
                notes[k] = e.what();
            }
        }
    };
    const int threads =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(thread_count()),
                                               std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        work(0, count);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (count + static_cast<std::size_t>(threads) - 1) /
                                  static_cast<std::size_t>(threads);
        for (int t = 0; t < threads; ++t) {
            const std::size_t b = static_cast<std::size_t>(t) * chunk;
            const std::size_t e = std::min(count, b + chunk);
            if (b >= e) break;
            pool.emplace_back(work, b, e);
        }
        for (std::thread& th : pool) th.join();
    }

    std::size_t arg = 0;
    double worst = -1.0;
    out.samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        sample_record rec;
        rec.where = inputs[k].where.empty() ? inputs[k].p.x : inputs[k].where;
        if (inputs[k].scale_index >= 0)
            rec.scale = spec.scale_texts[static_cast<std::size_t>(inputs[k].scale_index)];
        rec.defect = defects[k];
        out.samples.push_back(std::move(rec));
        if (defects[k] > worst) {
            worst = defects[k];
            arg = k;
        }
    }
    out.max_defect = count ? worst : 0.0;
    out.passed = out.max_defect <= out.tolerance;
    if (count) {
        out.witness_where = out.samples[arg].where;
        out.witness_scale = out.samples[arg].scale;
        out.witness_note = notes[arg];
    }
    return out;
}

// ----- shared helpers ------------------------------------------------------------------

inline double ambient_pairing(const ambient_space& a, const point& p,
                              const std::vector<double>& u, const std::vector<double>& w) {
    return lorentz_inner(metric_values(a.ambient, p), u, w);
}

inline std::vector<double> unit_axis(int n, int k) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    v[static_cast<std::size_t>(k)] = 1.0;
    return v;
}

inline double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

/// Band points with independent auxiliary base vectors.
inline std::vector<sample_input> band_inputs(const scenario_spec& spec, const ambient_space& a,
                                             const std::string& id, int vec_count) {
    sampler rng(check_seed(spec.seed, id));
    std::vector<sample_input> out;
    out.reserve(static_cast<std::size_t>(spec.samples));
    for (int k = 0; k < spec.samples; ++k) {
        sample_input in;
        in.p = sample_band_point(rng, a);
        for (int v = 0; v < vec_count; ++v) in.vecs.push_back(random_base_vector(rng, a.n));
        out.push_back(std::move(in));
    }
    return out;
}

/// Slice points (band coordinate zero) with auxiliary base vectors.
inline std::vector<sample_input> slice_inputs(const scenario_spec& spec, const ambient_space& a,
                                              const std::string& id, int vec_count) {
    sampler rng(check_seed(spec.seed, id));
    std::vector<sample_input> out;
    out.reserve(static_cast<std::size_t>(spec.samples));
    for (int k = 0; k < spec.samples; ++k) {
        sample_input in;
        in.p = sample_slice_point(rng, a);
        for (int v = 0; v < vec_count; ++v) in.vecs.push_back(random_base_vector(rng, a.n));
        out.push_back(std::move(in));
    }
    return out;
}

/// Base-manifold points with auxiliary base vectors.
inline std::vector<sample_input> base_inputs(const scenario_spec& spec, const std::string& id,
                                             int vec_count) {
    sampler rng(check_seed(spec.seed, id));
    std::vector<sample_input> out;
    out.reserve(static_cast<std::size_t>(spec.samples));
    for (int k = 0; k < spec.samples; ++k) {
        sample_input in;
        in.p = rng.sample_point(spec.base);
        for (int v = 0; v < vec_count; ++v)
            in.vecs.push_back(random_base_vector(rng, spec.base->dim()));
        out.push_back(std::move(in));
    }
    return out;
}

/// Base-manifold points spread across the scale functions: each scale gets
/// an equal share of the sample budget (at least one).
inline std::vector<sample_input> scale_inputs(const scenario_spec& spec, const std::string& id,
                                              int vec_count) {
    sampler rng(check_seed(spec.seed, id));
    const int scales = static_cast<int>(spec.scales.size());
    const int per_u = std::max(1, spec.samples / scales);
    std::vector<sample_input> out;
    out.reserve(static_cast<std::size_t>(per_u * scales));
    for (int s = 0; s < scales; ++s)
        for (int k = 0; k < per_u; ++k) {
            sample_input in;
            in.p = rng.sample_point(spec.base);
            in.scale_index = s;
            for (int v = 0; v < vec_count; ++v)
                in.vecs.push_back(random_base_vector(rng, spec.base->dim()));
            out.push_back(std::move(in));
        }
    return out;
}

}  // namespace detail

// ----- the runner ----------------------------------------------------------------------

inline verification_report run_suites(const scenario_spec& spec) {
    using detail::sample_input;
    const auto t_start = std::chrono::steady_clock::now();

    for (const auto& kv : spec.tolerance_overrides) find_check(kv.first);
    const int n = spec.base->dim();
    const auto selected = [&spec](const std::string& s) {
        return std::find(spec.suites.begin(), spec.suites.end(), s) != spec.suites.end();
    };
    for (const char* s : {"cotton", "minkowski", "gauss_bonnet"})
        if (selected(s) && n != 2)
            throw schema_error("suite '" + std::string(s) + "' needs a two-dimensional base");

    verification_report report;
    report.scenario = spec.name;
    report.seed = spec.seed;
    report.samples = spec.samples;
    report.suites = spec.suites;
    report.overrides = spec.tolerance_overrides;

    // ----- construct the ambient space; certification failures become a failed check.
    std::optional<ambient_space> space_slot;
    try {
        space_slot =
            build_ambient(spec.g, make_alpha_family(spec.base, spec.epsilon, spec.alpha_comp));
    } catch (const error& e) {
        const check_info& info = find_check("ambient.family_admissible");
        check_result bad;
        bad.id = info.id;
        bad.statement = info.statement;
        bad.tolerance = info.tolerance;
        bad.max_defect = std::numeric_limits<double>::infinity();
        if (const auto* h = dynamic_cast<const hypothesis_error*>(&e))
            bad.max_defect = h->defect();
        bad.passed = false;
        bad.witness_note = e.what();
        report.checks.push_back(std::move(bad));
        report.passed = false;
        report.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
                .count();
        return report;
    }
    const ambient_space& a = *space_slot;

    // ----- per-scale immersions.
    std::vector<spacelike_immersion> ims;
    ims.reserve(spec.scales.size());
    for (const scalar_field& u : spec.scales) ims.push_back(immerse(a, u));

    // ----- recovered structure, shared by the checks that need one.
    const bool wants_recovery = selected("recovery");
    const bool wants_cotton = selected("cotton");
    const bool wants_gauss = selected("gauss");
    const bool needs_structure = wants_recovery || wants_cotton || (wants_gauss && n == 2);
    std::optional<moebius_structure> structure;
    if (needs_structure) {
        try {
            structure = n == 2 ? moebius_from_alpha(spec.g, a.alpha)
                               : moebius_from_schouten(spec.g);
        } catch (const hypothesis_error&) {
            // Recovery failure is diagnosed by the recovery.hypothesis check below.
        }
    }
    const moebius_structure* stru = structure ? &*structure : nullptr;

    // ----- check bodies, keyed by id (std::map keeps the canonical order) -----
    std::map<std::string, std::function<check_result()>> plan;
    const auto add = [&plan](const std::string& id, std::function<check_result()> fn) {
        plan.emplace(id, std::move(fn));
    };

    if (selected("ambient_axioms")) {
        add("ambient.family_admissible", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "ambient.family_admissible", 0);
            return detail::evaluate_check(
                spec, "ambient.family_admissible", inputs, [&a](const sample_input& in) {
                    const int m = a.n;
                    const double rho = in.p.x[1];
                    const point x = base_of(a, in.p);
                    const std::vector<double> A = alpha_values(a.alpha, rho, x);
                    const std::vector<double> A0 = alpha_values(a.alpha, 0.0, x);
                    const std::vector<double> gv = metric_values(a.g, x);
                    std::vector<double> gA(static_cast<std::size_t>(m * m), 0.0);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j)
                            for (int k = 0; k < m; ++k)
                                gA[static_cast<std::size_t>(i * m + j)] +=
                                    gv[static_cast<std::size_t>(i * m + k)] *
                                    A[static_cast<std::size_t>(k * m + j)];
                    double worst = 0.0;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) {
                            worst = std::max(
                                worst, std::abs(gA[static_cast<std::size_t>(i * m + j)] -
                                                gA[static_cast<std::size_t>(j * m + i)]));
                            worst = std::max(worst,
                                             std::abs(A0[static_cast<std::size_t>(i * m + j)] -
                                                      (i == j ? 1.0 : 0.0)));
                        }
                    // Positivity shortfall of the pairing matrix g*alpha.
                    for (int i = 0; i < m; ++i)
                        for (int j = i + 1; j < m; ++j) {
                            const double s = 0.5 * (gA[static_cast<std::size_t>(i * m + j)] +
                                                    gA[static_cast<std::size_t>(j * m + i)]);
                            gA[static_cast<std::size_t>(i * m + j)] = s;
                            gA[static_cast<std::size_t>(j * m + i)] = s;
                        }
                    const sym_eigen eig = jacobi_eigen(gA, m);
                    return std::max(worst, std::max(0.0, -eig.values.front()));
                });
        });
        add("ambient.homothety", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "ambient.homothety", 0);
            const tensor_field Z = fundamental_field(a);
            return detail::evaluate_check(spec, "ambient.homothety", inputs,
                                          [&a, Z](const sample_input& in) {
                                              const std::vector<double> lie =
                                                  lie_derivative_metric(a.ambient, Z, in.p);
                                              const std::vector<double> gv =
                                                  metric_values(a.ambient, in.p);
                                              double worst = 0.0;
                                              for (std::size_t k = 0; k < lie.size(); ++k)
                                                  worst = std::max(
                                                      worst, std::abs(lie[k] - 2.0 * gv[k]));
                                              return worst;
                                          });
        });
        add("ambient.scale_slice_pullback", [&spec, &a] {
            sampler rng(detail::check_seed(spec.seed, "ambient.scale_slice_pullback"));
            std::vector<sample_input> inputs;
            for (int k = 0; k < spec.samples; ++k) {
                sample_input in;
                in.p = rng.sample_point(spec.base);
                in.aux = rng.sample_t();
                in.where.push_back(in.aux);
                in.where.insert(in.where.end(), in.p.x.begin(), in.p.x.end());
                inputs.push_back(std::move(in));
            }
            return detail::evaluate_check(spec, "ambient.scale_slice_pullback", inputs,
                                          [&a](const sample_input& in) {
                                              return slice_pullback_defect(a, in.aux, in.p);
                                          });
        });
        add("ambient.frame_products", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "ambient.frame_products", 0);
            return detail::evaluate_check(
                spec, "ambient.frame_products", inputs, [&a](const sample_input& in) {
                    const std::vector<double> T = frame_T(a, in.p);
                    const std::vector<double> E = frame_E(a, in.p);
                    const double tt = detail::ambient_pairing(a, in.p, T, T);
                    const double ee = detail::ambient_pairing(a, in.p, E, E);
                    const double te = detail::ambient_pairing(a, in.p, T, E);
                    return std::max({std::abs(tt + 2.0), std::abs(ee - 2.0), std::abs(te)});
                });
        });
        add("ambient.scale_form", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "ambient.scale_form", 0);
            return detail::evaluate_check(
                spec, "ambient.scale_form", inputs, [&a](const sample_input& in) {
                    const auto om_dom = omega_and_exterior_derivative(a, in.p);
                    const std::vector<double>& om = om_dom.first;
                    const double t = in.p.x[0], rho = in.p.x[1];
                    double worst = std::max(std::abs(om[0] - 2.0 * t * rho),
                                            std::abs(om[1] - t * t));
                    for (std::size_t k = 2; k < om.size(); ++k)
                        worst = std::max(worst, std::abs(om[k]));
                    for (double d : om_dom.second) worst = std::max(worst, std::abs(d));
                    return worst;
                });
        });
        add("ambient.radical_line", [&spec, &a] {
            sampler rng(detail::check_seed(spec.seed, "ambient.radical_line"));
            std::vector<sample_input> inputs;
            for (int k = 0; k < spec.samples; ++k) {
                sample_input in;
                in.p = rng.sample_point(spec.base);
                in.aux = rng.sample_t();
                in.where.push_back(in.aux);
                in.where.insert(in.where.end(), in.p.x.begin(), in.p.x.end());
                inputs.push_back(std::move(in));
            }
            return detail::evaluate_check(
                spec, "ambient.radical_line", inputs, [&a](const sample_input& in) {
                    const radical_diagnosis rd = slice_radical(a, in.aux, in.p);
                    double worst = std::max(std::abs(rd.smallest), 1.0 - rd.alignment);
                    // The radical must be one-dimensional: the next eigenvalue
                    // has to stay clearly away from zero.
                    if (!(rd.next > 1e-6)) worst = std::max(worst, 1.0);
                    return worst;
                });
        });
    }

    if (selected("connection")) {
        add("connection.scale_directions", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "connection.scale_directions", 0);
            return detail::evaluate_check(
                spec, "connection.scale_directions", inputs, [&a](const sample_input& in) {
                    const int N = a.total_dim();
                    const std::vector<double> et = detail::unit_axis(N, 0);
                    const std::vector<double> er = detail::unit_axis(N, 1);
                    double worst = detail::max_abs_difference(
                        christoffel_apply(a.ambient, in.p, et, et),
                        closed_form_connection(a, in.p, connection_case::dt_dt));
                    worst = std::max(
                        worst, detail::max_abs_difference(
                                   christoffel_apply(a.ambient, in.p, er, er),
                                   closed_form_connection(a, in.p, connection_case::drho_drho)));
                    worst = std::max(
                        worst, detail::max_abs_difference(
                                   christoffel_apply(a.ambient, in.p, et, er),
                                   closed_form_connection(a, in.p, connection_case::dt_drho)));
                    return worst;
                });
        });
        add("connection.mixed", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "connection.mixed", 1);
            return detail::evaluate_check(
                spec, "connection.mixed", inputs, [&a](const sample_input& in) {
                    const int N = a.total_dim();
                    const std::vector<double>& V = in.vecs[0];
                    const std::vector<double> lv = lift_vector(a, V);
                    const std::vector<double> et = detail::unit_axis(N, 0);
                    const std::vector<double> er = detail::unit_axis(N, 1);
                    double worst = detail::max_abs_difference(
                        christoffel_apply(a.ambient, in.p, et, lv),
                        closed_form_connection(a, in.p, connection_case::dt_lift, V));
                    worst = std::max(
                        worst,
                        detail::max_abs_difference(
                            christoffel_apply(a.ambient, in.p, er, lv),
                            closed_form_connection(a, in.p, connection_case::drho_lift, V)));
                    return worst;
                });
        });
        add("connection.tangent", [&spec, &a] {
            auto inputs = detail::slice_inputs(spec, a, "connection.tangent", 2);
            return detail::evaluate_check(
                spec, "connection.tangent", inputs, [&a](const sample_input& in) {
                    const std::vector<double>& V = in.vecs[0];
                    const std::vector<double>& W = in.vecs[1];
                    return detail::max_abs_difference(
                        christoffel_apply(a.ambient, in.p, lift_vector(a, V),
                                          lift_vector(a, W)),
                        closed_form_connection(a, in.p, connection_case::lift_lift, V, W));
                });
        });
    }

    if (selected("ricci_Q")) {
        add("ricci_q.closed_form", [&spec, &a] {
            auto inputs = detail::slice_inputs(spec, a, "ricci_q.closed_form", 2);
            return detail::evaluate_check(
                spec, "ricci_q.closed_form", inputs, [&a](const sample_input& in) {
                    const std::vector<double>& V = in.vecs[0];
                    const std::vector<double>& W = in.vecs[1];
                    const curvature_slice cs = riemann(a.ambient, in.p);
                    const std::vector<double> lv = lift_vector(a, V);
                    const std::vector<double> lw = lift_vector(a, W);
                    const int N = a.total_dim();
                    double numeric = 0.0;
                    for (int b = 0; b < N; ++b)
                        for (int d = 0; d < N; ++d)
                            numeric += cs.ric(b, d) * lv[static_cast<std::size_t>(b)] *
                                       lw[static_cast<std::size_t>(d)];
                    return std::abs(numeric - ricci_along_Q(a, in.p, V, W));
                });
        });
        add("ricci_q.vanishing_on_slice", [&spec, &a] {
            auto inputs = detail::slice_inputs(spec, a, "ricci_q.vanishing_on_slice", 0);
            return detail::evaluate_check(
                spec, "ricci_q.vanishing_on_slice", inputs, [&a](const sample_input& in) {
                    // Tangent directions of the slice are the scale direction and
                    // the lifted base directions; the transverse band index is 1.
                    const curvature_slice cs = riemann(a.ambient, in.p);
                    const int N = a.total_dim();
                    double worst = 0.0;
                    for (int b = 0; b < N; ++b)
                        for (int d = 0; d < N; ++d)
                            if (b != 1 && d != 1)
                                worst = std::max(worst, std::abs(cs.ric(b, d)));
                    return worst;
                });
        });
        add("ricci_q.scale_row", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "ricci_q.scale_row", 0);
            return detail::evaluate_check(spec, "ricci_q.scale_row", inputs,
                                          [&a](const sample_input& in) {
                                              const curvature_slice cs =
                                                  riemann(a.ambient, in.p);
                                              const int N = a.total_dim();
                                              double worst = 0.0;
                                              for (int b = 0; b < N; ++b)
                                                  worst = std::max(worst,
                                                                   std::abs(cs.ric(0, b)));
                                              return worst;
                                          });
        });
    }

    if (selected("weingarten")) {
        add("weingarten.normal_frame", [&spec, &a, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.normal_frame", 0);
            return detail::evaluate_check(
                spec, "weingarten.normal_frame", inputs, [&a, &ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const point p = psi_point(im, in.p);
                    const lightlike_frame f = normal_frame(im, in.p);
                    double worst =
                        std::max({std::abs(detail::ambient_pairing(a, p, f.xi, f.xi)),
                                  std::abs(detail::ambient_pairing(a, p, f.eta, f.eta)),
                                  std::abs(detail::ambient_pairing(a, p, f.xi, f.eta) + 1.0)});
                    for (int k = 0; k < im.n; ++k) {
                        const std::vector<double> push =
                            differential(im, in.p, detail::unit_axis(im.n, k));
                        worst = std::max(worst,
                                         std::abs(detail::ambient_pairing(a, p, f.xi, push)));
                        worst = std::max(
                            worst, std::abs(detail::ambient_pairing(a, p, f.eta, push)));
                    }
                    return std::max(worst, induced_metric_defect(im, in.p));
                });
        });
        add("weingarten.xi_minus_identity", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.xi_minus_identity", 0);
            return detail::evaluate_check(
                spec, "weingarten.xi_minus_identity", inputs, [&ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const std::vector<double> A = weingarten(im, in.p, normal_direction::xi);
                    double worst = 0.0;
                    for (int i = 0; i < im.n; ++i)
                        for (int j = 0; j < im.n; ++j)
                            worst = std::max(
                                worst, std::abs(A[static_cast<std::size_t>(i * im.n + j)] -
                                                (i == j ? -1.0 : 0.0)));
                    return worst;
                });
        });
        add("weingarten.eta_closed_form", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.eta_closed_form", 0);
            return detail::evaluate_check(
                spec, "weingarten.eta_closed_form", inputs, [&ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    return detail::max_abs_difference(
                        weingarten(im, in.p, normal_direction::eta),
                        weingarten_eta_closed(im, in.p));
                });
        });
        add("weingarten.normal_parallel", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.normal_parallel", 1);
            return detail::evaluate_check(
                spec, "weingarten.normal_parallel", inputs, [&ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const auto [dxi, deta] =
                        normal_connection_defect(im, in.p, in.vecs[0]);
                    return std::max(dxi, deta);
                });
        });
        add("weingarten.normal_curvature", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.normal_curvature", 2);
            return detail::evaluate_check(
                spec, "weingarten.normal_curvature", inputs, [&ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    return normal_curvature_defect(im, in.p, in.vecs[0], in.vecs[1]);
                });
        });
        add("weingarten.self_adjoint", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.self_adjoint", 0);
            return detail::evaluate_check(
                spec, "weingarten.self_adjoint", inputs, [&ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const int m = im.n;
                    const std::vector<double> gv = metric_values(im.space.g, in.p);
                    double worst = 0.0;
                    for (normal_direction which :
                         {normal_direction::xi, normal_direction::eta}) {
                        const std::vector<double> A = weingarten(im, in.p, which);
                        for (int i = 0; i < m; ++i)
                            for (int j = 0; j < m; ++j) {
                                double gij = 0.0, gji = 0.0;
                                for (int l = 0; l < m; ++l) {
                                    gij += gv[static_cast<std::size_t>(i * m + l)] *
                                           A[static_cast<std::size_t>(l * m + j)];
                                    gji += gv[static_cast<std::size_t>(j * m + l)] *
                                           A[static_cast<std::size_t>(l * m + i)];
                                }
                                worst = std::max(worst, std::abs(gij - gji));
                            }
                    }
                    return worst;
                });
        });
        add("weingarten.second_form_pairing", [&spec, &a, &ims] {
            auto inputs = detail::scale_inputs(spec, "weingarten.second_form_pairing", 2);
            return detail::evaluate_check(
                spec, "weingarten.second_form_pairing", inputs,
                [&a, &ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const int m = im.n;
                    const std::vector<double>& V = in.vecs[0];
                    const std::vector<double>& W = in.vecs[1];
                    const point p = psi_point(im, in.p);
                    const std::vector<double> ii =
                        second_fundamental_form_numeric(im, in.p, V, W);
                    const lightlike_frame f = normal_frame(im, in.p);
                    const std::vector<double> gv = metric_values(im.space.g, in.p);
                    const double e2u = std::exp(2.0 * eval_value(im.log_factor, in.p));
                    double worst = 0.0;
                    for (normal_direction which :
                         {normal_direction::xi, normal_direction::eta}) {
                        const std::vector<double> A = weingarten(im, in.p, which);
                        double rhs = 0.0;
                        for (int i = 0; i < m; ++i)
                            for (int j = 0; j < m; ++j) {
                                double av = 0.0;
                                for (int l = 0; l < m; ++l)
                                    av += A[static_cast<std::size_t>(i * m + l)] *
                                          V[static_cast<std::size_t>(l)];
                                rhs += gv[static_cast<std::size_t>(i * m + j)] * av *
                                       W[static_cast<std::size_t>(j)];
                            }
                        rhs *= e2u;
                        const std::vector<double>& nu =
                            which == normal_direction::xi ? f.xi : f.eta;
                        worst = std::max(
                            worst, std::abs(detail::ambient_pairing(a, p, ii, nu) - rhs));
                    }
                    return worst;
                });
        });
    }

    if (wants_recovery || wants_cotton || (needs_structure && !stru)) {
        add("recovery.hypothesis", [&spec, &a] {
            auto inputs = detail::base_inputs(spec, "recovery.hypothesis", 0);
            const int dim = a.n;
            return detail::evaluate_check(
                spec, "recovery.hypothesis", inputs, [&a, dim](const sample_input& in) {
                    const std::vector<double> adot = alpha_dot_values(a.alpha, 0.0, in.p);
                    if (dim == 2) {
                        const double gauss = 0.5 * riemann(a.g, in.p).scalar;
                        return std::abs(0.5 * (adot[0] + adot[3]) - gauss);
                    }
                    const std::vector<double> P = schouten(a.g, in.p);
                    const std::vector<double> gv = metric_values(a.g, in.p);
                    double worst = 0.0;
                    for (int i = 0; i < dim; ++i)
                        for (int j = 0; j < dim; ++j) {
                            double gad = 0.0;
                            for (int k = 0; k < dim; ++k)
                                gad += gv[static_cast<std::size_t>(i * dim + k)] *
                                       adot[static_cast<std::size_t>(k * dim + j)];
                            worst = std::max(
                                worst, std::abs(0.5 * gad -
                                                P[static_cast<std::size_t>(i * dim + j)]));
                        }
                    return worst;
                });
        });
    }
    if (wants_recovery) {
        if (n >= 3) {
            add("recovery.schouten", [&spec, &ims] {
                auto inputs = detail::scale_inputs(spec, "recovery.schouten", 0);
                return detail::evaluate_check(spec, "recovery.schouten", inputs,
                                              [&ims](const sample_input& in) {
                                                  return schouten_recovery_defect(
                                                      ims[static_cast<std::size_t>(
                                                          in.scale_index)],
                                                      in.p);
                                              });
            });
        }
        if (n == 2 && stru) {
            add("recovery.moebius", [&spec, &ims, stru] {
                auto inputs = detail::scale_inputs(spec, "recovery.moebius", 0);
                return detail::evaluate_check(spec, "recovery.moebius", inputs,
                                              [&ims, stru](const sample_input& in) {
                                                  return moebius_recovery_defect(
                                                      ims[static_cast<std::size_t>(
                                                          in.scale_index)],
                                                      *stru, in.p);
                                              });
            });
        }
        if (stru) {
            add("recovery.cocycle", [&spec, stru] {
                auto inputs = detail::scale_inputs(spec, "recovery.cocycle", 0);
                return detail::evaluate_check(
                    spec, "recovery.cocycle", inputs, [&spec, stru](const sample_input& in) {
                        const std::size_t i = static_cast<std::size_t>(in.scale_index);
                        const std::size_t j = (i + 1) % spec.scales.size();
                        return cocycle_check(*stru, spec.scales[i], spec.scales[j], in.p);
                    });
            });
        }
    }

    if (wants_cotton && stru) {
        add("cotton.antisymmetry", [&spec, stru] {
            auto inputs = detail::base_inputs(spec, "cotton.antisymmetry", 3);
            return detail::evaluate_check(
                spec, "cotton.antisymmetry", inputs, [stru](const sample_input& in) {
                    const double c1 =
                        cotton_york(*stru, in.p, in.vecs[0], in.vecs[1], in.vecs[2]);
                    const double c2 =
                        cotton_york(*stru, in.p, in.vecs[1], in.vecs[0], in.vecs[2]);
                    return std::abs(c1 + c2);
                });
        });
        add("cotton.conformal_invariance", [&spec, stru] {
            auto inputs = detail::scale_inputs(spec, "cotton.conformal_invariance", 0);
            std::vector<moebius_structure> transformed;
            transformed.reserve(spec.scales.size());
            for (const scalar_field& u : spec.scales)
                transformed.push_back(transform_structure(*stru, u));
            return detail::evaluate_check(
                spec, "cotton.conformal_invariance", inputs,
                [stru, transformed](const sample_input& in) {
                    return detail::max_abs_difference(
                        cotton_york_components(*stru, in.p),
                        cotton_york_components(
                            transformed[static_cast<std::size_t>(in.scale_index)], in.p));
                });
        });
        add("cotton.codazzi_identity", [&spec, &ims, stru] {
            auto inputs = detail::scale_inputs(spec, "cotton.codazzi_identity", 3);
            return detail::evaluate_check(
                spec, "cotton.codazzi_identity", inputs, [&ims, stru](const sample_input& in) {
                    return codazzi_cotton_defect(ims[static_cast<std::size_t>(in.scale_index)],
                                                 *stru, in.p, in.vecs[0], in.vecs[1],
                                                 in.vecs[2]);
                });
        });
        // Invariance of immersed tangent spaces under ambient curvature holds
        // for flat structures only; probe flatness on a fixed point set so the
        // plan itself stays deterministic.
        {
            sampler probe(detail::check_seed(spec.seed, "cotton.flat_invariance.probe"));
            double biggest = 0.0;
            for (int k = 0; k < 20; ++k) {
                const point x = probe.sample_point(spec.base);
                for (double c : cotton_york_components(*stru, x))
                    biggest = std::max(biggest, std::abs(c));
            }
            if (biggest <= 1e-9) {
                add("cotton.flat_invariance", [&spec, &ims] {
                    auto inputs = detail::scale_inputs(spec, "cotton.flat_invariance", 3);
                    return detail::evaluate_check(
                        spec, "cotton.flat_invariance", inputs,
                        [&ims](const sample_input& in) {
                            return curvature_invariance_defect(
                                ims[static_cast<std::size_t>(in.scale_index)], in.p,
                                in.vecs[0], in.vecs[1], in.vecs[2]);
                        });
                });
            }
        }
    }

    if (wants_gauss) {
        add("gauss.mean_curvature_trace", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "gauss.mean_curvature_trace", 0);
            return detail::evaluate_check(
                spec, "gauss.mean_curvature_trace", inputs, [&ims](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const int m = im.n;
                    const int N = im.space.total_dim();
                    const mean_curvature_result h = mean_curvature(im, in.p);
                    const std::vector<double> ginv =
                        invert_matrix(metric_values(im.space.g, in.p), m, "base metric");
                    const double e2u = std::exp(2.0 * eval_value(im.log_factor, in.p));
                    std::vector<double> trace(static_cast<std::size_t>(N), 0.0);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) {
                            const std::vector<double> ii = second_fundamental_form(
                                im, in.p, detail::unit_axis(m, i), detail::unit_axis(m, j));
                            const double w =
                                ginv[static_cast<std::size_t>(i * m + j)] / (e2u * m);
                            for (int c = 0; c < N; ++c)
                                trace[static_cast<std::size_t>(c)] +=
                                    w * ii[static_cast<std::size_t>(c)];
                        }
                    return detail::max_abs_difference(trace, h.H);
                });
        });
        add("gauss.mean_curvature_norm", [&spec, &ims] {
            auto inputs = detail::scale_inputs(spec, "gauss.mean_curvature_norm", 0);
            std::vector<metric_field> induced;
            induced.reserve(ims.size());
            for (const spacelike_immersion& im : ims)
                induced.push_back(rescale_metric(im.space.g, im.log_factor));
            return detail::evaluate_check(
                spec, "gauss.mean_curvature_norm", inputs,
                [&ims, induced](const sample_input& in) {
                    const spacelike_immersion& im =
                        ims[static_cast<std::size_t>(in.scale_index)];
                    const double scal =
                        riemann(induced[static_cast<std::size_t>(in.scale_index)], in.p)
                            .scalar;
                    return std::abs(mean_curvature(im, in.p).norm_sq -
                                    scal / (im.n * (im.n - 1)));
                });
        });
        if (n == 2) {
            add("gauss.sectional_vanishing", [&spec, &ims] {
                auto inputs = detail::scale_inputs(spec, "gauss.sectional_vanishing", 0);
                return detail::evaluate_check(spec, "gauss.sectional_vanishing", inputs,
                                              [&ims](const sample_input& in) {
                                                  return gauss_sectional_defect(
                                                      ims[static_cast<std::size_t>(
                                                          in.scale_index)],
                                                      in.p);
                                              });
            });
            if (stru) {
                add("gauss.trace_identity", [&spec, stru] {
                    auto inputs = detail::scale_inputs(spec, "gauss.trace_identity", 0);
                    return detail::evaluate_check(
                        spec, "gauss.trace_identity", inputs,
                        [&spec, stru](const sample_input& in) {
                            const scalar_field& u =
                                spec.scales[static_cast<std::size_t>(in.scale_index)];
                            const double gauss = 0.5 * riemann(spec.g, in.p).scalar;
                            const jet uj = eval_jet(u, in.p, 2);
                            const metric_jets mj = eval_metric_jets(spec.g, in.p, 1);
                            const double lap = laplacian_jet(mj, uj).value();
                            const double em2u = std::exp(-2.0 * uj.value());
                            const double lhs = (gauss - lap) * em2u;
                            const std::vector<double> P = moebius_transform(*stru, u, in.p);
                            const std::vector<double> ginv =
                                invert_matrix(metric_values(spec.g, in.p), 2, "base metric");
                            double tr = 0.0;
                            for (int i = 0; i < 2; ++i)
                                for (int j = 0; j < 2; ++j)
                                    tr += ginv[static_cast<std::size_t>(i * 2 + j)] *
                                          P[static_cast<std::size_t>(i * 2 + j)];
                            return std::abs(lhs - tr * em2u);
                        });
                });
            }
        }
    }

    if (selected("fibers")) {
        add("fibers.closed_vs_numeric", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "fibers.closed_vs_numeric", 2);
            return detail::evaluate_check(
                spec, "fibers.closed_vs_numeric", inputs, [&a](const sample_input& in) {
                    return detail::max_abs_difference(
                        fiber_second_fundamental_form(a, in.p, in.vecs[0], in.vecs[1]),
                        fiber_ii_numeric(a, in.p, in.vecs[0], in.vecs[1]));
                });
        });
        add("fibers.trace_split", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "fibers.trace_split", 2);
            return detail::evaluate_check(
                spec, "fibers.trace_split", inputs, [&a](const sample_input& in) {
                    const int m = a.n;
                    const int N = a.total_dim();
                    const double t = in.p.x[0], rho = in.p.x[1];
                    const point x = base_of(a, in.p);
                    const std::vector<double> A = alpha_values(a.alpha, rho, x);
                    const std::vector<double> Adot = alpha_dot_values(a.alpha, rho, x);
                    const std::vector<double> Ainv = invert_matrix(A, m, "family");
                    std::vector<double> D(static_cast<std::size_t>(m * m), 0.0);
                    double trD = 0.0;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) {
                            double d = 0.0;
                            for (int k = 0; k < m; ++k)
                                d += Ainv[static_cast<std::size_t>(i * m + k)] *
                                     Adot[static_cast<std::size_t>(k * m + j)];
                            D[static_cast<std::size_t>(i * m + j)] = d;
                            if (i == j) trD += d;
                        }
                    const std::vector<double>& V = in.vecs[0];
                    const std::vector<double>& W = in.vecs[1];
                    std::vector<double> D0V(static_cast<std::size_t>(m), 0.0);
                    for (int i = 0; i < m; ++i) {
                        double d = -trD / m * V[static_cast<std::size_t>(i)];
                        for (int j = 0; j < m; ++j)
                            d += D[static_cast<std::size_t>(i * m + j)] *
                                 V[static_cast<std::size_t>(j)];
                        D0V[static_cast<std::size_t>(i)] = d;
                    }
                    const double g_d0vw = detail::ambient_pairing(
                        a, in.p, lift_vector(a, D0V), lift_vector(a, W));
                    const double g_vw = detail::ambient_pairing(a, in.p, lift_vector(a, V),
                                                                lift_vector(a, W));
                    const std::vector<double> ii =
                        fiber_second_fundamental_form(a, in.p, V, W);
                    std::vector<double> expected(static_cast<std::size_t>(N), 0.0);
                    expected[0] =
                        g_vw * (-trD / (2.0 * t * m)) + g_d0vw * (-1.0 / (2.0 * t));
                    expected[1] = g_vw * (-(1.0 - rho * trD / m) / (t * t)) +
                                  g_d0vw * (rho / (t * t));
                    return detail::max_abs_difference(ii, expected);
                });
        });
        // Umbilical fibers hold for pointwise conformal families only; probe
        // the trace-free part of the rate on a fixed point set to decide.
        {
            sampler probe(detail::check_seed(spec.seed, "fibers.umbilical.probe"));
            double biggest = 0.0;
            for (int k = 0; k < 20; ++k) {
                const point p = sample_band_point(probe, a);
                const point x = base_of(a, p);
                const std::vector<double> A = alpha_values(a.alpha, p.x[1], x);
                const std::vector<double> Adot = alpha_dot_values(a.alpha, p.x[1], x);
                const std::vector<double> Ainv = invert_matrix(A, a.n, "family");
                std::vector<double> D(static_cast<std::size_t>(a.n * a.n), 0.0);
                double tr = 0.0;
                for (int i = 0; i < a.n; ++i)
                    for (int j = 0; j < a.n; ++j) {
                        double d = 0.0;
                        for (int l = 0; l < a.n; ++l)
                            d += Ainv[static_cast<std::size_t>(i * a.n + l)] *
                                 Adot[static_cast<std::size_t>(l * a.n + j)];
                        D[static_cast<std::size_t>(i * a.n + j)] = d;
                        if (i == j) tr += d;
                    }
                for (int i = 0; i < a.n; ++i)
                    for (int j = 0; j < a.n; ++j)
                        biggest = std::max(
                            biggest, std::abs(D[static_cast<std::size_t>(i * a.n + j)] -
                                              (i == j ? tr / a.n : 0.0)));
            }
            if (biggest <= 1e-9) {
                add("fibers.umbilical", [&spec, &a] {
                    auto inputs = detail::band_inputs(spec, a, "fibers.umbilical", 0);
                    return detail::evaluate_check(spec, "fibers.umbilical", inputs,
                                                  [&a](const sample_input& in) {
                                                      return fiber_umbilicality_defect(a,
                                                                                       in.p);
                                                  });
                });
            }
        }
    }

    if (selected("minkowski")) {
        add("minkowski.pullback", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "minkowski.pullback", 0);
            return detail::evaluate_check(spec, "minkowski.pullback", inputs,
                                          [&a](const sample_input& in) {
                                              return minkowski_cross_check(a, in.p);
                                          });
        });
        add("minkowski.cone_quadric", [&spec, &a] {
            auto inputs = detail::band_inputs(spec, a, "minkowski.cone_quadric", 0);
            return detail::evaluate_check(
                spec, "minkowski.cone_quadric", inputs, [&a](const sample_input& in) {
                    const double t = in.p.x[0], rho = in.p.x[1];
                    return std::abs(minkowski_cone_value(a, in.p) - 2.0 * rho * t * t);
                });
        });
        add("minkowski.slice_to_cone", [&spec, &a] {
            auto inputs = detail::slice_inputs(spec, a, "minkowski.slice_to_cone", 0);
            return detail::evaluate_check(spec, "minkowski.slice_to_cone", inputs,
                                          [&a](const sample_input& in) {
                                              return std::abs(minkowski_cone_value(a, in.p));
                                          });
        });
        add("minkowski.equivariance", [&spec, &a] {
            sampler rng(detail::check_seed(spec.seed, "minkowski.equivariance"));
            std::vector<sample_input> inputs;
            for (int k = 0; k < spec.samples; ++k) {
                sample_input in;
                in.p = sample_band_point(rng, a);
                in.aux = rng.uniform(0.5, 2.0);
                inputs.push_back(std::move(in));
            }
            return detail::evaluate_check(
                spec, "minkowski.equivariance", inputs, [&a](const sample_input& in) {
                    std::vector<double> scaled = in.p.x;
                    scaled[0] *= in.aux;
                    const point q = make_point(a.total, scaled);
                    const std::vector<double> F = minkowski_immersion(a, in.p);
                    const std::vector<double> Fq = minkowski_immersion(a, q);
                    double worst = 0.0;
                    for (std::size_t c = 0; c < F.size(); ++c)
                        worst = std::max(worst, std::abs(Fq[c] - in.aux * F[c]));
                    return worst;
                });
        });
    }

    if (selected("gauss_bonnet")) {
        add("gauss_bonnet.total_curvature", [&spec, &ims] {
            const check_info& info = find_check("gauss_bonnet.total_curvature");
            check_result out;
            out.id = info.id;
            out.statement = info.statement;
            out.tolerance = info.tolerance;
            const auto ov = spec.tolerance_overrides.find(out.id);
            if (ov != spec.tolerance_overrides.end()) {
                out.tolerance = ov->second;
                out.tolerance_overridden = true;
            }
            constexpr int kGrid = 160;
            constexpr double kEdge = 1e-3;
            constexpr double kFourPi = 4.0 * 3.14159265358979323846;
            const interval b0 = spec.base->bounds[0];
            const interval b1 = spec.base->bounds[1];
            const double h0 = (b0.hi - b0.lo - 2.0 * kEdge) / kGrid;
            const double h1 = (b1.hi - b1.lo - 2.0 * kEdge) / kGrid;
            const int threads = detail::thread_count();
            for (std::size_t s = 0; s < ims.size(); ++s) {
                const spacelike_immersion& im = ims[s];
                std::vector<double> rows(kGrid, 0.0);
                const auto work = [&](int rb, int re) {
                    for (int i = rb; i < re; ++i) {
                        const double c0 = b0.lo + kEdge + (i + 0.5) * h0;
                        double acc = 0.0;
                        for (int j = 0; j < kGrid; ++j) {
                            const double c1 = b1.lo + kEdge + (j + 0.5) * h1;
                            const point x = make_point(spec.base, {c0, c1});
                            const std::vector<double> gv = metric_values(spec.g, x);
                            const double det = gv[0] * gv[3] - gv[1] * gv[2];
                            const double e2u = std::exp(2.0 * eval_value(im.log_factor, x));
                            acc += mean_curvature(im, x).norm_sq * e2u *
                                   std::sqrt(std::max(det, 0.0)) * h0 * h1;
                        }
                        rows[static_cast<std::size_t>(i)] = acc;
                    }
                };
                if (threads <= 1) {
                    work(0, kGrid);
                } else {
                    std::vector<std::thread> pool;
                    const int chunk = (kGrid + threads - 1) / threads;
                    for (int t = 0; t < threads; ++t) {
                        const int rb = t * chunk;
                        const int re = std::min(kGrid, rb + chunk);
                        if (rb >= re) break;
                        pool.emplace_back(work, rb, re);
                    }
                    for (std::thread& th : pool) th.join();
                }
                double total = 0.0;
                for (double r : rows) total += r;  // fixed-order reduction
                sample_record rec;
                rec.scale = spec.scale_texts[s];
                rec.defect = std::abs(total - kFourPi) / kFourPi;
                out.samples.push_back(rec);
                if (out.samples.size() == 1 || rec.defect > out.max_defect) {
                    out.max_defect = rec.defect;
                    out.witness_scale = rec.scale;
                }
            }
            out.passed = out.max_defect <= out.tolerance;
            return out;
        });
    }

    // ----- execute in canonical (sorted-by-id) order -----
    report.passed = true;
    for (const auto& entry : plan) {
        report.checks.push_back(entry.second());
        report.passed = report.passed && report.checks.back().passed;
    }
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    return report;
}

}  // namespace camb
