// =====================================================================================
// camb — scenario verification CLI
//
// camb verify <scenario.scn> [--suite NAME]... [--seed N] [--samples N]
//             [--tolerance CHECK=VALUE]... [--format json|text|csv]
//             [--out PATH] [--timing]
//
// Exit codes: 0 every check passed, 1 at least one check failed,
//             2 the input could not be used (bad file, bad option, bad value).
// =====================================================================================

#include "camb/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

/// Replace the scenario's suite list with the named ones, kept in canonical
/// order; unknown names are rejected.
void apply_suite_selection(camb::scenario_spec& spec, const std::vector<std::string>& names) {
    const std::vector<std::string>& known = camb::suite_names();
    for (const std::string& s : names)
        if (std::find(known.begin(), known.end(), s) == known.end())
            throw camb::schema_error("unknown suite '" + s + "'");
    std::vector<std::string> canon;
    for (const std::string& name : known)
        if (std::find(names.begin(), names.end(), name) != names.end()) canon.push_back(name);
    spec.suites = std::move(canon);
}

/// Parse one --tolerance CHECK=VALUE override into the scenario.
void apply_tolerance_override(camb::scenario_spec& spec, const std::string& arg) {
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
        throw camb::schema_error("tolerance override must look like CHECK=VALUE, got '" + arg +
                                 "'");
    const std::string id = arg.substr(0, eq);
    const std::string text = arg.substr(eq + 1);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw camb::schema_error("tolerance override value in '" + arg + "' is not a number");
    }
    if (!(value > 0.0))
        throw camb::schema_error("tolerance override in '" + arg + "' must be positive");
    spec.tolerance_overrides[id] = value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification suites for conformal ambient metrics and their immersions"};
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "run the verification suites of a scenario");
    std::string scenario_path;
    std::string format = "text";
    std::string out_path;
    std::vector<std::string> suites;
    std::vector<std::string> tolerances;
    std::uint64_t seed = 0;
    int samples = 0;
    bool timing = false;
    verify->add_option("scenario", scenario_path, "scenario (.scn) file")->required();
    auto* suite_opt =
        verify->add_option("--suite", suites, "run only the named suite (repeatable)");
    auto* seed_opt = verify->add_option("--seed", seed, "override the sampling seed");
    auto* samples_opt = verify->add_option("--samples", samples,
                                           "override the per-check sample count")
                            ->check(CLI::PositiveNumber);
    verify->add_option("--tolerance", tolerances,
                       "override one check tolerance as CHECK=VALUE (repeatable)");
    verify->add_option("--format", format, "output format (default text)")
        ->check(CLI::IsMember({"json", "text", "csv"}));
    verify->add_option("--out", out_path, "write the report to a file instead of stdout");
    verify->add_flag("--timing", timing, "include wall-clock timing in JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        camb::scenario_spec spec = camb::load_scenario(scenario_path);
        if (suite_opt->count() > 0) apply_suite_selection(spec, suites);
        if (seed_opt->count() > 0) spec.seed = seed;
        if (samples_opt->count() > 0) spec.samples = samples;
        for (const std::string& t : tolerances) apply_tolerance_override(spec, t);

        const camb::verification_report report = camb::run_suites(spec);

        std::string body;
        if (format == "json")
            body = camb::render_json(report, timing);
        else if (format == "csv")
            body = camb::render_csv(report);
        else
            body = camb::render_text(report);

        if (out_path.empty()) {
            std::cout << body;
        } else {
            std::ofstream out(out_path);
            if (!out) throw camb::schema_error("cannot open output file '" + out_path + "'");
            out << body;
        }
        return report.passed ? 0 : 1;
    } catch (const camb::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
