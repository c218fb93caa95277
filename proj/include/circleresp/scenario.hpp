#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circleresp/maps.hpp"
#include "circleresp/oracle.hpp"
#include "circleresp/response.hpp"
#include "circleresp/spectral.hpp"
#include "circleresp/transfer.hpp"

namespace circleresp {

// A fully-parsed scenario configuration. File format: flat `key = value`
// lines under [map] / [perturbation] / [noise] / [numerics] / [output]
// sections, `#` comments, and a top-level `name` key. Unknown keys and
// malformed values raise ConfigError with file:line context.
struct Scenario {
    std::string name = "scenario";

    // [map]
    std::string map_kind;  // doubling | arnold | custom-coeffs
    double arnold_a = 0.0;
    double arnold_epsilon = 0.0;
    int custom_degree = 0;
    TrigPoly custom_lift;

    // [perturbation] — D_delta = Id + delta*S1 + (delta^2/2)*S2
    TrigPoly s1;
    TrigPoly s2;
    double delta_max = 0.05;

    // [noise] — absent section means deterministic
    std::optional<double> xi;

    // [numerics]
    int truncation_order = 64;
    int quadrature_size = 0;  // 0 -> defaults to 8N
    std::vector<double> delta_grid = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
    std::string weak_norm;  // "W11" | "C0"; empty -> W11 deterministic, C0 noisy
    double markov_tol = 1e-10;
    int ulam_bins = 0;  // 0 -> 4096 noisy, 1024 deterministic
    long long mc_steps = 1000000;
    long long mc_burn_in = 10000;
    std::uint64_t seed = 12345;
    int threads = 1;

    // [output]
    std::string out_dir = "out";

    bool noisy() const { return xi.has_value(); }
    int effective_quadrature() const {
        return quadrature_size > 0 ? quadrature_size : 8 * truncation_order;
    }
    int effective_ulam_bins() const {
        return ulam_bins > 0 ? ulam_bins : (noisy() ? 4096 : 1024);
    }
};

Scenario parse_scenario_text(const std::string& text, const std::string& origin);
Scenario parse_scenario_file(const std::string& path);

// Parses the perturbation-profile mini-grammar: comma-separated terms
// `c`, `c*sin(k)`, `c*cos(k)` (bare `sin(k)` / `cos(k)` mean c=1), e.g.
// "1*sin(1)" for sin(2 pi x) or "1" for a rigid rotation profile.
TrigPoly parse_trig_poly(const std::string& text, const std::string& context);

// Semantic validation beyond syntax: ranges, delta grid admissibility,
// expanding base map for deterministic scenarios, diffeo admissibility.
// Throws ConfigError.
void validate_scenario(const Scenario& scenario);

MapFamily build_family(const Scenario& scenario);

// One verdict line of a scenario report.
struct CheckLine {
    std::string name;
    std::string verdict;  // PASS | FAIL | SKIP
    double measured = 0.0;
    double threshold = 0.0;
    std::string comparator;  // "<=", ">=", "in [a,b]" rendered in `note`
    std::string note;
    bool passed() const { return verdict != "FAIL"; }
};

// Exact bin masses of a spectral density: integral over [i/n, (i+1)/n).
std::vector<double> spectral_bin_masses(const SpectralFunction& f, int n_bins);
// Coarsen masses by summing groups (from_bins must be a multiple of to_bins).
std::vector<double> coarsen_masses(const std::vector<double>& masses, int to_bins);
// L1 distance between two densities represented by bin masses:
// sum_i |p_i - q_i| (the L1 distance of the piecewise-constant densities).
double l1_mass_distance(const std::vector<double>& p, const std::vector<double>& q);

// Cross-oracle distances for the three-route comparison.
struct OracleComparison {
    int ulam_bins = 0;
    double spectral_vs_ulam = 0.0;  // L1, at Ulam resolution
    double spectral_vs_mc = 0.0;    // L1, at 512 bins
    double ulam_vs_mc = 0.0;        // L1, at 512 bins
    double mc_tolerance = 0.0;      // 5 * stderr_proxy * sqrt(512)
};

OracleComparison compare_report(const SpectralFunction& h, const std::vector<double>& ulam_density,
                                const TrajectoryEstimate& mc);

// Everything run_scenario computed, for callers that want the objects and
// not just the verdicts.
struct ScenarioReport {
    Scenario scenario;
    std::vector<CheckLine> checks;
    SpectralFunction h0{0};
    SpectralFunction h_dot{0};
    SpectralFunction qr_limit{0};
    SpectralFunction h_ddot{0};
    std::vector<double> sweep_deltas;
    std::vector<double> first_order_remainders;
    std::vector<double> second_order_remainders;
    double first_order_slope = 0.0;
    double second_order_slope = 0.0;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed()) return false;
        return true;
    }
};

// Runs the full pipeline: operators, stationary density, responses, delta
// sweep with remainder slopes, FD cross-check, resolvent checks, diagnostics,
// oracles, and (when write_outputs) the CSV/report artifacts under
// scenario.out_dir. Throws ConfigError for invalid scenarios; numerical
// failures surface as SolverError.
ScenarioReport run_scenario(const Scenario& scenario, bool write_outputs = true);

// `sweep` verb: only the delta sweep and remainders (plus remainders.csv).
ScenarioReport run_sweep(const Scenario& scenario, bool write_outputs = true);

// Applies a `--param key=value` override (numerics keys, xi, output dir).
void apply_override(Scenario& scenario, const std::string& key_equals_value);

// Renders report lines; identical content to report.txt.
std::string render_report(const ScenarioReport& report);

// 17-significant-digit formatting used by every CSV cell (round-trip exact).
std::string format_g17(double value);

}  // namespace circleresp
