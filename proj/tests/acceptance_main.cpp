// Acceptance gate: every shipped capability is exercised end to end against
// its stated tolerance and runtime budget, one verdict line per criterion.
// Runs the library directly (not through run_scenario) so a pipeline bug
// cannot vouch for itself.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "circleresp/diagnostics.hpp"
#include "circleresp/oracle.hpp"
#include "circleresp/response.hpp"
#include "circleresp/scenario.hpp"

using namespace circleresp;

namespace {

constexpr std::uint64_t kGSeed = 0xACCE55ull;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

double max_abs(const SpectralFunction& f) { return norm_ck(f, 0); }

std::string config_path(const char* name) {
    return std::string(CIRCLERESP_CONFIG_DIR) + "/" + name;
}

struct Core {
    MapFamily family;
    OperatorMatrix transfer_T;
    OperatorMatrix op_zero;
    SpectralFunction h0;
};

Core build_core(const Scenario& sc) {
    MapFamily family = build_family(sc);
    OperatorMatrix transfer_T =
        build_deterministic(family, 0.0, sc.truncation_order, sc.effective_quadrature());
    OperatorMatrix op_zero =
        sc.noisy() ? build_annealed(family, 0.0, sc.truncation_order, sc.effective_quadrature())
                   : transfer_T;
    SpectralFunction h0 = stationary_density(op_zero, sc.markov_tol).h;
    return Core{std::move(family), std::move(transfer_T), std::move(op_zero), std::move(h0)};
}

OperatorMatrix build_at(const Scenario& sc, const MapFamily& family, double delta) {
    return sc.noisy()
               ? build_annealed(family, delta, sc.truncation_order, sc.effective_quadrature())
               : build_deterministic(family, delta, sc.truncation_order,
                                     sc.effective_quadrature());
}

struct Sweep {
    std::vector<double> grid;  // ascending
    std::map<double, OperatorMatrix> ops;
    std::map<double, SpectralFunction> densities;
};

Sweep run_sweep(const Scenario& sc, const Core& core) {
    Sweep sweep;
    sweep.grid = sc.delta_grid;
    std::sort(sweep.grid.begin(), sweep.grid.end());
    for (double d : sweep.grid)
        for (double signed_d : {d, -d}) {
            OperatorMatrix op = build_at(sc, core.family, signed_d);
            sweep.densities.emplace(signed_d, stationary_density(op, sc.markov_tol).h);
            sweep.ops.emplace(signed_d, std::move(op));
        }
    return sweep;
}

std::function<double(const SpectralFunction&)> weak_norm_of(const Scenario& sc) {
    const bool use_c0 = sc.weak_norm == "C0" || (sc.weak_norm.empty() && sc.noisy());
    if (use_c0) return [](const SpectralFunction& f) { return norm_ck(f, 0); };
    return [](const SpectralFunction& f) { return norm_wk1(f, 1); };
}

// Smallest Neumann length whose geometrically-extrapolated envelope tail
// drops below `target`; -1 when the measured rates show no contraction.
int neumann_terms_from_envelope(const std::vector<double>& rates, double strong_scale,
                                double target) {
    const int n_max = static_cast<int>(rates.size());
    if (n_max < 4) return -1;
    const double last = rates[static_cast<std::size_t>(n_max - 1)];
    if (last * strong_scale < target) return n_max + 4;
    const double mid = rates[static_cast<std::size_t>(n_max / 2 - 1)];
    if (!(mid > 0.0) || !(last > 0.0)) return n_max + 4;
    double ratio = std::pow(last / mid, 1.0 / (n_max - n_max / 2));
    if (!(ratio < 0.9999)) return -1;
    ratio = std::max(ratio, 1e-6);
    double tail = last * strong_scale * ratio / (1.0 - ratio);
    int n = n_max;
    while (tail > target && n < 4000) {
        tail *= ratio;
        ++n;
    }
    return tail <= target ? n : -1;
}

struct SlopeResult {
    double first = 0.0;
    double second = 0.0;
    double seconds = 0.0;
};

SlopeResult scenario_slopes(const Scenario& sc) {
    const auto start = std::chrono::steady_clock::now();
    const Core core = build_core(sc);
    const SpectralFunction ldot_h0 = ldot_apply(core.family, core.transfer_T, core.h0);
    const SpectralFunction h_dot = resolve(core.op_zero, ldot_h0);
    const QuadraticResponse qr =
        quadratic_response(core.op_zero, core.family, core.transfer_T, core.h0, h_dot);
    const Sweep sweep = run_sweep(sc, core);
    const auto weak = weak_norm_of(sc);
    std::vector<std::pair<double, double>> first_pairs, second_pairs;
    for (double d : sweep.grid) {
        const SpectralFunction& hd = sweep.densities.at(d);
        first_pairs.emplace_back(d, weak(hd - core.h0 - d * h_dot));
        second_pairs.emplace_back(d, weak(hd - core.h0 - d * h_dot - (d * d) * qr.qr_limit));
    }
    SlopeResult out;
    out.first = taylor_slope(first_pairs).slope;
    out.second = taylor_slope(second_pairs).slope;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---------------------------------------------------------------------------
// The criteria

bool criterion_linear_golden(std::string& detail) {
    const Scenario sc = parse_scenario_file(config_path("doubling.cfg"));
    const Core core = build_core(sc);  // N = 32, M = 256 from the shipped config
    const SpectralFunction h_dot =
        linear_response(core.op_zero, core.family, core.transfer_T, core.h0);
    const double err =
        max_abs(h_dot - SpectralFunction::harmonic(1, -kTwoPi, 0.0, sc.truncation_order));
    detail = fmt("max|h_dot - (-2 pi cos 2 pi x)| = %.3e, tol 1e-10", err);
    return err < 1e-10;
}

bool criterion_quadratic_golden(std::string& detail) {
    const Scenario sc = parse_scenario_file(config_path("doubling.cfg"));
    const Core core = build_core(sc);
    const SpectralFunction h_dot =
        linear_response(core.op_zero, core.family, core.transfer_T, core.h0);
    const QuadraticResponse qr =
        quadratic_response(core.op_zero, core.family, core.transfer_T, core.h0, h_dot);
    const SpectralFunction ref =
        SpectralFunction::harmonic(2, kTwoPi * kTwoPi, 0.0, sc.truncation_order) +
        SpectralFunction::harmonic(1, kTwoPi * kTwoPi, 0.0, sc.truncation_order);
    const double qr_err = max_abs(qr.qr_limit - ref);
    const double hddot_err = max_abs(qr.h_ddot - 2.0 * ref);
    detail = fmt("qr_limit err %.3e (tol 1e-8), h_ddot err %.3e (tol 2e-8)", qr_err, hddot_err);
    return qr_err < 1e-8 && hddot_err < 2e-8;
}

bool criterion_first_order_slopes(std::string& detail) {
    const SlopeResult doubling = scenario_slopes(parse_scenario_file(config_path("doubling.cfg")));
    const SlopeResult arnold = scenario_slopes(parse_scenario_file(config_path("arnold.cfg")));
    detail = fmt("doubling %.3f (%.1fs), arnold %.3f (%.1fs); need [1.9,2.1], <30s each",
                 doubling.first, doubling.seconds, arnold.first, arnold.seconds);
    const auto ok = [](const SlopeResult& r) {
        return r.first >= 1.9 && r.first <= 2.1 && r.seconds < 30.0;
    };
    return ok(doubling) && ok(arnold);
}

bool criterion_second_order_slopes(std::string& detail) {
    const SlopeResult doubling = scenario_slopes(parse_scenario_file(config_path("doubling.cfg")));
    const SlopeResult arnold = scenario_slopes(parse_scenario_file(config_path("arnold.cfg")));
    detail = fmt("doubling %.3f, arnold %.3f; need >= 2.7", doubling.second, arnold.second);
    return doubling.second >= 2.7 && arnold.second >= 2.7;
}

bool criterion_cross_oracles(std::string& detail) {
    const Scenario sc = parse_scenario_file(config_path("arnold.cfg"));
    const Core core = build_core(sc);
    const UlamMatrix um = ulam_matrix(core.family, 0.0, sc.effective_ulam_bins());
    const std::vector<double> ulam_density = ulam_stationary(um);
    const TrajectoryEstimate mc =
        monte_carlo_stationary(core.family, 0.0, sc.mc_steps, sc.mc_burn_in, sc.seed);
    const OracleComparison cmp = compare_report(core.h0, ulam_density, mc);
    detail = fmt("spectral vs Ulam-%d L1 %.3e (tol 2e-3); spectral vs MC %.3e (bound %.3e)",
                 cmp.ulam_bins, cmp.spectral_vs_ulam, cmp.spectral_vs_mc, cmp.mc_tolerance);
    return cmp.spectral_vs_ulam < 2e-3 && cmp.spectral_vs_mc < cmp.mc_tolerance;
}

bool criterion_markov_conservation(std::string& detail) {
    double worst_defect = 0.0;
    double worst_mean_drift = 0.0;
    for (const char* name : {"doubling.cfg", "arnold.cfg"}) {
        const Scenario sc = parse_scenario_file(config_path(name));
        const Core core = build_core(sc);
        const Sweep sweep = run_sweep(sc, core);
        worst_defect = std::max({worst_defect, core.transfer_T.markov_defect(),
                                 core.op_zero.markov_defect()});
        for (const auto& entry : sweep.ops)
            worst_defect = std::max(worst_defect, entry.second.markov_defect());
        for (int i = 0; i < 50; ++i) {
            const SpectralFunction f =
                random_mean_zero_function(kGSeed, static_cast<std::uint64_t>(i),
                                          sc.truncation_order) +
                SpectralFunction::constant(1.0, sc.truncation_order);
            worst_mean_drift =
                std::max(worst_mean_drift, std::abs(apply(core.op_zero, f).mean() - f.mean()));
        }
    }
    detail = fmt("max markov defect %.3e, max |mean(Lf)-mean(f)| %.3e over 50 f; tol 1e-10",
                 worst_defect, worst_mean_drift);
    return worst_defect < 1e-10 && worst_mean_drift < 1e-10;
}

bool criterion_resolvent_identity(std::string& detail) {
    std::string parts;
    bool pass = true;
    for (const char* name : {"doubling.cfg", "arnold.cfg"}) {
        const Scenario sc = parse_scenario_file(config_path(name));
        const Core core = build_core(sc);
        const int n = sc.truncation_order;
        double worst_residual = 0.0;
        double strong_scale = 1.0;
        std::vector<SpectralFunction> gs, vs;
        for (int i = 0; i < 20; ++i) {
            gs.push_back(random_mean_zero_function(kGSeed, 100 + static_cast<std::uint64_t>(i), n));
            double residual = 0.0;
            vs.push_back(resolve(core.op_zero, gs.back(), &residual));
            worst_residual = std::max(worst_residual, residual);
            strong_scale = std::max(strong_scale, sc.noisy() ? norm_ck(gs.back(), 1)
                                                             : norm_wk1(gs.back(), 2));
        }
        const MixingEstimate mix = mixing_rate(
            core.op_zero, 20,
            sc.noisy() ? NormPairKind::c0_over_c1 : NormPairKind::w11_over_w21);
        const int terms = neumann_terms_from_envelope(mix.rates, strong_scale, 1e-9);
        double worst_gap = -1.0;
        if (terms > 0) {
            worst_gap = 0.0;
            for (int i = 0; i < 20; ++i)
                worst_gap = std::max(worst_gap,
                                     norm_l1(vs[static_cast<std::size_t>(i)] -
                                             neumann_resolve(core.op_zero,
                                                             gs[static_cast<std::size_t>(i)],
                                                             terms)));
        }
        parts += fmt("%s%s: residual %.3e, neumann(%d) gap %.3e", parts.empty() ? "" : "; ",
                     sc.name.c_str(), worst_residual, terms, worst_gap);
        pass = pass && worst_residual < 1e-10 && terms > 0 && worst_gap < 1e-8;
    }
    detail = parts + " (tols 1e-10 / 1e-8)";
    return pass;
}

bool criterion_mixing_envelope(std::string& detail) {
    const Scenario sc = parse_scenario_file(config_path("arnold.cfg"));
    const Core core = build_core(sc);
    const MixingEstimate mix = mixing_rate(core.op_zero, 20, NormPairKind::c0_over_c1);
    const double lower = kernel_lower_bound(core.family, 0.0);
    const double c_meas = core.family.noise->periodized_ck_norm(0);
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < mix.rates.size(); ++i)
        worst_ratio =
            std::max(worst_ratio, mix.rates[i] / (c_meas * std::pow(1.0 - lower,
                                                                    static_cast<double>(i))));
    detail = fmt("max a_n / (C (1-l)^(n-1)) = %.3e over n <= 20, l = %.3e, C = %.3e",
                 worst_ratio, lower, c_meas);
    return worst_ratio <= 1.0 && lower > 0.0;
}

bool criterion_regularization(std::string& detail) {
    const Scenario sc = parse_scenario_file(config_path("arnold.cfg"));
    const NoiseKernel kernel(*sc.xi);
    const int n = sc.truncation_order;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const SpectralFunction f =
            random_mean_zero_function(kGSeed, 200 + static_cast<std::uint64_t>(i), n) +
            SpectralFunction::constant(0.3, n);
        const SpectralFunction smoothed = convolve_gaussian(f, kernel);
        const double f_l1 = norm_l1(f);
        for (int j = 0; j <= 4; ++j)
            worst = std::max(worst,
                             norm_ck(smoothed, j) / (kernel.periodized_ck_norm(j) * f_l1));
    }
    detail = fmt("max ||rho*f||_Cj / (||rho~||_Cj ||f||_L1) = %.12f over 20 f, j <= 4", worst);
    return worst <= 1.0 + 1e-10;
}

bool criterion_fd_exactness(std::string& detail) {
    const int n = 8;
    const SpectralFunction h0 =
        SpectralFunction::constant(1.0, n) + SpectralFunction::harmonic(1, 0.3, 0.0, n);
    const SpectralFunction a =
        SpectralFunction::harmonic(1, 0.0, 1.1, n) + SpectralFunction::harmonic(2, -0.4, 0.0, n);
    const SpectralFunction b = SpectralFunction::harmonic(2, 0.6, -0.2, n);
    const FiniteDifferenceResponse fd = finite_difference_response(
        [&](double d) { return h0 + d * a + (d * d) * b; },
        {1e-2, 5e-3, 2.5e-3, 1.25e-3}, [](const SpectralFunction& f) { return norm_l1(f); });
    const double hdot_err = max_abs(fd.h_dot_fd - a);
    const double qr_err = max_abs(fd.qr_fd - 2.0 * b);

    std::vector<std::pair<double, double>> quad_pairs, cubic_pairs;
    for (double d : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        quad_pairs.emplace_back(d, 0.7 * d * d);
        cubic_pairs.emplace_back(d, 0.4 * d * d * d);
    }
    const double slope2_err = std::abs(taylor_slope(quad_pairs).slope - 2.0);
    const double slope3_err = std::abs(taylor_slope(cubic_pairs).slope - 3.0);
    detail = fmt("FD errs %.3e / %.3e, slope errs %.3e / %.3e; tol 1e-10", hdot_err, qr_err,
                 slope2_err, slope3_err);
    return hdot_err < 1e-10 && qr_err < 1e-10 && slope2_err < 1e-10 && slope3_err < 1e-10;
}

struct Criterion {
    const char* name;
    double budget_seconds;  // <= 0: no budget
    bool (*body)(std::string&);
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"doubling linear-response golden", 1.0, criterion_linear_golden},
        {"doubling quadratic-response golden", 2.0, criterion_quadratic_golden},
        {"first-order remainder slopes", 60.0, criterion_first_order_slopes},
        {"second-order remainder slopes", 30.0, criterion_second_order_slopes},
        {"arnold cross-oracle agreement", 60.0, criterion_cross_oracles},
        {"markov conservation", 0.0, criterion_markov_conservation},
        {"resolvent identity + neumann", 0.0, criterion_resolvent_identity},
        {"mixing envelope (annealed arnold)", 0.0, criterion_mixing_envelope},
        {"kernel regularization inequality", 0.0, criterion_regularization},
        {"finite-difference oracle exactness", 0.0, criterion_fd_exactness},
    };

    int failures = 0;
    int id = 0;
    for (const Criterion& c : criteria) {
        ++id;
        std::string detail;
        bool pass = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            pass = c.body(detail);
        } catch (const std::exception& e) {
            detail = fmt("exception: %s", e.what());
            pass = false;
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0) {
            if (seconds >= c.budget_seconds) pass = false;
            detail += fmt("; %.2fs < %.0fs budget", seconds, c.budget_seconds);
        } else {
            detail += fmt("; %.2fs", seconds);
        }
        std::printf("[%s] %02d %s: %s\n", pass ? "PASS" : "FAIL", id, c.name, detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
