#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "circleresp/errors.hpp"
#include "circleresp/scenario.hpp"

using namespace circleresp;

namespace {

Scenario parse(const std::string& text) { return parse_scenario_text(text, "inline.cfg"); }

// Asserts that parsing/validation fails with a ConfigError mentioning `needle`.
void expect_config_error(const std::string& text, const std::string& needle) {
    try {
        validate_scenario(parse(text));
        FAIL_CHECK("expected ConfigError containing '" << needle << "'");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "message '" << what << "' lacks '" << needle << "'");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kDoublingText = R"(name = doubling-smoke
[map]
kind = doubling
[perturbation]
s1 = sin(1)
s2 = 0
delta_max = 0.05
[numerics]
truncation_order = 16
delta_grid = 1e-2, 5e-3, 2.5e-3, 1.25e-3
[output]
directory = out/smoke
)";

}  // namespace

TEST_CASE("a config exercising every key parses into the right scenario") {
    const std::string text = R"(# full demo
name = full-demo

[map]
kind = custom-coeffs
degree = 2
lift = 0.05*sin(1), -0.02*cos(3)

[perturbation]
s1 = 0.5*sin(2)        # inline comment
s2 = -cos(1), 0.25
delta_max = 0.04

[noise]
xi = 0.12

[numerics]
truncation_order = 24
quadrature_size = 128
delta_grid = 8e-3, 4e-3
weak_norm = C0
markov_tol = 1e-9
ulam_bins = 1024
mc_steps = 5000
mc_burn_in = 100
seed = 99
threads = 2

[output]
directory = out/demo
)";
    const Scenario sc = parse(text);
    CHECK(sc.name == "full-demo");
    CHECK(sc.map_kind == "custom-coeffs");
    CHECK(sc.custom_degree == 2);
    REQUIRE(sc.custom_lift.terms.size() == 2);
    CHECK(sc.custom_lift.terms[0].mode == 1);
    CHECK(sc.custom_lift.terms[0].sin_amp == 0.05);
    CHECK(sc.custom_lift.terms[1].mode == 3);
    CHECK(sc.custom_lift.terms[1].cos_amp == -0.02);
    REQUIRE(sc.s1.terms.size() == 1);
    CHECK(sc.s1.terms[0].mode == 2);
    CHECK(sc.s1.terms[0].sin_amp == 0.5);
    REQUIRE(sc.s2.terms.size() == 1);
    CHECK(sc.s2.terms[0].cos_amp == -1.0);
    CHECK(sc.s2.constant == 0.25);
    CHECK(sc.delta_max == 0.04);
    REQUIRE(sc.xi.has_value());
    CHECK(*sc.xi == 0.12);
    CHECK(sc.noisy());
    CHECK(sc.truncation_order == 24);
    CHECK(sc.quadrature_size == 128);
    CHECK(sc.effective_quadrature() == 128);
    CHECK(sc.delta_grid == std::vector<double>{8e-3, 4e-3});
    CHECK(sc.weak_norm == "C0");
    CHECK(sc.markov_tol == 1e-9);
    CHECK(sc.ulam_bins == 1024);
    CHECK(sc.effective_ulam_bins() == 1024);
    CHECK(sc.mc_steps == 5000);
    CHECK(sc.mc_burn_in == 100);
    CHECK(sc.seed == 99);
    CHECK(sc.threads == 2);
    CHECK(sc.out_dir == "out/demo");
    CHECK_NOTHROW(validate_scenario(sc));
    // Defaults that the text never set.
    const Scenario defaults = parse(kDoublingText);
    CHECK(!defaults.noisy());
    CHECK(defaults.effective_quadrature() == 8 * 16);
    CHECK(defaults.effective_ulam_bins() == 1024);  // deterministic default
    CHECK(defaults.seed == 12345);
    CHECK(defaults.threads == 1);
}

TEST_CASE("parse errors carry origin:line context") {
    const auto what_of = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("NO THROW");
    };
    CHECK(what_of("foo = 1\n").find("inline.cfg:1") != std::string::npos);
    CHECK(what_of("foo = 1\n").find("outside any section") != std::string::npos);
    CHECK(what_of("[map]\nbogus = 2\n").find("inline.cfg:2") != std::string::npos);
    CHECK(what_of("[map]\nbogus = 2\n").find("[map]") != std::string::npos);
    CHECK(what_of("[nosuch]\nx = 1\n").find("unknown section") != std::string::npos);
    CHECK(what_of("[map\n").find("malformed section header") != std::string::npos);
    CHECK(what_of("just words\n").find("expected 'key = value'") != std::string::npos);
    CHECK(what_of("= 5\n").find("empty key or value") != std::string::npos);
    CHECK(what_of("[perturbation]\ndelta_max = abc\n").find("cannot parse number") !=
          std::string::npos);
    CHECK(what_of("[numerics]\nthreads = 1.5\n").find("cannot parse integer") !=
          std::string::npos);
}

TEST_CASE("trig-poly grammar accepts the documented forms and rejects the rest") {
    const std::string ctx = "test";
    CHECK(parse_trig_poly("0", ctx).is_zero());
    CHECK(parse_trig_poly("", ctx).is_zero());
    CHECK(parse_trig_poly("1", ctx).constant == 1.0);
    CHECK(parse_trig_poly("-0.5", ctx).constant == -0.5);

    const TrigPoly bare = parse_trig_poly("sin(1)", ctx);
    REQUIRE(bare.terms.size() == 1);
    CHECK(bare.terms[0].mode == 1);
    CHECK(bare.terms[0].sin_amp == 1.0);
    CHECK(bare.terms[0].cos_amp == 0.0);

    const TrigPoly scaled = parse_trig_poly("2*cos(3)", ctx);
    CHECK(scaled.terms[0].mode == 3);
    CHECK(scaled.terms[0].cos_amp == 2.0);

    const TrigPoly negated = parse_trig_poly("-sin(2)", ctx);
    CHECK(negated.terms[0].sin_amp == -1.0);

    const TrigPoly mixed = parse_trig_poly("0.5*sin(2), -cos(1), 0.25", ctx);
    CHECK(mixed.terms.size() == 2);
    CHECK(mixed.constant == 0.25);
    CHECK(mixed.evaluate(0.0) == doctest::Approx(0.25 - 1.0));

    CHECK_THROWS_AS(parse_trig_poly("sin(0)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_trig_poly("sin(65)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_trig_poly("sin(2", ctx), ConfigError);
    CHECK_THROWS_AS(parse_trig_poly("sin(2)x", ctx), ConfigError);
    CHECK_THROWS_AS(parse_trig_poly("q*sin(2)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_trig_poly("sin(1),,cos(2)", ctx), ConfigError);
}

TEST_CASE("semantic validation rejects out-of-regime scenarios") {
    // A deterministic Arnold map is not expanding: refused up front.
    expect_config_error(
        "name = x\n[map]\nkind = arnold\na = 0.3\nepsilon = 0.8\n"
        "[perturbation]\ns1 = 1\n[numerics]\ntruncation_order = 16\n",
        "deterministic scenario refused");
    expect_config_error("[map]\nkind = rotation\n[perturbation]\ns1 = 1\n", "map kind");
    expect_config_error(
        "[map]\nkind = doubling\n[perturbation]\ns1 = sin(1)\ndelta_max = 0.01\n"
        "[numerics]\ndelta_grid = 2e-2, 1e-2\n",
        "delta_grid entries must lie in (0, delta_max]");
    expect_config_error(
        "[map]\nkind = doubling\n[perturbation]\ns1 = sin(1)\n[numerics]\nulam_bins = 1000\n",
        "multiple of 512");
    expect_config_error(
        "[map]\nkind = doubling\n[perturbation]\ns1 = sin(1)\n[numerics]\ntruncation_order = 2\n",
        "truncation_order");
    expect_config_error("[map]\nkind = doubling\n[perturbation]\ns1 = 0\ns2 = 0\n",
                        "identically zero");
    expect_config_error("[map]\nkind = doubling\n[perturbation]\ns1 = sin(1)\n[noise]\nxi = -0.1\n",
                        "xi must be positive");
    expect_config_error(
        "[map]\nkind = doubling\n[perturbation]\ns1 = sin(1)\n[numerics]\nthreads = 0\n",
        "threads");
    expect_config_error(
        "[map]\nkind = doubling\n[perturbation]\ns1 = sin(1)\n"
        "[numerics]\nquadrature_size = 32\n",
        "quadrature_size");
    // A huge S1 breaks the diffeomorphism property within |delta| <= delta_max.
    expect_config_error("[map]\nkind = doubling\n[perturbation]\ns1 = 70*sin(1)\n",
                        "inadmissible");
}

TEST_CASE("spectral bin masses integrate the density exactly") {
    const int n = 8;
    // f = 1 + cos(2 pi x): mass over [a,b) is (b-a) + (sin(2 pi b) - sin(2 pi a))/(2 pi).
    const SpectralFunction f =
        SpectralFunction::constant(1.0, n) + SpectralFunction::harmonic(1, 1.0, 0.0, n);
    const std::vector<double> masses = spectral_bin_masses(f, 4);
    REQUIRE(masses.size() == 4);
    CHECK(masses[0] == doctest::Approx(0.25 + 1.0 / kTwoPi).epsilon(1e-14));
    CHECK(masses[1] == doctest::Approx(0.25 - 1.0 / kTwoPi).epsilon(1e-14));
    CHECK(masses[2] == doctest::Approx(0.25 - 1.0 / kTwoPi).epsilon(1e-14));
    CHECK(masses[3] == doctest::Approx(0.25 + 1.0 / kTwoPi).epsilon(1e-14));
    double total = 0.0;
    for (double m : masses) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    // Numerical cross-check on finer bins against direct quadrature.
    const std::vector<double> fine = spectral_bin_masses(f, 16);
    double quad = 0.0;
    for (int s = 0; s < 4096; ++s) quad += f.evaluate((3.0 + (s + 0.5) / 4096.0) / 16.0);
    quad /= 4096.0 * 16.0;
    CHECK(fine[3] == doctest::Approx(quad).epsilon(1e-9));
    CHECK_THROWS_AS(spectral_bin_masses(f, 0), std::invalid_argument);
}

TEST_CASE("mass coarsening and L1 distances") {
    const std::vector<double> fine = {0.1, 0.2, 0.3, 0.4};
    const std::vector<double> coarse = coarsen_masses(fine, 2);
    CHECK(coarse == std::vector<double>{0.1 + 0.2, 0.3 + 0.4});
    CHECK_THROWS_AS(coarsen_masses(fine, 3), std::invalid_argument);
    CHECK(l1_mass_distance({0.5, 0.5}, {0.25, 0.75}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(l1_mass_distance({0.5}, {0.25, 0.75}), std::invalid_argument);
}

TEST_CASE("--param overrides reassign and re-validate") {
    Scenario sc = parse(kDoublingText);
    apply_override(sc, "delta_grid = 4e-3, 2e-3");
    CHECK(sc.delta_grid == std::vector<double>{4e-3, 2e-3});
    apply_override(sc, "seed = 777");
    CHECK(sc.seed == 777);
    apply_override(sc, "xi = 0.2");  // turns the scenario noisy
    REQUIRE(sc.xi.has_value());
    CHECK(*sc.xi == 0.2);
    CHECK(sc.noisy());
    CHECK_THROWS_AS(apply_override(sc, "map_kind = arnold"), ConfigError);
    CHECK_THROWS_AS(apply_override(sc, "nonsense"), ConfigError);
    // Overrides that break validation are rejected on the spot.
    CHECK_THROWS_AS(apply_override(sc, "truncation_order = 2"), ConfigError);
    CHECK_THROWS_AS(apply_override(sc, "delta_grid = 0.2"), ConfigError);
}

TEST_CASE("format_g17 round-trips doubles exactly") {
    for (double v : {1.0, -0.1, kTwoPi / 2.0, 2.973439e-5, 1.2345678901234567e-13}) {
        const std::string s = format_g17(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_g17(0.5) == "0.5");
}

TEST_CASE("sweep runs end to end and its artifacts are deterministic") {
    const auto base = std::filesystem::temp_directory_path() / "circleresp_sweep_test";
    std::filesystem::remove_all(base);
    Scenario sc = parse(kDoublingText);

    sc.out_dir = (base / "a").string();
    const ScenarioReport first = run_sweep(sc, true);
    sc.out_dir = (base / "b").string();
    const ScenarioReport second = run_sweep(sc, true);

    CHECK(first.all_passed());
    REQUIRE(first.sweep_deltas.size() == 4);
    REQUIRE(first.first_order_remainders.size() == 4);
    for (double r : first.first_order_remainders) CHECK(r > 0.0);
    CHECK(first.first_order_slope > 1.9);
    CHECK(first.first_order_slope < 2.1);
    CHECK(first.second_order_slope > 2.7);

    CHECK(read_file(base / "a" / "remainders.csv") == read_file(base / "b" / "remainders.csv"));
    CHECK(read_file(base / "a" / "report.txt") == read_file(base / "b" / "report.txt"));
    const std::string report = read_file(base / "a" / "report.txt");
    CHECK(report.find("scenario: doubling-smoke") != std::string::npos);
    CHECK(report.find("RESULT: PASS") != std::string::npos);
    CHECK(report.find("FAIL") == std::string::npos);
    CHECK(second.all_passed());
    std::filesystem::remove_all(base);
}
