#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "circleresp/errors.hpp"
#include "circleresp/maps.hpp"

using namespace circleresp;

namespace {

TrigPoly sin_profile(double amp = 1.0) {
    TrigPoly p;
    p.terms.push_back({1, 0.0, amp});
    return p;
}

MapFamily doubling_family(double delta_max = 0.05) {
    return MapFamily{doubling_map(), DiffeoFamily{sin_profile(), TrigPoly{}, delta_max}, {}};
}

}  // namespace

TEST_CASE("TrigPoly derivatives match centered differences") {
    TrigPoly p;
    p.constant = 0.4;
    p.terms.push_back({1, 0.3, -0.2});
    p.terms.push_back({3, -0.1, 0.05});
    const double h = 1e-5;
    for (double x : {0.0, 0.21, 0.68}) {
        for (int order = 1; order <= 3; ++order) {
            const double fd = (p.derivative(x + h, order - 1) - p.derivative(x - h, order - 1)) /
                              (2 * h);
            CHECK(p.derivative(x, order) ==
                  doctest::Approx(fd).epsilon(1e-7).scale(std::abs(fd) + 1.0));
        }
    }
    CHECK(p.evaluate(0.21) == p.derivative(0.21, 0));
    CHECK_THROWS_AS(p.derivative(0.0, 5), std::invalid_argument);
    CHECK(p.max_mode() == 3);
    CHECK_FALSE(p.is_zero());
    CHECK(TrigPoly{}.is_zero());
}

TEST_CASE("TrigPoly embeds into SpectralFunction faithfully") {
    TrigPoly p;
    p.constant = 1.2;
    p.terms.push_back({2, 0.5, -0.3});
    const SpectralFunction f = p.to_spectral(8);
    for (double x : {0.1, 0.45, 0.9})
        CHECK(f.evaluate(x) == doctest::Approx(p.evaluate(x)).epsilon(1e-13));
    CHECK(f.mean() == doctest::Approx(1.2));
}

TEST_CASE("shipped map factories have the advertised lifts and derivatives") {
    const ExpandingMap dbl = doubling_map();
    CHECK(dbl.degree == 2);
    CHECK(dbl.lift(0.3) == doctest::Approx(0.6));
    CHECK(dbl.lift(1.3) == doctest::Approx(dbl.lift(0.3) + 2.0));  // degree-2 lift
    CHECK(dbl.d1(0.7) == doctest::Approx(2.0));
    CHECK(dbl.d2(0.7) == doctest::Approx(0.0));

    const ExpandingMap arn = arnold_map(0.3, 0.8);
    CHECK(arn.degree == 1);
    const double x = 0.2;
    CHECK(arn.lift(x) == doctest::Approx(x + 0.3 + 0.8 * std::sin(kTwoPi * x)).epsilon(1e-15));
    CHECK(arn.d1(x) == doctest::Approx(1.0 + 0.8 * kTwoPi * std::cos(kTwoPi * x)).epsilon(1e-14));
    CHECK(arn.lift(x + 1.0) == doctest::Approx(arn.lift(x) + 1.0).epsilon(1e-14));
}

TEST_CASE("diffeo admissibility: accepted within range, rejected beyond") {
    // D_delta(y) = y + delta sin(2 pi y): D' = 1 + 2 pi delta cos, which stays
    // positive iff |delta| < 1/(2 pi) ~ 0.159.
    CHECK_NOTHROW(validate_diffeo(DiffeoFamily{sin_profile(), TrigPoly{}, 0.05}));
    CHECK_THROWS_AS(validate_diffeo(DiffeoFamily{sin_profile(), TrigPoly{}, 0.2}),
                    AdmissibilityError);
    CHECK_THROWS_AS(validate_diffeo(DiffeoFamily{sin_profile(), TrigPoly{}, 0.0}),
                    AdmissibilityError);
    // The S2 vertex case: S1 = 0, S2 = -c sin profile makes D' dip at the
    // interior vertex only; the exact per-point minimum must catch it.
    TrigPoly s2 = sin_profile(-70.0);
    CHECK_THROWS_AS(validate_diffeo(DiffeoFamily{TrigPoly{}, s2, 0.1}), AdmissibilityError);
    CHECK_NOTHROW(validate_diffeo(DiffeoFamily{TrigPoly{}, sin_profile(-1.0), 0.1}));
}

TEST_CASE("perturbed map evaluates, wraps, and respects the delta range") {
    const MapFamily family = doubling_family();
    const double delta = 0.03;
    for (double x : {0.1, 0.5, 0.77, 0.99}) {
        const double y = evaluate_perturbed(family, delta, x);
        CHECK(y >= 0.0);
        CHECK(y < 1.0);
        const double lift = perturbed_lift(family, delta, x);
        CHECK(y == doctest::Approx(lift - std::floor(lift)).epsilon(1e-15));
    }
    // T(1/2) = 1 exactly: the wrap must land on 0, not 1.
    CHECK(evaluate_perturbed(family, 0.0, 0.5) == 0.0);
    CHECK_THROWS_AS(evaluate_perturbed(family, 0.2, 0.1), AdmissibilityError);
    CHECK_THROWS_AS(perturbed_derivative(family, -0.2, 0.1, 1), AdmissibilityError);
}

TEST_CASE("perturbed derivatives follow the chain rule") {
    MapFamily family{arnold_map(0.3, 0.8),
                     DiffeoFamily{sin_profile(0.7), sin_profile(-0.4), 0.04}, {}};
    const double delta = 0.025;
    const double h = 1e-5;
    for (double x : {0.08, 0.33, 0.6, 0.92}) {
        const double fd1 = (perturbed_lift(family, delta, x + h) -
                            perturbed_lift(family, delta, x - h)) / (2 * h);
        CHECK(perturbed_derivative(family, delta, x, 1) ==
              doctest::Approx(fd1).epsilon(1e-7).scale(std::abs(fd1) + 1.0));
        const double fd2 = (perturbed_derivative(family, delta, x + h, 1) -
                            perturbed_derivative(family, delta, x - h, 1)) / (2 * h);
        CHECK(perturbed_derivative(family, delta, x, 2) ==
              doctest::Approx(fd2).epsilon(1e-6).scale(std::abs(fd2) + 1.0));
        const double fd3 = (perturbed_derivative(family, delta, x + h, 2) -
                            perturbed_derivative(family, delta, x - h, 2)) / (2 * h);
        CHECK(perturbed_derivative(family, delta, x, 3) ==
              doctest::Approx(fd3).epsilon(1e-5).scale(std::abs(fd3) + 1.0));
    }
    CHECK_THROWS_AS(perturbed_derivative(family, delta, 0.1, 4), std::invalid_argument);
}

TEST_CASE("expansion check: doubling passes, Arnold refuses, custom measured") {
    CHECK(check_expansion(doubling_map()) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(check_expansion(arnold_map(0.3, 0.8)), ExpansionError);
    // Rigid rotations are not expanding either (|T'| = 1).
    CHECK_THROWS_AS(check_expansion(arnold_map(0.3, 0.0)), ExpansionError);
    // 2x + 0.1 sin(2 pi x): min T' = 2 - 0.2 pi, attained at x = 1/2 which the
    // 4096 grid contains exactly.
    const ExpandingMap custom = trig_lift_map(2, sin_profile(0.1), "custom");
    CHECK(check_expansion(custom) ==
          doctest::Approx(1.0 / (2.0 - 0.1 * kTwoPi)).epsilon(1e-12));
    // The perturbed composition stays expanding for small delta, with the
    // contraction factor bounded by the worst diffeo slope.
    MapFamily family{custom, DiffeoFamily{sin_profile(0.5), TrigPoly{}, 0.04}, {}};
    const double alpha = check_expansion(family, 0.04);
    CHECK(alpha < 1.0);
    const double diffeo_min = 1.0 - 0.04 * 0.5 * kTwoPi;  // min D' over the range
    CHECK(alpha <= 1.0 / ((2.0 - 0.1 * kTwoPi) * diffeo_min) + 1e-12);
    CHECK(check_expansion(family, 0.0) == doctest::Approx(check_expansion(custom)).epsilon(1e-14));
}
