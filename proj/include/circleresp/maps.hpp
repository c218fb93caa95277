#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "circleresp/spectral.hpp"

namespace circleresp {

// Short real trig polynomial c0 + sum_k (a_k cos(2 pi k x) + b_k sin(2 pi k x));
// the representation used for perturbation profiles S1, S2 and for the
// periodic part of map lifts. Derivatives are analytic.
struct TrigPoly {
    struct Term {
        int mode = 0;          // k >= 1
        double cos_amp = 0.0;  // a_k
        double sin_amp = 0.0;  // b_k
    };

    double constant = 0.0;
    std::vector<Term> terms;

    double evaluate(double x) const;
    // d^order/dx^order, order = 0..4.
    double derivative(double x, int order) const;
    bool is_zero() const;
    int max_mode() const;
    // Embeds into a SpectralFunction of the given truncation order.
    SpectralFunction to_spectral(int truncation_order) const;
};

// A smooth circle map given through its lift: lift(x+1) = lift(x) + degree.
// Maps are supplied as closures plus analytic derivatives so arbitrary
// user maps plug in; the shipped factories build them from trig-poly lifts.
struct ExpandingMap {
    std::string name;
    int degree = 1;
    std::function<double(double)> lift;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    std::function<double(double)> d3;
};

// T(x) = 2x.
ExpandingMap doubling_map();
// T(x) = x + a + epsilon*sin(2 pi x) (the standard circle-map family).
ExpandingMap arnold_map(double a, double epsilon);
// lift(x) = degree*x + p(x) for a caller-supplied trig polynomial p.
ExpandingMap trig_lift_map(int degree, TrigPoly p, std::string name);

// Perturbing diffeomorphism family D_delta = Id + delta*S1 + (delta^2/2)*S2,
// admissible for |delta| <= delta_max (D_delta' > 0 on the whole range,
// validated on a 4096 grid with the exact per-point minimum over delta).
struct DiffeoFamily {
    TrigPoly s1;
    TrigPoly s2;
    double delta_max = 0.0;
};

// Throws AdmissibilityError if some D_delta, |delta| <= delta_max, fails to
// be an orientation-preserving diffeomorphism.
void validate_diffeo(const DiffeoFamily& family);

// A perturbed system: x -> D_delta(T(x)) (+ noise, when a kernel is set).
struct MapFamily {
    ExpandingMap base;
    DiffeoFamily perturbation;
    std::optional<NoiseKernel> noise;
};

// D_delta(y) and its y-derivatives.
double diffeo_value(const DiffeoFamily& family, double delta, double y);
double diffeo_derivative(const DiffeoFamily& family, double delta, double y, int order);

// Lift of the composed map T_delta = D_delta o T (not reduced mod 1).
double perturbed_lift(const MapFamily& family, double delta, double x);
// T_delta(x) mod 1. Throws AdmissibilityError when |delta| > delta_max.
double evaluate_perturbed(const MapFamily& family, double delta, double x);
// d^order/dx^order of the composed lift, order = 1..3 (chain rule).
double perturbed_derivative(const MapFamily& family, double delta, double x, int order);

// Contraction factor alpha = 1 / min_x |T'(x)| over a 4096 grid; throws
// ExpansionError if the map is not uniformly expanding (alpha >= 1).
double check_expansion(const ExpandingMap& map);
// Same for the composed map T_delta of the family.
double check_expansion(const MapFamily& family, double delta);

}  // namespace circleresp
