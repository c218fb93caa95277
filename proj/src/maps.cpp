#include "circleresp/maps.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "circleresp/errors.hpp"

namespace circleresp {

namespace {

constexpr int kCheckGrid = 4096;

double wrap_unit(double y) {
    double r = y - std::floor(y);
    if (r >= 1.0) r -= 1.0;  // guards the floor rounding edge at y slightly below an integer
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// TrigPoly

double TrigPoly::evaluate(double x) const { return derivative(x, 0); }

double TrigPoly::derivative(double x, int order) const {
    if (order < 0 || order > 4) throw std::invalid_argument("TrigPoly derivative order must be 0..4");
    double acc = (order == 0) ? constant : 0.0;
    for (const Term& t : terms) {
        const double w = kTwoPi * t.mode;
        const double arg = w * x;
        const double scale = std::pow(w, order);
        // d/dx rotates (cos, sin) -> (-sin, cos); apply the rotation `order` times.
        double ca = t.cos_amp, sa = t.sin_amp;
        switch (order % 4) {
            case 0: acc += scale * (ca * std::cos(arg) + sa * std::sin(arg)); break;
            case 1: acc += scale * (-ca * std::sin(arg) + sa * std::cos(arg)); break;
            case 2: acc += scale * (-ca * std::cos(arg) - sa * std::sin(arg)); break;
            case 3: acc += scale * (ca * std::sin(arg) - sa * std::cos(arg)); break;
        }
    }
    return acc;
}

bool TrigPoly::is_zero() const {
    if (constant != 0.0) return false;
    for (const Term& t : terms)
        if (t.cos_amp != 0.0 || t.sin_amp != 0.0) return false;
    return true;
}

int TrigPoly::max_mode() const {
    int m = 0;
    for (const Term& t : terms) m = std::max(m, t.mode);
    return m;
}

SpectralFunction TrigPoly::to_spectral(int truncation_order) const {
    SpectralFunction f = SpectralFunction::constant(constant, truncation_order);
    for (const Term& t : terms)
        f = f + SpectralFunction::harmonic(t.mode, t.cos_amp, t.sin_amp, truncation_order);
    return f;
}

// ---------------------------------------------------------------------------
// Map factories

ExpandingMap trig_lift_map(int degree, TrigPoly p, std::string name) {
    ExpandingMap map;
    map.name = std::move(name);
    map.degree = degree;
    map.lift = [degree, p](double x) { return degree * x + p.evaluate(x); };
    map.d1 = [degree, p](double x) { return degree + p.derivative(x, 1); };
    map.d2 = [p](double x) { return p.derivative(x, 2); };
    map.d3 = [p](double x) { return p.derivative(x, 3); };
    return map;
}

ExpandingMap doubling_map() { return trig_lift_map(2, TrigPoly{}, "doubling"); }

ExpandingMap arnold_map(double a, double epsilon) {
    TrigPoly p;
    p.constant = a;
    p.terms.push_back({1, 0.0, epsilon});
    return trig_lift_map(1, std::move(p), "arnold");
}

// ---------------------------------------------------------------------------
// Diffeomorphism family

double diffeo_value(const DiffeoFamily& family, double delta, double y) {
    return y + delta * family.s1.evaluate(y) + 0.5 * delta * delta * family.s2.evaluate(y);
}

double diffeo_derivative(const DiffeoFamily& family, double delta, double y, int order) {
    const double id_part = (order == 1) ? 1.0 : 0.0;
    return id_part + delta * family.s1.derivative(y, order) +
           0.5 * delta * delta * family.s2.derivative(y, order);
}

void validate_diffeo(const DiffeoFamily& family) {
    if (!(family.delta_max > 0.0))
        throw AdmissibilityError("perturbation family needs delta_max > 0");
    // D_delta'(y) = 1 + delta*S1'(y) + (delta^2/2)*S2'(y) is quadratic in
    // delta; per grid point take its exact minimum over [-delta_max, delta_max]
    // (endpoints plus the interior vertex when the parabola opens upward...
    // both orientations handled by checking the vertex whenever it is inside).
    double worst = std::numeric_limits<double>::infinity();
    double worst_y = 0.0;
    for (int j = 0; j < kCheckGrid; ++j) {
        const double y = static_cast<double>(j) / kCheckGrid;
        const double a = family.s1.derivative(y, 1);
        const double b = 0.5 * family.s2.derivative(y, 1);
        auto value = [&](double d) { return 1.0 + d * a + d * d * b; };
        double m = std::min(value(family.delta_max), value(-family.delta_max));
        if (b != 0.0) {
            const double vertex = -a / (2.0 * b);
            if (std::abs(vertex) < family.delta_max) m = std::min(m, value(vertex));
        }
        if (m < worst) {
            worst = m;
            worst_y = y;
        }
    }
    if (!(worst > 0.0))
        throw AdmissibilityError("D_delta fails to be a diffeomorphism on |delta| <= " +
                                 std::to_string(family.delta_max) + ": min D' = " +
                                 std::to_string(worst) + " near y = " + std::to_string(worst_y));
}

// ---------------------------------------------------------------------------
// Composed map T_delta = D_delta o T

namespace {

void require_admissible(const MapFamily& family, double delta) {
    if (std::abs(delta) > family.perturbation.delta_max + 1e-15)
        throw AdmissibilityError("delta = " + std::to_string(delta) +
                                 " outside admissible range |delta| <= " +
                                 std::to_string(family.perturbation.delta_max));
}

}  // namespace

double perturbed_lift(const MapFamily& family, double delta, double x) {
    require_admissible(family, delta);
    return diffeo_value(family.perturbation, delta, family.base.lift(x));
}

double evaluate_perturbed(const MapFamily& family, double delta, double x) {
    return wrap_unit(perturbed_lift(family, delta, x));
}

double perturbed_derivative(const MapFamily& family, double delta, double x, int order) {
    require_admissible(family, delta);
    const double y = family.base.lift(x);
    const double t1 = family.base.d1(x);
    const double dp1 = diffeo_derivative(family.perturbation, delta, y, 1);
    if (order == 1) return dp1 * t1;
    const double t2 = family.base.d2(x);
    const double dp2 = diffeo_derivative(family.perturbation, delta, y, 2);
    if (order == 2) return dp2 * t1 * t1 + dp1 * t2;
    const double t3 = family.base.d3(x);
    const double dp3 = diffeo_derivative(family.perturbation, delta, y, 3);
    if (order == 3) return dp3 * t1 * t1 * t1 + 3.0 * dp2 * t1 * t2 + dp1 * t3;
    throw std::invalid_argument("perturbed_derivative supports orders 1..3");
}

// ---------------------------------------------------------------------------
// Expansion check

namespace {

double expansion_from_min_slope(double min_abs, const std::string& name) {
    if (!(min_abs > 1.0))
        throw ExpansionError("map '" + name + "' is not uniformly expanding: min |T'| = " +
                             std::to_string(min_abs) +
                             " (deterministic response scenarios refuse to run; noisy scenarios "
                             "do not need expansion)");
    return 1.0 / min_abs;
}

}  // namespace

double check_expansion(const ExpandingMap& map) {
    double min_abs = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kCheckGrid; ++j)
        min_abs = std::min(min_abs, std::abs(map.d1(static_cast<double>(j) / kCheckGrid)));
    return expansion_from_min_slope(min_abs, map.name);
}

double check_expansion(const MapFamily& family, double delta) {
    double min_abs = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kCheckGrid; ++j)
        min_abs = std::min(min_abs,
                           std::abs(perturbed_derivative(family, delta, static_cast<double>(j) / kCheckGrid, 1)));
    return expansion_from_min_slope(min_abs, family.base.name + " (perturbed)");
}

}  // namespace circleresp
