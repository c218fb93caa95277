#include "circleresp/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "circleresp/errors.hpp"
#include "circleresp/rng.hpp"

namespace circleresp {

namespace {

// Seed for the fixed diagnostic test set; arbitrary but pinned so mixing
// rates and LY fits are reproducible run to run.
constexpr std::uint64_t kTestSetSeed = 0x1CEB00DA5EEDull;
constexpr int kTestSetSize = 32;

double weak_norm_of(const SpectralFunction& f, NormPairKind pair) {
    return pair == NormPairKind::w11_over_w21 ? norm_wk1(f, 1) : norm_ck(f, 0);
}

double strong_norm_of(const SpectralFunction& f, NormPairKind pair) {
    return pair == NormPairKind::w11_over_w21 ? norm_wk1(f, 2) : norm_ck(f, 1);
}

}  // namespace

SlopeFit taylor_slope(const std::vector<std::pair<double, double>>& delta_norm_pairs,
                      double floor) {
    SlopeFit fit;
    std::vector<double> xs, ys;
    int index = 0;
    for (const auto& [delta, value] : delta_norm_pairs) {
        if (!(delta > 0.0))
            throw std::invalid_argument("taylor_slope needs positive deltas");
        if (value <= floor) {
            fit.excluded.push_back(index);
        } else {
            xs.push_back(std::log(delta));
            ys.push_back(std::log(value));
        }
        ++index;
    }
    if (xs.size() < 2) {
        fit.floored = true;
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        fit.intercept = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    for (std::size_t i = 0; i < xs.size(); ++i)
        fit.max_log_residual =
            std::max(fit.max_log_residual, std::abs(ys[i] - fit.slope * xs[i] - fit.intercept));
    return fit;
}

SpectralFunction random_mean_zero_function(std::uint64_t seed, std::uint64_t index,
                                           int truncation_order) {
    const CounterRng rng(seed, index);
    std::vector<std::complex<double>> coeffs(2 * static_cast<std::size_t>(truncation_order) + 1);
    for (int k = 1; k <= truncation_order; ++k) {
        const double re = (rng.uniform(2 * static_cast<std::uint64_t>(k)) - 0.5);
        const double im = (rng.uniform(2 * static_cast<std::uint64_t>(k) + 1) - 0.5);
        const std::complex<double> c = std::complex<double>(re, im) / static_cast<double>(k * k);
        coeffs[static_cast<std::size_t>(truncation_order + k)] = c;
        coeffs[static_cast<std::size_t>(truncation_order - k)] = std::conj(c);
    }
    return SpectralFunction::from_coefficients(std::move(coeffs));
}

MixingEstimate mixing_rate(const OperatorMatrix& op, int n_max, NormPairKind pair) {
    if (n_max < 1) throw std::invalid_argument("mixing_rate needs n_max >= 1");
    MixingEstimate estimate;
    estimate.test_set_size = kTestSetSize;
    estimate.weak_norm = pair == NormPairKind::w11_over_w21 ? "W11" : "C0";
    estimate.strong_norm = pair == NormPairKind::w11_over_w21 ? "W21" : "C1";
    estimate.rates.assign(static_cast<std::size_t>(n_max), 0.0);
    for (int g = 0; g < kTestSetSize; ++g) {
        SpectralFunction f = random_mean_zero_function(kTestSetSeed, static_cast<std::uint64_t>(g),
                                                       op.truncation_order());
        const double strong = strong_norm_of(f, pair);
        for (int n = 1; n <= n_max; ++n) {
            f = apply(op, f);
            const double ratio = weak_norm_of(f, pair) / strong;
            auto& slot = estimate.rates[static_cast<std::size_t>(n - 1)];
            slot = std::max(slot, ratio);
        }
    }
    return estimate;
}

double kernel_lower_bound(const MapFamily& family, double /*delta*/) {
    if (!family.noise)
        throw std::invalid_argument(
            "kernel_lower_bound is only defined for noisy families (no kernel present)");
    // The transition density rho~(T_delta(x) - y) is minimized, over all x
    // and y, no further than the global minimum of rho~, attained mid-period;
    // scan a grid and include z = 1/2 explicitly.
    constexpr int kGrid = 512;
    double lower = family.noise->periodized_value(0.5);
    for (int j = 0; j < kGrid; ++j)
        lower = std::min(lower, family.noise->periodized_value(static_cast<double>(j) / kGrid));
    return lower;
}

LYEstimate lasota_yorke_constants(const MapFamily& family, double delta, int k, int n_max,
                                  int truncation_order, int quadrature_size) {
    if (k < 1) throw std::invalid_argument("lasota_yorke_constants needs k >= 1");
    if (family.noise)
        throw std::invalid_argument("Lasota-Yorke constants here target the deterministic "
                                    "expanding regime; the noisy regime has its own envelope");
    const double alpha = check_expansion(family, delta);  // throws if not expanding
    LYEstimate estimate;
    estimate.k = k;
    estimate.n_max = n_max;
    estimate.alpha_k = std::pow(alpha, k);

    const OperatorMatrix op =
        build_deterministic(family, delta, truncation_order, quadrature_size);
    double b = 0.0;
    for (int g = -1; g < kTestSetSize; ++g) {
        // g = -1 is the constant density; the rest are the random test set.
        SpectralFunction f = (g < 0) ? SpectralFunction::constant(1.0, truncation_order)
                                     : random_mean_zero_function(
                                           kTestSetSeed, static_cast<std::uint64_t>(g),
                                           truncation_order);
        const double strong0 = norm_wk1(f, k);
        const double weak0 = (k == 1) ? norm_l1(f) : norm_wk1(f, k - 1);
        double decay = estimate.alpha_k;
        for (int n = 1; n <= n_max; ++n) {
            f = apply(op, f);
            const double lhs = norm_wk1(f, k);
            b = std::max(b, (lhs - decay * strong0) / weak0);
            decay *= estimate.alpha_k;
        }
    }
    estimate.b_k = std::max(b, 0.0);
    return estimate;
}

}  // namespace circleresp
