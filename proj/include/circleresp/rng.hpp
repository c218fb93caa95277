#pragma once

#include <cmath>
#include <cstdint>

namespace circleresp {

// Counter-based random stream: uniform(i) is a pure function of (seed,
// stream, i), so trajectories are reproducible bit-for-bit given the seed and
// independent of call order. The generator is SplitMix64 evaluated at an
// arbitrary counter (state_i = key + i * GOLDEN, output = finalizer(state_i));
// the finalizer is the standard Stafford mix13 used by SplitMix64.
//
// Standard-library distribution objects are deliberately not used: the C++
// standard does not pin down std::normal_distribution's algorithm, so streams
// would differ between libstdc++/libc++. Gaussians here come from the
// documented Acklam inverse-normal rational approximation (relative error
// ~1.15e-9, far below any Monte Carlo statistical error in this artifact).
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(finalize(seed + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

    // Uniform on (0,1): 53-bit mantissa, offset so 0 is never returned.
    double uniform(std::uint64_t counter) const {
        const std::uint64_t bits = finalize(key_ + counter * 0x9E3779B97F4A7C15ull);
        return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Standard normal via the Acklam inverse-CDF approximation.
    double gaussian(std::uint64_t counter) const { return inverse_normal_cdf(uniform(counter)); }

    // Phi^{-1}(p) for p in (0,1). Coefficients are P. J. Acklam's published
    // rational minimax fit (central region plus two tail branches).
    static double inverse_normal_cdf(double p) {
        static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                        -2.759285104469687e+02, 1.383577518672690e+02,
                                        -3.066479806614716e+01, 2.506628277459239e+00};
        static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                        -1.556989798598866e+02, 6.680131188771972e+01,
                                        -1.328068155288572e+01};
        static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                        -2.400758277161838e+00, -2.549732539343734e+00,
                                        4.374664141464968e+00,  2.938163982698783e+00};
        static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                        2.445134137142996e+00, 3.754408661907416e+00};
        constexpr double p_low = 0.02425;
        if (p < p_low) {
            const double q = std::sqrt(-2.0 * std::log(p));
            return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        if (p > 1.0 - p_low) {
            const double q = std::sqrt(-2.0 * std::log(1.0 - p));
            return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

  private:
    static std::uint64_t finalize(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
};

}  // namespace circleresp
