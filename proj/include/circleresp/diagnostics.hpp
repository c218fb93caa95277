#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "circleresp/maps.hpp"
#include "circleresp/spectral.hpp"
#include "circleresp/transfer.hpp"

namespace circleresp {

// Least-squares slope of log(norm) against log(delta). Points whose norm
// sits at or below `floor` are excluded (they carry only round-off) and
// listed; if fewer than two usable points remain the fit is flagged floored
// and the slope is NaN — "the remainder is already at the noise floor" is a
// result, not an error.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    // Largest |log residual| of the fit, a quick linearity check.
    double max_log_residual = 0.0;
    bool floored = false;
    std::vector<int> excluded;
};

SlopeFit taylor_slope(const std::vector<std::pair<double, double>>& delta_norm_pairs,
                      double floor = 1e-13);

// Which (strong, weak) norm pair a_n is measured in.
enum class NormPairKind {
    w11_over_w21,  // weak W^{1,1}, strong W^{2,1}: the deterministic setting
    c0_over_c1,    // weak C^0, strong C^1: the noisy setting
};

struct MixingEstimate {
    std::vector<double> rates;  // rates[n-1] = a_n = max_g ||L^n g||_weak / ||g||_strong
    std::string weak_norm;
    std::string strong_norm;
    int test_set_size = 0;
};

// Empirical mixing sequence over a fixed set of 32 pseudo-random mean-zero
// test functions (coefficients decaying like 1/k^2, pinned seed, so the
// numbers are reproducible).
MixingEstimate mixing_rate(const OperatorMatrix& op, int n_max, NormPairKind pair);

// Uniform lower bound l on the noise transition density: conservatively the
// global minimum of the periodized kernel (attained mid-period), measured on
// a 512 grid. Feeds the (1-l)^{n-1} mixing envelope. Throws
// std::invalid_argument when the family carries no kernel; a tiny l (xi -> 0)
// is returned as-is — callers decide whether the envelope is still useful.
double kernel_lower_bound(const MapFamily& family, double delta);

// Empirical Lasota-Yorke pair for the deterministic W^{k,1} inequality
//   ||L^n f||_{k,1} <= alpha_k^n ||f||_{k,1} + B_k ||f||_{k-1,1}:
// alpha_k = (1/min|T_delta'|)^k is analytic; B_k is fitted as the smallest
// constant making the inequality hold over the test set for all n <= n_max.
struct LYEstimate {
    int k = 1;
    double alpha_k = 0.0;
    double b_k = 0.0;
    int n_max = 0;
};

LYEstimate lasota_yorke_constants(const MapFamily& family, double delta, int k, int n_max,
                                  int truncation_order, int quadrature_size);

// The shared diagnostic test-function generator: mean-zero, conjugate
// symmetric, coefficients ~ Uniform box / k^2 from the counter RNG stream
// `index` of `seed`.
SpectralFunction random_mean_zero_function(std::uint64_t seed, std::uint64_t index,
                                           int truncation_order);

}  // namespace circleresp
