#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "circleresp/maps.hpp"
#include "circleresp/spectral.hpp"

namespace circleresp {

// Row-stochastic Ulam (bin-transition) matrix: entries(i,j) is the fraction
// of bin i that T_delta (plus noise) sends into bin j. Stored dense row-major;
// 4096 x 4096 doubles is 134 MB well spent on an oracle that shares no code
// with the spectral pipeline.
class UlamMatrix {
  public:
    UlamMatrix(int n_bins, std::vector<double> entries);

    int n_bins() const { return n_bins_; }
    double entry(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_bins_) +
                        static_cast<std::size_t>(j)];
    }
    const std::vector<double>& entries() const { return entries_; }
    // max_i |row_i sum - 1|.
    double row_sum_defect() const;

  private:
    int n_bins_ = 0;
    std::vector<double> entries_;
};

// Deterministic families: each bin is resolved by 64 midpoint sub-samples of
// the indicator pushforward. Noisy families: exact Gaussian bin masses (erf
// differences over the wrap window, arguments beyond 8 sigma clamped) at 4
// sub-samples per bin — the integrand is smooth there, so far fewer samples
// suffice than for the discontinuous deterministic indicator.
UlamMatrix ulam_matrix(const MapFamily& family, double delta, int n_bins);

// Stationary density of the Ulam chain by left power iteration from the
// uniform vector, to L1 residual 1e-12 (at most 1e5 sweeps; throws
// SolverError on non-convergence). Returned as density values per bin
// (masses * n_bins), integrating to 1.
std::vector<double> ulam_stationary(const UlamMatrix& matrix);

// Long-run histogram of the simulated system X_{n+1} = T_delta(X_n) + noise.
struct TrajectoryEstimate {
    std::vector<double> histogram;  // 512 bin masses, sums to 1
    long long n_steps = 0;
    long long burn_in = 0;
    std::uint64_t seed = 0;
    // 1/sqrt(n_eff) with n_eff = n_steps / tau; the integrated
    // autocorrelation time tau = (1+rho1)/(1-rho1) comes from the lag-1
    // autocorrelation of cos(2 pi X_n) along the trajectory.
    double stderr_proxy = 0.0;
};

inline constexpr int kTrajectoryBins = 512;

TrajectoryEstimate monte_carlo_stationary(const MapFamily& family, double delta,
                                          long long n_steps, long long burn_in,
                                          std::uint64_t seed);

// Centered finite differences of a density solver delta -> h_delta, the
// independent route against which the spectral response formulas are judged.
struct FiniteDifferenceResponse {
    // Richardson-extrapolated centered first difference (the two smallest
    // deltas, error O(delta^4) on smooth families).
    SpectralFunction h_dot_fd;
    // Same treatment of the centered second difference; estimates the plain
    // second derivative d^2 h / ddelta^2 (i.e. 2 * the delta^2 Taylor
    // coefficient).
    SpectralFunction qr_fd;
    // Log-log regression exponents of the first/second-order Taylor
    // remainders formed with the FD estimates themselves.
    double first_order_slope = 0.0;
    double second_order_slope = 0.0;
    bool slopes_floored = false;  // remainders at the round-off floor
    std::vector<std::string> warnings;
};

FiniteDifferenceResponse finite_difference_response(
    const std::function<SpectralFunction(double)>& solve_at, const std::vector<double>& deltas,
    const std::function<double(const SpectralFunction&)>& weak_norm);

}  // namespace circleresp
