#include "circleresp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "circleresp/diagnostics.hpp"
#include "circleresp/errors.hpp"
#include "circleresp/rng.hpp"

namespace circleresp {

// ---------------------------------------------------------------------------
// UlamMatrix

UlamMatrix::UlamMatrix(int n_bins, std::vector<double> entries)
    : n_bins_(n_bins), entries_(std::move(entries)) {
    if (n_bins < 2) throw std::invalid_argument("Ulam matrix needs at least 2 bins");
    if (entries_.size() != static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_bins))
        throw std::invalid_argument("Ulam matrix entry count does not match n_bins^2");
}

double UlamMatrix::row_sum_defect() const {
    double worst = 0.0;
    for (int i = 0; i < n_bins_; ++i) {
        double s = 0.0;
        for (int j = 0; j < n_bins_; ++j) s += entry(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

namespace {

constexpr int kDeterministicSubSamples = 64;
constexpr int kNoisySubSamples = 4;

// Cumulative masses F_j = P(y + noise mod 1 <= j/n) for j = 0..n, computed
// once per sample point; bin masses are then the telescoping differences, so
// each row sums to F_n - F_0 = 1 up to clamp rounding.
void accumulate_noisy_row(const NoiseKernel& kernel, double y, int n_bins, double weight,
                          std::vector<double>& cdf_scratch, double* row) {
    const int wraps = kernel.wrap_cutoff();
    const double inv = 1.0 / (kernel.xi() * std::sqrt(2.0));
    for (int j = 0; j <= n_bins; ++j) {
        const double s = static_cast<double>(j) / n_bins - y;
        double acc = 0.0;
        for (int m = -wraps; m <= wraps; ++m) {
            const double t = (s + m) * inv;
            if (t > 8.0)
                acc += 1.0;
            else if (t >= -8.0)
                acc += 0.5 * (1.0 + std::erf(t));
        }
        cdf_scratch[static_cast<std::size_t>(j)] = acc;
    }
    for (int j = 0; j < n_bins; ++j)
        row[j] += weight * (cdf_scratch[static_cast<std::size_t>(j + 1)] -
                            cdf_scratch[static_cast<std::size_t>(j)]);
}

}  // namespace

UlamMatrix ulam_matrix(const MapFamily& family, double delta, int n_bins) {
    std::vector<double> entries(static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_bins),
                                0.0);
    const int sub = family.noise ? kNoisySubSamples : kDeterministicSubSamples;
    const double weight = 1.0 / sub;
    std::vector<double> cdf_scratch(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i < n_bins; ++i) {
        double* row = entries.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n_bins);
        for (int s = 0; s < sub; ++s) {
            const double x = (i + (s + 0.5) / sub) / n_bins;
            const double y = evaluate_perturbed(family, delta, x);
            if (family.noise) {
                accumulate_noisy_row(*family.noise, y, n_bins, weight, cdf_scratch, row);
            } else {
                int j = static_cast<int>(y * n_bins);
                if (j >= n_bins) j = n_bins - 1;  // y < 1 but y*n can round up
                row[j] += weight;
            }
        }
        // Kill residual rounding so the chain is exactly stochastic.
        double sum = 0.0;
        for (int j = 0; j < n_bins; ++j) sum += row[j];
        if (std::abs(sum - 1.0) > 1e-9)
            throw SolverError("Ulam row " + std::to_string(i) + " sums to " + std::to_string(sum));
        for (int j = 0; j < n_bins; ++j) row[j] /= sum;
    }
    return UlamMatrix(n_bins, std::move(entries));
}

std::vector<double> ulam_stationary(const UlamMatrix& matrix) {
    const int n = matrix.n_bins();
    std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> next(static_cast<std::size_t>(n));
    constexpr int kMaxSweeps = 100000;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double vi = v[static_cast<std::size_t>(i)];
            if (vi == 0.0) continue;
            const double* row = matrix.entries().data() +
                                static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
            for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(j)] += vi * row[j];
        }
        double residual = 0.0;
        for (int j = 0; j < n; ++j) residual += std::abs(next[static_cast<std::size_t>(j)] -
                                                         v[static_cast<std::size_t>(j)]);
        v.swap(next);
        if (residual < 1e-12) {
            // Normalize the total mass and convert to density values.
            double mass = 0.0;
            for (double m : v) mass += m;
            for (double& m : v) m *= n / mass;
            return v;
        }
    }
    throw SolverError("Ulam power iteration did not reach residual 1e-12 in 1e5 sweeps");
}

TrajectoryEstimate monte_carlo_stationary(const MapFamily& family, double delta,
                                          long long n_steps, long long burn_in,
                                          std::uint64_t seed) {
    if (n_steps < 2) throw std::invalid_argument("monte_carlo_stationary needs n_steps >= 2");
    TrajectoryEstimate estimate;
    estimate.n_steps = n_steps;
    estimate.burn_in = burn_in;
    estimate.seed = seed;
    estimate.histogram.assign(kTrajectoryBins, 0.0);

    const CounterRng init_rng(seed, 0);
    const CounterRng noise_rng(seed, 1);
    const double xi = family.noise ? family.noise->xi() : 0.0;

    double x = init_rng.uniform(0);
    // Single-pass accumulators for the lag-1 autocorrelation of cos(2 pi X).
    double sum_o = 0.0, sum_oo = 0.0, sum_lag = 0.0, prev_o = 0.0;
    long long counted = 0;
    for (long long step = 0; step < burn_in + n_steps; ++step) {
        double y = evaluate_perturbed(family, delta, x);
        if (family.noise) {
            y += xi * noise_rng.gaussian(static_cast<std::uint64_t>(step));
            y -= std::floor(y);
            if (y >= 1.0) y = 0.0;
        }
        x = y;
        if (step < burn_in) continue;
        int bin = static_cast<int>(x * kTrajectoryBins);
        if (bin >= kTrajectoryBins) bin = kTrajectoryBins - 1;
        estimate.histogram[static_cast<std::size_t>(bin)] += 1.0;
        const double o = std::cos(kTwoPi * x);
        if (counted > 0) sum_lag += o * prev_o;
        sum_o += o;
        sum_oo += o * o;
        prev_o = o;
        ++counted;
    }
    for (double& m : estimate.histogram) m /= static_cast<double>(counted);

    const double mean = sum_o / static_cast<double>(counted);
    const double var = sum_oo / static_cast<double>(counted) - mean * mean;
    double rho1 = 0.0;
    if (var > 1e-14 && counted > 1)
        rho1 = (sum_lag / static_cast<double>(counted - 1) - mean * mean) / var;
    rho1 = std::clamp(rho1, -0.999, 0.999);
    const double tau = std::clamp((1.0 + rho1) / (1.0 - rho1), 1.0, 1000.0);
    estimate.stderr_proxy = std::sqrt(tau / static_cast<double>(counted));
    return estimate;
}

FiniteDifferenceResponse finite_difference_response(
    const std::function<SpectralFunction(double)>& solve_at, const std::vector<double>& deltas,
    const std::function<double(const SpectralFunction&)>& weak_norm) {
    std::vector<double> ds = deltas;
    std::sort(ds.begin(), ds.end());
    if (ds.size() < 2 || !(ds.front() > 0.0))
        throw std::invalid_argument("finite_difference_response needs >= 2 positive deltas");

    FiniteDifferenceResponse out{SpectralFunction(0), SpectralFunction(0), 0.0, 0.0, false, {}};

    const SpectralFunction h0 = solve_at(0.0);
    // Solves at +-delta for every delta; reused by differences and remainders.
    std::vector<SpectralFunction> plus, minus;
    plus.reserve(ds.size());
    minus.reserve(ds.size());
    for (double d : ds) {
        plus.push_back(solve_at(d));
        minus.push_back(solve_at(-d));
    }

    auto centered1 = [&](std::size_t i) {
        return (0.5 / ds[i]) * (plus[i] - minus[i]);
    };
    auto centered2 = [&](std::size_t i) {
        return (1.0 / (ds[i] * ds[i])) * ((plus[i] - h0) - (h0 - minus[i]));
    };

    // Richardson on the two smallest deltas: both centered differences have
    // even error expansions D(d) = D + c d^2 + O(d^4), so with ratio
    // r = d2/d1 the combination (r^2 D(d1) - D(d2)) / (r^2 - 1) cancels c.
    const double r = ds[1] / ds[0];
    const double w = r * r;
    out.h_dot_fd = (1.0 / (w - 1.0)) * (w * centered1(0) - centered1(1));
    out.qr_fd = (1.0 / (w - 1.0)) * (w * centered2(0) - centered2(1));

    // Taylor remainders formed with the FD estimates themselves; their decay
    // exponents are the self-consistency diagnostic.
    std::vector<std::pair<double, double>> first_pairs, second_pairs;
    std::vector<double> first_norms;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double d = ds[i];
        const SpectralFunction r1 = plus[i] - h0 - d * out.h_dot_fd;
        const SpectralFunction r2 = r1 - (0.5 * d * d) * out.qr_fd;
        const double n1 = weak_norm(r1);
        first_pairs.emplace_back(d, n1);
        second_pairs.emplace_back(d, weak_norm(r2));
        first_norms.push_back(n1);
    }
    for (std::size_t i = 0; i + 1 < first_norms.size(); ++i)
        if (first_norms[i] > first_norms[i + 1] + 1e-15) {
            out.warnings.push_back("first-order FD remainder is not monotone in delta "
                                   "(step " + std::to_string(i) + ")");
            break;
        }

    const SlopeFit fit1 = taylor_slope(first_pairs);
    const SlopeFit fit2 = taylor_slope(second_pairs);
    out.first_order_slope = fit1.slope;
    out.second_order_slope = fit2.slope;
    out.slopes_floored = fit1.floored || fit2.floored;
    if (fit1.floored)
        out.warnings.push_back("first-order remainder below floor at all deltas");
    if (fit2.floored)
        out.warnings.push_back("second-order remainder below floor at all deltas");
    return out;
}

}  // namespace circleresp
