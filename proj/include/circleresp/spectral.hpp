#pragma once

#include <complex>
#include <vector>

namespace circleresp {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

// Real trigonometric polynomials on the circle [0,1), stored as truncated
// Fourier coefficients c_k, k = -N..N (index k+N). Functions are real-valued,
// so c_{-k} = conj(c_k); every operation preserves this bit-exactly and the
// invariant is re-checked after each operation (tolerance 1e-13, scaled by
// the largest coefficient so the guard stays meaningful at any magnitude).
class SpectralFunction {
  public:
    // Zero function at the given truncation order N >= 0.
    explicit SpectralFunction(int truncation_order);

    static SpectralFunction constant(double value, int truncation_order);
    // cos_amp*cos(2*pi*mode*x) + sin_amp*sin(2*pi*mode*x), mode >= 1.
    static SpectralFunction harmonic(int mode, double cos_amp, double sin_amp,
                                     int truncation_order);
    // Takes the full coefficient vector, size 2N+1, index k+N; validates
    // conjugate symmetry.
    static SpectralFunction from_coefficients(std::vector<std::complex<double>> coeffs);

    int truncation_order() const { return order_; }
    // c_k; zero outside the stored band.
    std::complex<double> coeff(int k) const;
    // c_0 (its imaginary part is zero by the symmetry invariant).
    double mean() const;
    // Pointwise evaluation c_0 + 2*sum_{k>=1} Re(c_k e^{2 pi i k x}).
    double evaluate(double x) const;
    double max_abs_coeff() const;

    // Copy re-truncated (or zero-padded) to a new order.
    SpectralFunction with_order(int new_order) const;

    // Linear arithmetic; mixed orders pad to the larger one.
    friend SpectralFunction operator+(const SpectralFunction& f, const SpectralFunction& g);
    friend SpectralFunction operator-(const SpectralFunction& f, const SpectralFunction& g);
    friend SpectralFunction operator*(double a, const SpectralFunction& f);

    const std::vector<std::complex<double>>& raw() const { return coeffs_; }

  private:
    SpectralFunction(std::vector<std::complex<double>> coeffs, int order)
        : coeffs_(std::move(coeffs)), order_(order) {}
    void check_symmetry(const char* where) const;

    std::vector<std::complex<double>> coeffs_;
    int order_ = 0;
};

// Real samples on the uniform grid x_j = j/M. M must be a power of two (and
// >= 4) so that grids of different refinement levels nest.
class GridFunction {
  public:
    explicit GridFunction(std::vector<double> values);

    int grid_size() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }
    double value(int j) const { return values_[static_cast<std::size_t>(j)]; }

  private:
    std::vector<double> values_;
};

// Zero-mean Gaussian noise of standard deviation xi > 0, reduced mod 1. The
// periodized density rho~(x) = sum_m rho(x+m) never enters the convolution
// hot path: convolution acts diagonally through multiplier(k), the exact
// Fourier transform of the periodization. Real-space evaluation is kept for
// diagnostics and as an independent test oracle, truncating the wrap sum at
// |m| <= ceil(8*xi)+2 (the discarded tail is below 1e-14 of the value).
class NoiseKernel {
  public:
    explicit NoiseKernel(double xi);

    double xi() const { return xi_; }
    // Fourier multiplier of the periodized Gaussian: exp(-2 pi^2 xi^2 k^2).
    double multiplier(int k) const;
    int wrap_cutoff() const { return wrap_cutoff_; }

    // d^n/dx^n rho~(x) by the Hermite recurrence, summed over wraps.
    double periodized_value(double x, int derivative_order = 0) const;
    // C^j norm of rho~ itself: sum_{i<=j} max_x |rho~^{(i)}(x)| on a fine grid.
    double periodized_ck_norm(int j, int grid_size = 4096) const;
    // P(center + noise falls in [a,b) mod 1), 0 <= a <= b <= 1, via erf
    // differences over the wrap window. Used by the Ulam oracle.
    double interval_mass(double a, double b, double center) const;

  private:
    double xi_;
    int wrap_cutoff_;
};

// Smallest power of two >= max(1024, 8N); the shared fine grid for norms.
int fine_grid_size(int truncation_order);

// values_j = sum_k c_k e^{2 pi i k j / M}; requires M >= 2N+2 (and a power of
// two). The imaginary residue must vanish to 1e-12 (scaled) and is dropped.
GridFunction to_grid(const SpectralFunction& f, int grid_size);

// c_k = (1/M) sum_j v_j e^{-2 pi i k j / M} for |k| <= N; requires M >= 2N+2.
// Conjugate symmetry is enforced exactly by averaging c_k with conj(c_{-k}).
SpectralFunction from_grid(const GridFunction& g, int truncation_order);

// d^order/dx^order: c_k *= (2 pi i k)^order. The mean vanishes exactly.
SpectralFunction differentiate(const SpectralFunction& f, int order = 1);

// Dealiased pointwise product: both factors are evaluated on a grid of size
// next_pow2(4*max(Nf,Ng)) — exact for the band |k| <= max(Nf,Ng) since the
// true product has bandwidth Nf+Ng < 3*max and the first alias sits at
// distance M - 2*max >= 2*max from the kept band.
SpectralFunction multiply(const SpectralFunction& f, const SpectralFunction& g);

// rho_xi * f: diagonal in Fourier, c_k *= multiplier(k). Mean is preserved
// bit-identically (multiplier(0) == 1).
SpectralFunction convolve_gaussian(const SpectralFunction& f, const NoiseKernel& kernel);

// Norms on the shared fine grid:
//   L1      = (1/G) sum |f(x_j)|
//   Ck(j)   = sum_{i<=j} max_x |f^{(i)}|
//   Wk1(j)  = sum_{i<=j} L1(f^{(i)})
double norm_l1(const SpectralFunction& f);
double norm_ck(const SpectralFunction& f, int j);
double norm_wk1(const SpectralFunction& f, int j);

}  // namespace circleresp
