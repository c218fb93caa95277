#include "circleresp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace circleresp {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

int next_pow2(int m) {
    int p = 1;
    while (p < m) p <<= 1;
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpectralFunction

SpectralFunction::SpectralFunction(int truncation_order) : order_(truncation_order) {
    if (truncation_order < 0) throw std::invalid_argument("truncation order must be >= 0");
    coeffs_.assign(2 * static_cast<std::size_t>(truncation_order) + 1, {0.0, 0.0});
}

SpectralFunction SpectralFunction::constant(double value, int truncation_order) {
    SpectralFunction f(truncation_order);
    f.coeffs_[static_cast<std::size_t>(truncation_order)] = {value, 0.0};
    return f;
}

SpectralFunction SpectralFunction::harmonic(int mode, double cos_amp, double sin_amp,
                                            int truncation_order) {
    if (mode < 1 || mode > truncation_order)
        throw std::invalid_argument("harmonic mode out of band: k=" + std::to_string(mode) +
                                    ", N=" + std::to_string(truncation_order));
    SpectralFunction f(truncation_order);
    // cos = (e_k + e_{-k})/2, sin = (e_k - e_{-k})/(2i).
    const std::complex<double> c{cos_amp / 2.0, -sin_amp / 2.0};
    f.coeffs_[static_cast<std::size_t>(truncation_order + mode)] = c;
    f.coeffs_[static_cast<std::size_t>(truncation_order - mode)] = std::conj(c);
    return f;
}

SpectralFunction SpectralFunction::from_coefficients(std::vector<std::complex<double>> coeffs) {
    if (coeffs.empty() || coeffs.size() % 2 == 0)
        throw std::invalid_argument("coefficient vector must have odd size 2N+1");
    const int order = static_cast<int>(coeffs.size() / 2);
    SpectralFunction f(std::move(coeffs), order);
    f.check_symmetry("from_coefficients");
    return f;
}

std::complex<double> SpectralFunction::coeff(int k) const {
    if (k < -order_ || k > order_) return {0.0, 0.0};
    return coeffs_[static_cast<std::size_t>(k + order_)];
}

double SpectralFunction::mean() const { return coeffs_[static_cast<std::size_t>(order_)].real(); }

double SpectralFunction::evaluate(double x) const {
    const std::complex<double> w = std::polar(1.0, kTwoPi * x);
    std::complex<double> wk = w;
    double acc = mean();
    for (int k = 1; k <= order_; ++k) {
        acc += 2.0 * (coeff(k) * wk).real();
        wk *= w;
    }
    return acc;
}

double SpectralFunction::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

SpectralFunction SpectralFunction::with_order(int new_order) const {
    SpectralFunction out(new_order);
    const int band = std::min(order_, new_order);
    for (int k = -band; k <= band; ++k)
        out.coeffs_[static_cast<std::size_t>(k + new_order)] = coeff(k);
    return out;
}

SpectralFunction operator+(const SpectralFunction& f, const SpectralFunction& g) {
    const int order = std::max(f.order_, g.order_);
    SpectralFunction out(order);
    for (int k = -order; k <= order; ++k)
        out.coeffs_[static_cast<std::size_t>(k + order)] = f.coeff(k) + g.coeff(k);
    out.check_symmetry("operator+");
    return out;
}

SpectralFunction operator-(const SpectralFunction& f, const SpectralFunction& g) {
    return f + (-1.0 * g);
}

SpectralFunction operator*(double a, const SpectralFunction& f) {
    SpectralFunction out = f;
    for (auto& c : out.coeffs_) c *= a;
    return out;
}

void SpectralFunction::check_symmetry(const char* where) const {
    const double tol = 1e-13 * std::max(1.0, max_abs_coeff());
    for (int k = 1; k <= order_; ++k) {
        const std::complex<double> mismatch = coeff(-k) - std::conj(coeff(k));
        if (std::abs(mismatch) > tol) {
            char detail[64];
            std::snprintf(detail, sizeof(detail), "%.3e (tol %.3e)", std::abs(mismatch), tol);
            throw std::logic_error(std::string("conjugate symmetry violated in ") + where +
                                   " at k=" + std::to_string(k) + ": |c_{-k} - conj(c_k)| = " +
                                   detail);
        }
    }
    if (std::abs(coeff(0).imag()) > tol)
        throw std::logic_error(std::string("mean has imaginary part in ") + where);
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
    const int m = static_cast<int>(values_.size());
    if (m < 4 || !is_power_of_two(m))
        throw std::invalid_argument("grid size must be a power of two >= 4, got " +
                                    std::to_string(m));
}

// ---------------------------------------------------------------------------
// Transforms

int fine_grid_size(int truncation_order) {
    return next_pow2(std::max(1024, 8 * truncation_order));
}

GridFunction to_grid(const SpectralFunction& f, int grid_size) {
    const int n = f.truncation_order();
    if (grid_size < 2 * n + 2)
        throw std::invalid_argument("grid size " + std::to_string(grid_size) +
                                    " would alias truncation order " + std::to_string(n));
    std::vector<double> values(static_cast<std::size_t>(grid_size));
    double max_imag = 0.0;
    double max_val = 0.0;
    for (int j = 0; j < grid_size; ++j) {
        // Horner sum over k = -N..N in the variable w = e^{2 pi i j / M}.
        const std::complex<double> w = std::polar(1.0, kTwoPi * j / grid_size);
        std::complex<double> acc{0.0, 0.0};
        for (int k = n; k >= -n; --k) acc = acc * w + f.coeff(k);
        // acc now holds sum c_k w^{k+N}; unwind the w^N prefactor. The phase
        // argument is reduced mod M in exact integer arithmetic first.
        const long long red = (static_cast<long long>(j) * n) % grid_size;
        acc *= std::polar(1.0, -kTwoPi * static_cast<double>(red) / grid_size);
        values[static_cast<std::size_t>(j)] = acc.real();
        max_imag = std::max(max_imag, std::abs(acc.imag()));
        max_val = std::max(max_val, std::abs(acc.real()));
    }
    if (max_imag > 1e-12 * std::max(1.0, max_val))
        throw std::logic_error("to_grid: imaginary residue " + std::to_string(max_imag) +
                               " exceeds tolerance — coefficients are not a real function");
    return GridFunction(std::move(values));
}

SpectralFunction from_grid(const GridFunction& g, int truncation_order) {
    const int m = g.grid_size();
    if (m < 2 * truncation_order + 2)
        throw std::invalid_argument("grid size " + std::to_string(m) +
                                    " cannot resolve truncation order " +
                                    std::to_string(truncation_order));
    std::vector<std::complex<double>> coeffs(2 * static_cast<std::size_t>(truncation_order) + 1);
    for (int k = 0; k <= truncation_order; ++k) {
        const std::complex<double> step = std::polar(1.0, -kTwoPi * k / m);
        std::complex<double> phase{1.0, 0.0};
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < m; ++j) {
            // Re-seed the phase recurrence periodically so rounding drift
            // cannot accumulate on fine grids; k*j is reduced mod M exactly.
            if ((j & 511) == 0)
                phase = std::polar(1.0, -kTwoPi *
                                            static_cast<double>((static_cast<long long>(k) * j) % m) / m);
            acc += g.value(j) * phase;
            phase *= step;
        }
        acc /= static_cast<double>(m);
        // Enforce c_{-k} = conj(c_k) exactly; for real samples the two raw
        // sums already agree to rounding, averaging removes even that.
        coeffs[static_cast<std::size_t>(truncation_order + k)] = acc;
        coeffs[static_cast<std::size_t>(truncation_order - k)] = std::conj(acc);
    }
    // The k=0 row of the loop stored conj(c_0) over c_0; make the mean real.
    auto& c0 = coeffs[static_cast<std::size_t>(truncation_order)];
    c0 = {c0.real(), 0.0};
    return SpectralFunction::from_coefficients(std::move(coeffs));
}

SpectralFunction differentiate(const SpectralFunction& f, int order) {
    if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
    if (order == 0) return f;
    const int n = f.truncation_order();
    std::vector<std::complex<double>> coeffs(2 * static_cast<std::size_t>(n) + 1);
    // (2 pi i k)^j = (2 pi |k|)^j * i^j * sign(k)^j; the i^j rotation is an
    // exact component swap, so symmetry survives bit-for-bit.
    for (int k = -n; k <= n; ++k) {
        if (k == 0) {
            coeffs[static_cast<std::size_t>(n)] = {0.0, 0.0};
            continue;
        }
        double scale = std::pow(kTwoPi * std::abs(k), order);
        if (k < 0 && (order % 2) == 1) scale = -scale;
        std::complex<double> c = f.coeff(k) * scale;
        switch (order % 4) {
            case 0: break;
            case 1: c = {-c.imag(), c.real()}; break;   // * i
            case 2: c = -c; break;                      // * -1
            case 3: c = {c.imag(), -c.real()}; break;   // * -i
        }
        coeffs[static_cast<std::size_t>(k + n)] = c;
    }
    return SpectralFunction::from_coefficients(std::move(coeffs));
}

SpectralFunction multiply(const SpectralFunction& f, const SpectralFunction& g) {
    const int order = std::max(f.truncation_order(), g.truncation_order());
    const int m = next_pow2(std::max(4 * order, 8));
    const GridFunction fg = to_grid(f, m);
    const GridFunction gg = to_grid(g, m);
    std::vector<double> prod(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) prod[static_cast<std::size_t>(j)] = fg.value(j) * gg.value(j);
    return from_grid(GridFunction(std::move(prod)), order);
}

SpectralFunction convolve_gaussian(const SpectralFunction& f, const NoiseKernel& kernel) {
    const int n = f.truncation_order();
    std::vector<std::complex<double>> coeffs(2 * static_cast<std::size_t>(n) + 1);
    for (int k = -n; k <= n; ++k)
        coeffs[static_cast<std::size_t>(k + n)] = f.coeff(k) * kernel.multiplier(k);
    return SpectralFunction::from_coefficients(std::move(coeffs));
}

// ---------------------------------------------------------------------------
// Norms

double norm_l1(const SpectralFunction& f) {
    const int m = fine_grid_size(f.truncation_order());
    const GridFunction g = to_grid(f, m);
    double acc = 0.0;
    for (double v : g.values()) acc += std::abs(v);
    return acc / m;
}

double norm_ck(const SpectralFunction& f, int j) {
    if (j < 0) throw std::invalid_argument("Ck norm order must be >= 0");
    const int m = fine_grid_size(f.truncation_order());
    double acc = 0.0;
    SpectralFunction deriv = f;
    for (int i = 0; i <= j; ++i) {
        if (i > 0) deriv = differentiate(deriv, 1);
        const GridFunction g = to_grid(deriv, m);
        double mx = 0.0;
        for (double v : g.values()) mx = std::max(mx, std::abs(v));
        acc += mx;
    }
    return acc;
}

double norm_wk1(const SpectralFunction& f, int j) {
    if (j < 0) throw std::invalid_argument("Wk1 norm order must be >= 0");
    double acc = 0.0;
    SpectralFunction deriv = f;
    for (int i = 0; i <= j; ++i) {
        if (i > 0) deriv = differentiate(deriv, 1);
        acc += norm_l1(deriv);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// NoiseKernel

NoiseKernel::NoiseKernel(double xi) : xi_(xi) {
    if (!(xi > 0.0))
        throw std::invalid_argument("noise amplitude xi must be positive (degenerate xi=0 is "
                                    "the deterministic scenario, not a kernel)");
    wrap_cutoff_ = static_cast<int>(std::ceil(8.0 * xi)) + 2;
}

double NoiseKernel::multiplier(int k) const {
    if (k == 0) return 1.0;
    const double pik = kTwoPi * k / 2.0;  // pi * k
    return std::exp(-2.0 * pik * pik * xi_ * xi_);
}

namespace {

// d^n/dx^n of the line Gaussian rho(x) = exp(-x^2/(2 xi^2)) / (sqrt(2 pi) xi)
// via probabilists' Hermite polynomials: rho^(n)(x) = (-1)^n He_n(u) rho(x) / xi^n,
// u = x/xi, with He_0 = 1, He_1 = u, He_{n+1} = u He_n - n He_{n-1}.
double gaussian_derivative(double x, double xi, int n) {
    const double u = x / xi;
    const double rho = std::exp(-0.5 * u * u) / (std::sqrt(kTwoPi) * xi);
    double he_prev = 1.0, he = u;
    if (n == 0) return rho;
    for (int i = 1; i < n; ++i) {
        const double he_next = u * he - i * he_prev;
        he_prev = he;
        he = he_next;
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * he * rho / std::pow(xi, n);
}

}  // namespace

double NoiseKernel::periodized_value(double x, int derivative_order) const {
    if (derivative_order < 0) throw std::invalid_argument("derivative order must be >= 0");
    double acc = 0.0;
    for (int m = -wrap_cutoff_; m <= wrap_cutoff_; ++m)
        acc += gaussian_derivative(x + m, xi_, derivative_order);
    return acc;
}

double NoiseKernel::periodized_ck_norm(int j, int grid_size) const {
    double acc = 0.0;
    for (int i = 0; i <= j; ++i) {
        double mx = 0.0;
        for (int g = 0; g < grid_size; ++g)
            mx = std::max(mx, std::abs(periodized_value(static_cast<double>(g) / grid_size, i)));
        acc += mx;
    }
    return acc;
}

double NoiseKernel::interval_mass(double a, double b, double center) const {
    if (!(0.0 <= a && a <= b && b <= 1.0 + 1e-12))
        throw std::invalid_argument("interval_mass expects 0 <= a <= b <= 1");
    // P(center + xi Z mod 1 in [a,b)) = sum_m Phi((b - center + m)/xi) - Phi((a - center + m)/xi).
    // Arguments beyond 8 sigma contribute < 1e-15 and are clamped to 0/1 so
    // at most a couple of erf calls survive per wrap.
    const double inv = 1.0 / (xi_ * std::sqrt(2.0));
    auto cdf = [&](double z) {
        const double t = z * inv;
        if (t > 8.0) return 1.0;
        if (t < -8.0) return 0.0;
        return 0.5 * (1.0 + std::erf(t));
    };
    double acc = 0.0;
    for (int m = -wrap_cutoff_; m <= wrap_cutoff_; ++m)
        acc += cdf(b - center + m) - cdf(a - center + m);
    return acc;
}

}  // namespace circleresp
