#include "circleresp/transfer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "circleresp/errors.hpp"

namespace circleresp {

OperatorMatrix::OperatorMatrix(Eigen::MatrixXcd entries, Kind kind)
    : entries_(std::move(entries)), kind_(kind) {
    const Eigen::Index dim = entries_.rows();
    if (dim != entries_.cols() || dim % 2 == 0)
        throw std::invalid_argument("operator matrix must be square with odd dimension 2N+1");
    order_ = static_cast<int>(dim / 2);
    // Reality structure: entries(-j,-k) = conj(entries(j,k)).
    double worst = 0.0;
    double scale = 1.0;
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = 0; k < dim; ++k) {
            scale = std::max(scale, std::abs(entries_(j, k)));
            worst = std::max(worst,
                             std::abs(entries_(j, k) - std::conj(entries_(dim - 1 - j, dim - 1 - k))));
        }
    if (worst > 1e-12 * scale)
        throw std::logic_error("operator entries break conjugate-mirror symmetry by " +
                               std::to_string(worst));
    const Eigen::Index zero_row = static_cast<Eigen::Index>(order_);
    double defect = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
        const std::complex<double> expected = (k == zero_row) ? 1.0 : 0.0;
        defect = std::max(defect, std::abs(entries_(zero_row, k) - expected));
    }
    markov_defect_ = defect;
}

OperatorMatrix build_deterministic(const MapFamily& family, double delta, int truncation_order,
                                   int quadrature_size) {
    const int n = truncation_order;
    const int m = quadrature_size;
    if (n < 1) throw std::invalid_argument("truncation order must be >= 1");
    if (m < 4 * n)
        throw std::invalid_argument("quadrature size " + std::to_string(m) +
                                    " too small for truncation order " + std::to_string(n) +
                                    " (need M >= 4N)");
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n) + 1;

    // entries = (1/M) A^T B with A(m,.) = e^{-2 pi i j T_delta(x_m)} and
    // B(m,.) = e^{2 pi i k x_m}; both built by phase recurrences from the
    // j=1 / k=1 columns, mirrored so the conjugate structure is bit-exact.
    Eigen::MatrixXcd a(m, dim), b(m, dim);
    for (int q = 0; q < m; ++q) {
        const double x = static_cast<double>(q) / m;
        const double tx = evaluate_perturbed(family, delta, x);
        const std::complex<double> wa = std::polar(1.0, -kTwoPi * tx);
        const std::complex<double> wb = std::polar(1.0, kTwoPi * x);
        std::complex<double> pa{1.0, 0.0}, pb{1.0, 0.0};
        a(q, n) = pa;
        b(q, n) = pb;
        for (int j = 1; j <= n; ++j) {
            pa *= wa;
            pb *= wb;
            a(q, n + j) = pa;
            a(q, n - j) = std::conj(pa);
            b(q, n + j) = pb;
            b(q, n - j) = std::conj(pb);
        }
    }
    Eigen::MatrixXcd entries = (a.transpose() * b) / static_cast<double>(m);
    return OperatorMatrix(std::move(entries), OperatorMatrix::Kind::deterministic);
}

OperatorMatrix build_annealed(const MapFamily& family, double delta, int truncation_order,
                              int quadrature_size) {
    if (!family.noise)
        throw std::invalid_argument("annealed operator requires a noise kernel on the family");
    const OperatorMatrix det = build_deterministic(family, delta, truncation_order, quadrature_size);
    Eigen::MatrixXcd entries = det.entries();
    const int n = truncation_order;
    for (int j = -n; j <= n; ++j)
        entries.row(static_cast<Eigen::Index>(j + n)) *= family.noise->multiplier(j);
    return OperatorMatrix(std::move(entries), OperatorMatrix::Kind::annealed);
}

SpectralFunction apply(const OperatorMatrix& op, const SpectralFunction& f) {
    const int n = op.truncation_order();
    const Eigen::VectorXcd v = to_vector(f, n);
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n) + 1;
    Eigen::VectorXcd out(dim);
    // Compute rows j >= 0 and mirror: conjugate symmetry of the result is
    // then exact rather than up to a reordered-summation rounding.
    const std::complex<double> mean = (op.entries().row(static_cast<Eigen::Index>(n)) * v)(0);
    out(static_cast<Eigen::Index>(n)) = {mean.real(), 0.0};
    for (int j = 1; j <= n; ++j) {
        const std::complex<double> y = (op.entries().row(static_cast<Eigen::Index>(n + j)) * v)(0);
        out(static_cast<Eigen::Index>(n + j)) = y;
        out(static_cast<Eigen::Index>(n - j)) = std::conj(y);
    }
    return from_vector(out);
}

double markov_defect(const OperatorMatrix& op) { return op.markov_defect(); }

Eigen::VectorXcd to_vector(const SpectralFunction& f, int truncation_order) {
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(truncation_order) + 1;
    Eigen::VectorXcd v(dim);
    for (int k = -truncation_order; k <= truncation_order; ++k)
        v(static_cast<Eigen::Index>(k + truncation_order)) = f.coeff(k);
    return v;
}

SpectralFunction from_vector(const Eigen::VectorXcd& v) {
    if (v.size() % 2 == 0)
        throw std::invalid_argument("coefficient vector must have odd size 2N+1");
    const Eigen::Index n = v.size() / 2;
    double scale = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) scale = std::max(scale, std::abs(v(i)));
    // Fold the mirror halves together: LU solutions satisfy the conjugate
    // symmetry only up to rounding, while downstream arithmetic relies on it
    // bit-exactly (differences of near-equal functions would otherwise expose
    // the inherited asymmetry). Gross violations still fail loudly — they
    // mean the vector was not a real function to begin with.
    double worst = std::abs(v(n).imag());
    std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(v.size()));
    coeffs[static_cast<std::size_t>(n)] = {v(n).real(), 0.0};
    for (Eigen::Index k = 1; k <= n; ++k) {
        worst = std::max(worst, std::abs(v(n + k) - std::conj(v(n - k))));
        const std::complex<double> avg = 0.5 * (v(n + k) + std::conj(v(n - k)));
        coeffs[static_cast<std::size_t>(n + k)] = avg;
        coeffs[static_cast<std::size_t>(n - k)] = std::conj(avg);
    }
    if (worst > 1e-11 * scale)
        throw std::logic_error("from_vector: coefficient vector is not conjugate-symmetric (by " +
                               std::to_string(worst) + "); not a real function");
    return SpectralFunction::from_coefficients(std::move(coeffs));
}

}  // namespace circleresp
