#include "circleresp/response.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "circleresp/errors.hpp"

namespace circleresp {

namespace {

// Residual ||L h - h||_L1 against the full truncated operator.
double fixed_point_residual(const OperatorMatrix& op, const SpectralFunction& h) {
    return norm_l1(apply(op, h) - h);
}

double grid_min(const SpectralFunction& f) {
    const GridFunction g = to_grid(f, fine_grid_size(f.truncation_order()));
    double m = g.value(0);
    for (double v : g.values()) m = std::min(m, v);
    return m;
}

// For a deterministic (no-kernel) family the response theory needs uniform
// expansion of the unperturbed map; noisy families need no such thing.
void require_response_regime(const MapFamily& family) {
    if (!family.noise) check_expansion(family.base);
}

}  // namespace

StationarySolve stationary_density(const OperatorMatrix& op, double defect_tolerance,
                                   double residual_tolerance) {
    if (op.markov_defect() > defect_tolerance)
        throw SolverError("operator is not Markov to tolerance: defect = " +
                          std::to_string(op.markov_defect()) +
                          " (raise quadrature_size; the operator is under-resolved)");
    const int n = op.truncation_order();
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n) + 1;
    const Eigen::Index zero = static_cast<Eigen::Index>(n);

    StationarySolve out{SpectralFunction::constant(1.0, n), 0.0, StationarySolve::Method::direct};

    // Bordered system: (Id - L) h = 0 with the zero-mode equation replaced by
    // the normalization c_0 = 1.
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(dim, dim) - op.entries();
    a.row(zero).setZero();
    a(zero, zero) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
    rhs(zero) = 1.0;

    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    bool direct_ok = lu.rcond() > 1e-13;
    if (direct_ok) {
        const Eigen::VectorXcd sol = lu.solve(rhs);
        out.h = from_vector(sol);
        out.residual = fixed_point_residual(op, out.h);
        direct_ok = out.residual <= residual_tolerance;
    }

    if (!direct_ok) {
        // Fallback: power iteration from the flat density. The zero mode is
        // pinned to 1 each sweep (the operator conserves it up to the defect).
        SpectralFunction h = SpectralFunction::constant(1.0, n);
        double change = 1.0;
        int iterations = 0;
        constexpr int kMaxIterations = 100000;
        while (change > 1e-14 && iterations < kMaxIterations) {
            SpectralFunction next = apply(op, h);
            if (std::abs(next.mean()) < 0.5)
                throw SolverError("power iteration: operator nearly annihilates the mean");
            next = (1.0 / next.mean()) * next;
            change = norm_l1(next - h);
            h = next;
            ++iterations;
        }
        out.h = h;
        out.residual = fixed_point_residual(op, h);
        out.method = StationarySolve::Method::power_iteration;
        if (change > 1e-14 || out.residual > residual_tolerance)
            throw SolverError("stationary solve failed: direct rcond = " +
                              std::to_string(lu.rcond()) + ", power-iteration residual = " +
                              std::to_string(out.residual) + " after " +
                              std::to_string(iterations) + " iterations");
    }

    const double min_value = grid_min(out.h);
    if (min_value < -1e-8)
        throw SolverError("stationary density dips to " + std::to_string(min_value) +
                          " < -1e-8 on the fine grid: under-resolved scenario");
    return out;
}

SpectralFunction resolve(const OperatorMatrix& op, const SpectralFunction& g,
                         double* residual_out) {
    if (std::abs(g.mean()) > 1e-11)
        throw std::invalid_argument(
            "resolve: input must be mean-zero (the resolvent of a Markov operator exists only "
            "on the zero-average subspace V), got mean = " +
            std::to_string(g.mean()));
    const int n = op.truncation_order();
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n);  // nonzero modes only

    // (Id - L) restricted to V in the basis {e_k}_{k != 0}: drop the zero-mode
    // row and column. The dropped column never feeds back (input has c_0 = 0)
    // and the dropped row only tracks the mean, which stays 0 up to the
    // Markov defect.
    Eigen::MatrixXcd block(dim, dim);
    Eigen::VectorXcd rhs(dim);
    const Eigen::VectorXcd gv = to_vector(g.with_order(n), n);
    for (Eigen::Index r = 0; r < dim; ++r) {
        const Eigen::Index row_full = (r < n) ? r : r + 1;
        rhs(r) = gv(row_full);
        for (Eigen::Index c = 0; c < dim; ++c) {
            const Eigen::Index col_full = (c < n) ? c : c + 1;
            const std::complex<double> id = (row_full == col_full) ? 1.0 : 0.0;
            block(r, c) = id - op.entries()(row_full, col_full);
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(block);
    if (lu.rcond() < 1e-14)
        throw SolverError("resolvent block is numerically singular (rcond = " +
                          std::to_string(lu.rcond()) + "): 1 is not spectrally isolated at this "
                          "truncation");
    const Eigen::VectorXcd sol = lu.solve(rhs);

    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(2 * static_cast<Eigen::Index>(n) + 1);
    for (Eigen::Index r = 0; r < dim; ++r) full((r < n) ? r : r + 1) = sol(r);
    SpectralFunction v = from_vector(full);

    const double residual = norm_l1((v - apply(op, v)) - g.with_order(n));
    if (residual_out) *residual_out = residual;
    if (residual > 1e-8 * std::max(1.0, norm_l1(g)))
        throw SolverError("resolvent verification residual " + std::to_string(residual) +
                          " is out of proportion; solve is untrustworthy");
    return v;
}

SpectralFunction neumann_resolve(const OperatorMatrix& op, const SpectralFunction& g, int terms) {
    if (terms < 0) throw std::invalid_argument("neumann_resolve needs terms >= 0");
    SpectralFunction sum = g.with_order(op.truncation_order());
    SpectralFunction power = sum;
    for (int i = 1; i <= terms; ++i) {
        power = apply(op, power);
        sum = sum + power;
    }
    return sum;
}

SpectralFunction ldot_apply(const MapFamily& family, const OperatorMatrix& transfer_of_T,
                            const SpectralFunction& f) {
    require_response_regime(family);
    const int n = transfer_of_T.truncation_order();
    const SpectralFunction pushed = apply(transfer_of_T, f);
    const SpectralFunction s1 = family.perturbation.s1.to_spectral(n);
    // L-dot f = -((L_T f) * S1)' ; convolved with the kernel when noisy.
    SpectralFunction result = -1.0 * differentiate(multiply(pushed, s1), 1);
    if (family.noise) result = convolve_gaussian(result, *family.noise);
    return result;
}

SpectralFunction lddot_apply(const MapFamily& family, const OperatorMatrix& transfer_of_T,
                             const SpectralFunction& f) {
    require_response_regime(family);
    const int n = transfer_of_T.truncation_order();
    const SpectralFunction pushed = apply(transfer_of_T, f);
    const SpectralFunction s1 = family.perturbation.s1.to_spectral(n);
    const SpectralFunction s2 = family.perturbation.s2.to_spectral(n);
    // L-ddot f = ((L_T f) * S1^2)'' - ((L_T f) * S2)'.
    SpectralFunction result = differentiate(multiply(pushed, multiply(s1, s1)), 2) -
                              differentiate(multiply(pushed, s2), 1);
    if (family.noise) result = convolve_gaussian(result, *family.noise);
    return result;
}

SpectralFunction linear_response(const OperatorMatrix& op_zero, const MapFamily& family,
                                 const OperatorMatrix& transfer_of_T, const SpectralFunction& h0) {
    return resolve(op_zero, ldot_apply(family, transfer_of_T, h0));
}

QuadraticResponse quadratic_response(const OperatorMatrix& op_zero, const MapFamily& family,
                                     const OperatorMatrix& transfer_of_T,
                                     const SpectralFunction& h0, const SpectralFunction& h_dot) {
    // delta^2 coefficient: (Id-L0)^{-1} [ (1/2) L-ddot h0 + L-dot h-dot ].
    // The half belongs to the Taylor normalization of L_delta; the cross term
    // reuses the *same* derivative operator on h-dot = (Id-L0)^{-1} L-dot h0.
    const SpectralFunction second = 0.5 * lddot_apply(family, transfer_of_T, h0);
    const SpectralFunction cross = ldot_apply(family, transfer_of_T, h_dot);
    QuadraticResponse out{resolve(op_zero, second + cross), SpectralFunction(0)};
    out.h_ddot = 2.0 * out.qr_limit;
    return out;
}

double observable_response(const SpectralFunction& phi, const SpectralFunction& h_dot) {
    // Pairing int phi * h_dot dm; the dealiased product makes the quadrature
    // exact for band-limited factors.
    return multiply(phi, h_dot).mean();
}

}  // namespace circleresp
