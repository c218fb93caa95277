#pragma once

#include "circleresp/maps.hpp"
#include "circleresp/spectral.hpp"
#include "circleresp/transfer.hpp"

namespace circleresp {

// Stationary density of a Markov transfer operator, solved on the truncated
// band. `residual` is the L1 norm of L h - h; `method` records whether the
// bordered direct solve succeeded or the power-iteration fallback ran.
struct StationarySolve {
    SpectralFunction h;
    double residual = 0.0;
    enum class Method { direct, power_iteration } method = Method::direct;
};

// Solve h = L h, mean(h) = 1: the fixed-point equations with the zero-mode
// row replaced by the normalization. Falls back to power iteration if the
// bordered system is ill-conditioned; throws SolverError if neither route
// reaches `residual_tolerance`, and if markov_defect(L) exceeds
// `defect_tolerance` (an under-resolved operator must fail loudly, not give
// a slightly-wrong density). Also rejects densities that go visibly negative
// (grid minimum < -1e-8): that is an under-resolution symptom.
StationarySolve stationary_density(const OperatorMatrix& op, double defect_tolerance = 1e-10,
                                   double residual_tolerance = 1e-10);

// (Id - L)^{-1} g on the mean-zero subspace V: direct solve of the 2N x 2N
// nonzero-mode block. Preconditions |mean(g)| <= 1e-11 (the resolvent only
// exists on V). The verification residual ||(Id-L)v - g||_L1 is written to
// *residual_out when given; a singular block throws SolverError.
SpectralFunction resolve(const OperatorMatrix& op, const SpectralFunction& g,
                         double* residual_out = nullptr);

// Independent cross-check route: the Neumann partial sum sum_{i=0..terms} L^i g.
// Deliberately kept separate from resolve() so the two never collapse into
// one code path.
SpectralFunction neumann_resolve(const OperatorMatrix& op, const SpectralFunction& g, int terms);

// First derivative operator applied to f:
//   deterministic:  L-dot f = -d/dx [ (L_T f) * S1 ]
//   noisy:          rho_xi * the same
// `transfer_of_T` must be the deterministic operator of the *unperturbed* map
// T at delta = 0. Result has exact zero mean. Works on arbitrary inputs (the
// quadratic response needs it on mean-zero v != h0).
SpectralFunction ldot_apply(const MapFamily& family, const OperatorMatrix& transfer_of_T,
                            const SpectralFunction& f);

// Second derivative operator (the full d^2/ddelta^2 of delta -> L_delta f):
//   deterministic:  L-ddot f = d^2/dx^2 [ (L_T f) * S1^2 ] - d/dx [ (L_T f) * S2 ]
//   noisy:          rho_xi * the same
// Note the factor-of-two ledger: the quadratic-response formula consumes
// (1/2) * lddot_apply; see quadratic_response.
SpectralFunction lddot_apply(const MapFamily& family, const OperatorMatrix& transfer_of_T,
                             const SpectralFunction& f);

// h-dot = (Id - L0)^{-1} L-dot h0 : the derivative of delta -> h_delta at 0.
SpectralFunction linear_response(const OperatorMatrix& op_zero, const MapFamily& family,
                                 const OperatorMatrix& transfer_of_T, const SpectralFunction& h0);

// Both normalizations of the second-order term are carried explicitly:
//   qr_limit = (Id-L0)^{-1} [ (1/2) L-ddot h0 + L-dot (Id-L0)^{-1} L-dot h0 ]
// is the delta^2 Taylor coefficient of h_delta (h_delta = h0 + delta h-dot +
// delta^2 qr_limit + o(delta^2)), and h_ddot = 2 * qr_limit is the plain
// second derivative d^2 h/ddelta^2. Mixing the two is the classic
// factor-of-two trap, hence both fields.
struct QuadraticResponse {
    SpectralFunction qr_limit;
    SpectralFunction h_ddot;
};

QuadraticResponse quadratic_response(const OperatorMatrix& op_zero, const MapFamily& family,
                                     const OperatorMatrix& transfer_of_T,
                                     const SpectralFunction& h0, const SpectralFunction& h_dot);

// d/ddelta of int phi h_delta at 0, i.e. the pairing int phi * h_dot dm.
double observable_response(const SpectralFunction& phi, const SpectralFunction& h_dot);

}  // namespace circleresp
