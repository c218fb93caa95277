#pragma once

#include <Eigen/Dense>

#include "circleresp/maps.hpp"
#include "circleresp/spectral.hpp"

namespace circleresp {

// Dense matrix of a transfer operator on the truncated Fourier band
// k = -N..N (index k+N), acting on SpectralFunction coefficient vectors.
// Dense storage is deliberate: N stays small (<= a few hundred), and the
// matrices have no useful sparsity once a nonlinear map or a noise kernel
// is involved.
//
// Structural facts checked at construction:
//   * entries(-j,-k) = conj(entries(j,k))  (the operator maps real functions
//     to real functions); assembly produces this bit-exactly.
//   * row j=0 is the Lebesgue-integral row, so markov_defect =
//     max_k |entries(0,k) - [k=0]| measures mass conservation directly.
class OperatorMatrix {
  public:
    enum class Kind { deterministic, annealed };

    OperatorMatrix(Eigen::MatrixXcd entries, Kind kind);

    int truncation_order() const { return order_; }
    Kind kind() const { return kind_; }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    // Cached max_k |entries(0,k) - [k==0]|, measured at assembly.
    double markov_defect() const { return markov_defect_; }

    // entry (j,k) with signed mode indices.
    std::complex<double> entry(int j, int k) const {
        return entries_(static_cast<Eigen::Index>(j + order_),
                        static_cast<Eigen::Index>(k + order_));
    }

  private:
    Eigen::MatrixXcd entries_;
    int order_ = 0;
    Kind kind_ = Kind::deterministic;
    double markov_defect_ = 0.0;
};

// Transfer (pushforward) operator of T_delta = D_delta o T by Koopman-dual
// quadrature on M uniform points:
//   entries(j,k) = (1/M) sum_m e^{-2 pi i j T_delta(x_m)} e^{2 pi i k x_m}.
// Requires M >= 4N. Assembly is purely quadrature-based and works for any
// smooth lift (identity, rotations, non-expanding maps); expansion checks are
// enforced by the deterministic response pipeline, not here.
OperatorMatrix build_deterministic(const MapFamily& family, double delta, int truncation_order,
                                   int quadrature_size);

// Annealed operator of the additive-noise system: rho_xi * (deterministic
// pushforward), i.e. row j scaled by the kernel multiplier exp(-2 pi^2 xi^2 j^2).
// Requires family.noise to be set.
OperatorMatrix build_annealed(const MapFamily& family, double delta, int truncation_order,
                              int quadrature_size);

// Matrix-vector action on a SpectralFunction (padded/truncated to the
// operator's band). Conjugate symmetry of the result is exact by mirroring.
SpectralFunction apply(const OperatorMatrix& op, const SpectralFunction& f);

double markov_defect(const OperatorMatrix& op);

// Coefficient vector <-> Eigen bridge (index k+N).
Eigen::VectorXcd to_vector(const SpectralFunction& f, int truncation_order);
SpectralFunction from_vector(const Eigen::VectorXcd& v);

}  // namespace circleresp
