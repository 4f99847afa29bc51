#pragma once

#include "netchar/linalg.hpp"

#include <optional>

namespace netchar {

// Physicality slack applied when validating a transfer matrix. The defaults
// suit exact model matrices; measured matrices carry noise and are
// constructed with slack scaled to the estimated noise floor.
struct PhysicalityTolerances {
    double modulus_slack = 1e-9; // each |M_jk| <= 1 + modulus_slack
    double gain_slack = 1e-6;    // each singular value <= 1 + gain_slack
};

// N×N complex transfer matrix of a passive linear-optical network.
// Entry (j,k) couples input mode j to output mode k; the map on creation
// operators is a†_j = sum_k M_jk b†_k, and a coherent input alpha propagates
// to beta_k = sum_j M_jk alpha_j. Modes are 0-based here and in all arrays;
// user-facing documentation and the CLI count modes from 1.
class TransferMatrix {
public:
    explicit TransferMatrix(linalg::Matrix m, PhysicalityTolerances tol = {});

    Eigen::Index modes() const { return m_.rows(); }
    const linalg::Matrix& matrix() const { return m_; }
    const PhysicalityTolerances& tolerances() const { return tol_; }

    linalg::Complex entry(Eigen::Index in, Eigen::Index out) const;
    double modulus(Eigen::Index in, Eigen::Index out) const;
    // Phase in [0, 2pi).
    double phase(Eigen::Index in, Eigen::Index out) const;

private:
    linalg::Matrix m_;
    PhysicalityTolerances tol_;
};

// Coincidence probabilities for a photon pair entering modes (i,j) and
// leaving on modes (k,l), plus their nonclassical interference visibility
// (c−q)/c. The visibility is absent when c is below 1e−12: dividing there
// would manufacture a value the measurement cannot support.
struct TwoPhotonObservables {
    double indistinguishable = 0.0; // q
    double distinguishable = 0.0;   // c
    std::optional<double> visibility;
};

// Diagonal-phase decomposition M = D(mu) M' D(nu) with D(mu) =
// diag(e^{i mu_1}, ..., e^{i mu_N}). M' carries a real nonnegative first row
// and first column; mu_1 = 0 fixes the redundant overall phase, leaving
// exactly 2N−1 extracted phases.
struct GaugeDecomposition {
    TransferMatrix canonical;
    Eigen::VectorXd input_phases;  // mu, input_phases(0) == 0
    Eigen::VectorXd output_phases; // nu
};

// Output amplitudes beta_k = sum_j M_jk alpha_j.
linalg::Vector propagate_coherent(const TransferMatrix& net, const linalg::Vector& amplitudes);

// Canonical gauge fixing. Requires every first-row and first-column modulus
// above 1e−6 times the largest modulus; a smaller coupling makes the
// reference mode unusable and raises numerical_error naming the element
// (relabeling the modes is the remedy).
GaugeDecomposition canonical_gauge(const TransferMatrix& net);

// Wrap an angle into [0, 2pi).
double wrap_phase(double angle);

// Probability that indistinguishable photons entering (i,j) coincide at
// (k,l): |M_ik M_jl + M_il M_jk|² / ((1+δ_ij)(1+δ_kl)). The δ_kl factor
// carries the bunched-output normalization and matches a direct Fock-state
// expansion; for k≠l the expression is the familiar interference formula.
double coincidence_indistinguishable(const TransferMatrix& net,
                                     Eigen::Index i, Eigen::Index j,
                                     Eigen::Index k, Eigen::Index l);

// Distinguishable-photon coincidence probability:
// (|M_ik M_jl|² + |M_il M_jk|²) / (1+δ_kl).
double coincidence_distinguishable(const TransferMatrix& net,
                                   Eigen::Index i, Eigen::Index j,
                                   Eigen::Index k, Eigen::Index l);

TwoPhotonObservables visibility(const TransferMatrix& net,
                                Eigen::Index i, Eigen::Index j,
                                Eigen::Index k, Eigen::Index l);

// Coincidence rate at partial wave-packet overlap gamma in [0,1]:
// gamma·q + (1−gamma)·c. gamma=1 is fully indistinguishable.
double hom_dip(const TransferMatrix& net,
               Eigen::Index i, Eigen::Index j,
               Eigen::Index k, Eigen::Index l,
               double overlap);

} // namespace netchar
