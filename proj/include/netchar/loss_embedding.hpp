#pragma once

#include "netchar/network.hpp"
#include "netchar/virtual_lab.hpp"

#include <vector>

namespace netchar {

// Dilation of a lossy N-mode network to 2N modes: M is split as
// diag(eta) * B with eta_j the root transmission of input j (the row norm)
// and B the balanced matrix with unit row norms. The dilation
//
//           [ diag(eta) B   -diag(etac) ]
//   V  =    [ diag(etac) B   diag(eta)  ] ,   etac_j = sqrt(1 - eta_j^2),
//
// has unit diagonal of V V^dagger by construction; V is unitary exactly when
// B has orthonormal rows, i.e. when loss is path independent.
struct LossEmbedding {
    Eigen::VectorXd eta;          // per-input root transmission, in [0, 1]
    linalg::Matrix balanced;      // B = diag(1/eta) M
    linalg::Matrix dilation;      // V, 2N x 2N
    double balanced_deviation = 0.0; // trace norm of B B^dagger - I
    double dilation_deviation = 0.0; // trace norm of V V^dagger - I
    std::vector<bool> clamped;    // rows where eta was clamped down to 1
};

// Row norms of the transfer matrix. Values in (1, 1 + gain_tol] are treated
// as noise-inflated estimates of a lossless row and clamped to 1; larger
// values indicate gain and are rejected.
Eigen::VectorXd transmissions(const TransferMatrix& net, double gain_tol,
                              std::vector<bool>* clamped = nullptr);

// Same estimate straight from measured single-input intensities:
// eta_j = sqrt(sum over outputs of I_jk / I), no reconstruction needed.
Eigen::VectorXd transmissions_from_record(const MeasurementRecord& record, double gain_tol,
                                          std::vector<bool>* clamped = nullptr);

LossEmbedding embed_lossy(const TransferMatrix& net, double gain_tol = 1e-3);

struct UnitaryFit {
    linalg::Matrix unitary;
    double distance = 0.0; // Frobenius distance to the input matrix
};

// Nearest unitary in Frobenius norm, the unitary polar factor.
UnitaryFit closest_unitary(const linalg::Matrix& m);

} // namespace netchar
