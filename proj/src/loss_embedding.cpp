#include "netchar/loss_embedding.hpp"

#include "netchar/errors.hpp"
#include "netchar/linalg.hpp"

#include <cmath>
#include <string>

namespace netchar {

Eigen::VectorXd transmissions(const TransferMatrix& net, double gain_tol,
                              std::vector<bool>* clamped) {
    const auto n = static_cast<Eigen::Index>(net.modes());
    Eigen::VectorXd eta(n);
    if (clamped)
        clamped->assign(net.modes(), false);
    for (Eigen::Index j = 0; j < n; ++j) {
        double e = net.matrix().row(j).norm();
        if (e > 1.0 + gain_tol)
            throw validation_error("transmissions: input " + std::to_string(j + 1) +
                                   " has row norm " + std::to_string(e) +
                                   " > 1; a passive network cannot amplify");
        if (e > 1.0) {
            e = 1.0;
            if (clamped)
                (*clamped)[static_cast<std::size_t>(j)] = true;
        }
        eta(j) = e;
    }
    return eta;
}

Eigen::VectorXd transmissions_from_record(const MeasurementRecord& record, double gain_tol,
                                          std::vector<bool>* clamped) {
    record.validate();
    Eigen::VectorXd eta(static_cast<Eigen::Index>(record.n));
    if (clamped)
        clamped->assign(record.n, false);
    for (std::size_t j = 0; j < record.n; ++j) {
        const SingleInputRecord& s = record.singles[j];
        double total = 0.0;
        for (double v : s.intensities)
            total += std::max(v, 0.0);
        double e = std::sqrt(total / s.probe_intensity);
        if (e > 1.0 + gain_tol)
            throw validation_error("transmissions_from_record: input " + std::to_string(j + 1) +
                                   " collects " + std::to_string(e * e) +
                                   " of the probe intensity; detector gain is miscalibrated");
        if (e > 1.0) {
            e = 1.0;
            if (clamped)
                (*clamped)[j] = true;
        }
        eta(static_cast<Eigen::Index>(j)) = e;
    }
    return eta;
}

LossEmbedding embed_lossy(const TransferMatrix& net, double gain_tol) {
    const auto n = static_cast<Eigen::Index>(net.modes());

    LossEmbedding out;
    out.eta = transmissions(net, gain_tol, &out.clamped);

    // Normalize rows by their true norm (not the clamped eta) so B has unit
    // row norms exactly and the dilation keeps a unit diagonal.
    out.balanced = net.matrix();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double row_norm = net.matrix().row(j).norm();
        if (row_norm == 0.0)
            throw numerical_error("embed_lossy: input " + std::to_string(j + 1) +
                                  " is completely dark (zero transmission); its balanced row "
                                  "is undefined, remove the disconnected mode first");
        out.balanced.row(j) /= row_norm;
    }

    Eigen::VectorXd etac(n);
    for (Eigen::Index j = 0; j < n; ++j)
        etac(j) = std::sqrt(std::max(0.0, 1.0 - out.eta(j) * out.eta(j)));

    out.dilation = linalg::Matrix::Zero(2 * n, 2 * n);
    out.dilation.topLeftCorner(n, n) = out.eta.asDiagonal() * out.balanced;
    out.dilation.topRightCorner(n, n) =
        (-etac).cast<linalg::Complex>().asDiagonal().toDenseMatrix();
    out.dilation.bottomLeftCorner(n, n) = etac.asDiagonal() * out.balanced;
    out.dilation.bottomRightCorner(n, n) =
        out.eta.cast<linalg::Complex>().asDiagonal().toDenseMatrix();

    out.balanced_deviation = linalg::deviation_from_unitarity(out.balanced);
    out.dilation_deviation = linalg::deviation_from_unitarity(out.dilation);
    return out;
}

UnitaryFit closest_unitary(const linalg::Matrix& m) {
    UnitaryFit fit;
    fit.unitary = linalg::polar_unitary(m);
    fit.distance = linalg::frobenius_distance(m, fit.unitary);
    return fit;
}

} // namespace netchar
