#include "netchar/network.hpp"
#include "netchar/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace netchar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_mode(const TransferMatrix& net, Eigen::Index m, const char* what) {
    if (m < 0 || m >= net.modes()) {
        std::ostringstream msg;
        msg << what << ": mode index " << m << " out of range [0, " << net.modes() << ")";
        throw validation_error(msg.str());
    }
}

} // namespace

double wrap_phase(double angle) {
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0; // fmod can land exactly on 2pi after the add
    return w;
}

TransferMatrix::TransferMatrix(linalg::Matrix m, PhysicalityTolerances tol)
    : m_(std::move(m)), tol_(tol) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        throw validation_error("TransferMatrix: matrix must be square with n >= 1");
    }
    linalg::check_finite(m_, "TransferMatrix");

    const double max_mod = m_.cwiseAbs().maxCoeff();
    if (max_mod > 1.0 + tol_.modulus_slack) {
        std::ostringstream msg;
        msg << "TransferMatrix: modulus " << max_mod << " exceeds 1 + "
            << tol_.modulus_slack << " (sub-unitary physicality)";
        throw validation_error(msg.str());
    }
    Eigen::JacobiSVD<linalg::Matrix> svd(m_);
    const double top = svd.singularValues()(0);
    if (top > 1.0 + tol_.gain_slack) {
        std::ostringstream msg;
        msg << "TransferMatrix: largest singular value " << top << " exceeds 1 + "
            << tol_.gain_slack << " (passive networks cannot amplify)";
        throw validation_error(msg.str());
    }
}

linalg::Complex TransferMatrix::entry(Eigen::Index in, Eigen::Index out) const {
    check_mode(*this, in, "TransferMatrix::entry(in)");
    check_mode(*this, out, "TransferMatrix::entry(out)");
    return m_(in, out);
}

double TransferMatrix::modulus(Eigen::Index in, Eigen::Index out) const {
    return std::abs(entry(in, out));
}

double TransferMatrix::phase(Eigen::Index in, Eigen::Index out) const {
    return wrap_phase(std::arg(entry(in, out)));
}

linalg::Vector propagate_coherent(const TransferMatrix& net, const linalg::Vector& amplitudes) {
    if (amplitudes.size() != net.modes()) {
        std::ostringstream msg;
        msg << "propagate_coherent: input has " << amplitudes.size()
            << " amplitudes, network has " << net.modes() << " modes";
        throw validation_error(msg.str());
    }
    linalg::check_finite(amplitudes, "propagate_coherent");
    return net.matrix().transpose() * amplitudes;
}

GaugeDecomposition canonical_gauge(const TransferMatrix& net) {
    const auto& m = net.matrix();
    const Eigen::Index n = net.modes();
    const double max_mod = m.cwiseAbs().maxCoeff();
    const double floor = 1e-6 * max_mod;

    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(m(0, k)) < floor) {
            std::ostringstream msg;
            msg << "canonical_gauge: first-row element (1," << k + 1
                << ") has modulus " << std::abs(m(0, k))
                << " below the reference threshold " << floor
                << "; permute the output modes and retry";
            throw numerical_error(msg.str());
        }
    }
    for (Eigen::Index j = 1; j < n; ++j) {
        if (std::abs(m(j, 0)) < floor) {
            std::ostringstream msg;
            msg << "canonical_gauge: first-column element (" << j + 1
                << ",1) has modulus " << std::abs(m(j, 0))
                << " below the reference threshold " << floor
                << "; permute the input modes and retry";
            throw numerical_error(msg.str());
        }
    }

    // nu_k = theta_1k; mu_j = theta_j1 − theta_11 with mu_1 = 0.
    Eigen::VectorXd nu(n), mu(n);
    for (Eigen::Index k = 0; k < n; ++k) nu(k) = wrap_phase(std::arg(m(0, k)));
    mu(0) = 0.0;
    for (Eigen::Index j = 1; j < n; ++j)
        mu(j) = wrap_phase(std::arg(m(j, 0)) - nu(0));

    linalg::Matrix canon(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            if (j == 0 || k == 0) {
                canon(j, k) = std::abs(m(j, k));
            } else {
                canon(j, k) = m(j, k) * std::polar(1.0, -(mu(j) + nu(k)));
            }
        }

    return GaugeDecomposition{TransferMatrix(std::move(canon), net.tolerances()), mu, nu};
}

namespace {

void check_pair_indices(const TransferMatrix& net,
                        Eigen::Index i, Eigen::Index j,
                        Eigen::Index k, Eigen::Index l,
                        const char* what) {
    check_mode(net, i, what);
    check_mode(net, j, what);
    check_mode(net, k, what);
    check_mode(net, l, what);
}

} // namespace

double coincidence_indistinguishable(const TransferMatrix& net,
                                     Eigen::Index i, Eigen::Index j,
                                     Eigen::Index k, Eigen::Index l) {
    check_pair_indices(net, i, j, k, l, "coincidence_indistinguishable");
    const auto& m = net.matrix();
    const linalg::Complex amp = m(i, k) * m(j, l) + m(i, l) * m(j, k);
    const double norm = (i == j ? 2.0 : 1.0) * (k == l ? 2.0 : 1.0);
    return std::norm(amp) / norm;
}

double coincidence_distinguishable(const TransferMatrix& net,
                                   Eigen::Index i, Eigen::Index j,
                                   Eigen::Index k, Eigen::Index l) {
    check_pair_indices(net, i, j, k, l, "coincidence_distinguishable");
    const auto& m = net.matrix();
    const double c = std::norm(m(i, k) * m(j, l)) + std::norm(m(i, l) * m(j, k));
    return c / (k == l ? 2.0 : 1.0);
}

TwoPhotonObservables visibility(const TransferMatrix& net,
                                Eigen::Index i, Eigen::Index j,
                                Eigen::Index k, Eigen::Index l) {
    TwoPhotonObservables obs;
    obs.indistinguishable = coincidence_indistinguishable(net, i, j, k, l);
    obs.distinguishable = coincidence_distinguishable(net, i, j, k, l);
    if (obs.distinguishable > 1e-12) {
        obs.visibility = (obs.distinguishable - obs.indistinguishable) / obs.distinguishable;
    }
    return obs;
}

double hom_dip(const TransferMatrix& net,
               Eigen::Index i, Eigen::Index j,
               Eigen::Index k, Eigen::Index l,
               double overlap) {
    if (!(overlap >= 0.0 && overlap <= 1.0)) {
        std::ostringstream msg;
        msg << "hom_dip: overlap " << overlap << " outside [0, 1]";
        throw validation_error(msg.str());
    }
    const double q = coincidence_indistinguishable(net, i, j, k, l);
    const double c = coincidence_distinguishable(net, i, j, k, l);
    return overlap * q + (1.0 - overlap) * c;
}

} // namespace netchar
