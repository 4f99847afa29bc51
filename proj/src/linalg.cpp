#include "netchar/linalg.hpp"
#include "netchar/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <sstream>

namespace netchar::linalg {

void check_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) {
        throw validation_error(std::string(what) + ": non-finite entry");
    }
}

void check_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw validation_error(std::string(what) + ": non-finite entry");
    }
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream msg;
        msg << "multiply: dimension mismatch (" << a.rows() << "x" << a.cols()
            << ") * (" << b.rows() << "x" << b.cols() << ")";
        throw validation_error(msg.str());
    }
    return a * b;
}

Matrix conjugate_transpose(const Matrix& a) {
    return a.adjoint();
}

double frobenius_norm(const Matrix& a) {
    return a.norm();
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw validation_error("frobenius_distance: dimension mismatch");
    }
    return (a - b).norm();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw validation_error("max_abs_diff: dimension mismatch");
    }
    return (a - b).cwiseAbs().maxCoeff();
}

double trace_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

double deviation_from_unitarity(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw validation_error("deviation_from_unitarity: matrix must be square");
    }
    Matrix d = a * a.adjoint() - Matrix::Identity(a.rows(), a.cols());
    // d is Hermitian, so the singular values are |eigenvalues|.
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw numerical_error("deviation_from_unitarity: eigensolve failed");
    }
    return es.eigenvalues().cwiseAbs().sum();
}

Matrix haar_random_unitary(Eigen::Index n, std::uint64_t seed) {
    if (n < 1) {
        throw validation_error("haar_random_unitary: n must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix g(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(r, c) = Complex(re, im);
        }

    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();

    for (Eigen::Index c = 0; c < n; ++c) {
        const Complex d = r(c, c);
        const double mag = std::abs(d);
        const Complex phase = (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
        q.col(c) *= phase;
    }
    return q;
}

Matrix polar_unitary(const Matrix& v, double rank_tol) {
    if (v.rows() != v.cols()) {
        throw validation_error("polar_unitary: matrix must be square");
    }
    check_finite(v, "polar_unitary");

    Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    if (!(largest > 0.0)) {
        throw numerical_error("polar_unitary: matrix is zero (all singular values vanish)");
    }
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) < rank_tol * largest) {
            std::ostringstream msg;
            msg << "polar_unitary: rank-deficient input, singular value " << i
                << " = " << sv(i) << " is below " << rank_tol
                << " * largest (" << largest << ")";
            throw numerical_error(msg.str());
        }
    }
    return svd.matrixU() * svd.matrixV().adjoint();
}

} // namespace netchar::linalg
