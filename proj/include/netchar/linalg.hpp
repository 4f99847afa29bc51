#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

namespace netchar::linalg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Throws validation_error if any entry is NaN or infinite.
void check_finite(const Matrix& a, const char* what);
void check_finite(const Vector& v, const char* what);

// Matrix product with an explicit dimension check.
Matrix multiply(const Matrix& a, const Matrix& b);

// Entry (j,k) of the output is the conjugate of entry (k,j) of the input.
Matrix conjugate_transpose(const Matrix& a);

double frobenius_norm(const Matrix& a);
double frobenius_distance(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Nuclear norm: sum of singular values.
double trace_norm(const Matrix& a);

// Trace norm of (a a† − I). Zero iff a is unitary. Requires a square.
double deviation_from_unitarity(const Matrix& a);

// n×n unitary drawn from the Haar measure, deterministic for a fixed seed.
// Gaussian matrix, QR factorization, then each column of the orthogonal
// factor is rescaled by the phase of the matching diagonal entry of the
// triangular factor so the distribution is Haar rather than QR-biased.
Matrix haar_random_unitary(Eigen::Index n, std::uint64_t seed);

// Closest unitary to v in Frobenius distance (polar factor), computed from
// the singular value factorization by replacing all singular values with 1.
// Throws numerical_error if the smallest singular value falls below
// rank_tol times the largest.
Matrix polar_unitary(const Matrix& v, double rank_tol = 1e-10);

} // namespace netchar::linalg
