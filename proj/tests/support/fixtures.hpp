#pragma once

#include <netchar/linalg.hpp>
#include <netchar/network.hpp>
#include <netchar/virtual_lab.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace netchar::testing {

// (1/sqrt(2)) [[1, 1], [1, -1]]
inline linalg::Matrix splitter50() {
    linalg::Matrix m(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    m << s, s, s, -s;
    return m;
}

// Discrete Fourier matrix, entries omega^{jk}/sqrt(n): every modulus is
// exactly 1/sqrt(n), handy as a fully-coupled unitary.
inline linalg::Matrix dft(Eigen::Index n) {
    linalg::Matrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            m(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                 2.0 * std::numbers::pi * static_cast<double>(j * k) /
                                     static_cast<double>(n));
    return m;
}

// Haar unitary with seeded per-input amplitude transmissions in [lo, hi).
inline linalg::Matrix random_per_input_loss(Eigen::Index n, std::uint64_t seed, double lo = 0.5,
                                            double hi = 0.95) {
    linalg::Matrix m = linalg::haar_random_unitary(n, seed);
    std::mt19937_64 rng(seed ^ 0x10551055u);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (Eigen::Index j = 0; j < n; ++j)
        m.row(j) *= dist(rng);
    return m;
}

// Attenuation between two unitary layers: loss that no per-input factor can
// absorb.
inline linalg::Matrix random_path_dependent_loss(Eigen::Index n, std::uint64_t seed,
                                                 double lo = 0.5, double hi = 0.95) {
    const linalg::Matrix u1 = linalg::haar_random_unitary(n, seed);
    const linalg::Matrix u2 = linalg::haar_random_unitary(n, seed ^ 0xabcdef12u);
    std::mt19937_64 rng(seed ^ 0x5a5a5a5au);
    std::uniform_real_distribution<double> dist(lo, hi);
    linalg::Matrix d = linalg::Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        d(j, j) = dist(rng);
    return u1 * d * u2;
}

// Random diagonal-phase matrices for gauge-invariance checks.
inline linalg::Matrix random_diagonal_phases(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
    linalg::Matrix d = linalg::Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        d(j, j) = std::polar(1.0, dist(rng));
    return d;
}

// Difference of two angles wrapped into [-pi, pi).
inline double wrapped_delta(double a, double b) {
    double d = std::fmod(a - b, 2.0 * std::numbers::pi);
    if (d < -std::numbers::pi)
        d += 2.0 * std::numbers::pi;
    if (d >= std::numbers::pi)
        d -= 2.0 * std::numbers::pi;
    return d;
}

inline NoiseModel quiet() {
    return NoiseModel{};
}

inline NoiseModel noisy(double intensity_sigma, double phase_jitter, std::uint64_t seed) {
    NoiseModel n;
    n.intensity_sigma = intensity_sigma;
    n.phase_jitter_sigma = phase_jitter;
    n.seed = seed;
    return n;
}

} // namespace netchar::testing
