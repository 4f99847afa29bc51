#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <netchar/errors.hpp>
#include <netchar/linalg.hpp>

#include "support/fixtures.hpp"

#include <cmath>

using namespace netchar;
using namespace netchar::testing;

TEST_CASE("multiply handles identity and diagonal products") {
    linalg::Matrix a(2, 2);
    a << 2.0, 0.0, 0.0, 3.0;
    linalg::Matrix b(2, 2);
    b << 5.0, 0.0, 0.0, 7.0;

    const linalg::Matrix id = linalg::Matrix::Identity(2, 2);
    CHECK(linalg::max_abs_diff(linalg::multiply(id, a), a) == 0.0);

    const linalg::Matrix ab = linalg::multiply(a, b);
    CHECK(ab(0, 0) == linalg::Complex(10.0, 0.0));
    CHECK(ab(1, 1) == linalg::Complex(21.0, 0.0));
    CHECK(std::abs(ab(0, 1)) == 0.0);
}

TEST_CASE("multiply is associative on random factors") {
    const linalg::Matrix a = linalg::haar_random_unitary(3, 11);
    const linalg::Matrix b = 0.7 * linalg::haar_random_unitary(3, 12);
    const linalg::Matrix c = linalg::haar_random_unitary(3, 13);
    const linalg::Matrix left = linalg::multiply(linalg::multiply(a, b), c);
    const linalg::Matrix right = linalg::multiply(a, linalg::multiply(b, c));
    CHECK(linalg::max_abs_diff(left, right) < 1e-12);
}

TEST_CASE("multiply rejects mismatched dimensions") {
    CHECK_THROWS_AS(linalg::multiply(linalg::Matrix::Identity(2, 2),
                                     linalg::Matrix::Identity(3, 3)),
                    validation_error);
}

TEST_CASE("conjugate_transpose flips and conjugates") {
    linalg::Matrix sym(2, 2);
    sym << 1.0, 2.0, 2.0, 5.0;
    CHECK(linalg::max_abs_diff(linalg::conjugate_transpose(sym), sym) == 0.0);

    linalg::Matrix ii(1, 1);
    ii << linalg::Complex(0.0, 1.0);
    CHECK(linalg::conjugate_transpose(ii)(0, 0) == linalg::Complex(0.0, -1.0));
}

TEST_CASE("deviation_from_unitarity hits known values") {
    CHECK(linalg::deviation_from_unitarity(linalg::haar_random_unitary(5, 3)) <= 1e-12);

    // Zero matrix: the deviation is the trace norm of -I.
    CHECK(linalg::deviation_from_unitarity(linalg::Matrix::Zero(4, 4)) == doctest::Approx(4.0));

    // 0.5*I: singular values of (0.25 - 1)*I are 0.75 twice.
    CHECK(linalg::deviation_from_unitarity(0.5 * linalg::Matrix::Identity(2, 2)) ==
          doctest::Approx(1.5));

    CHECK_THROWS_AS(linalg::deviation_from_unitarity(linalg::Matrix::Zero(2, 3)),
                    validation_error);
}

TEST_CASE("trace_norm sums singular values") {
    CHECK(linalg::trace_norm(linalg::Matrix::Zero(3, 3)) == doctest::Approx(0.0));
    CHECK(linalg::trace_norm(linalg::Matrix::Identity(3, 3)) == doctest::Approx(3.0));
    linalg::Matrix d(2, 2);
    d << -2.0, 0.0, 0.0, 0.5;
    CHECK(linalg::trace_norm(d) == doctest::Approx(2.5));
}

TEST_CASE("haar_random_unitary is unitary, seeded, and phase-covering") {
    const linalg::Matrix one = linalg::haar_random_unitary(1, 99);
    CHECK(std::abs(std::abs(one(0, 0)) - 1.0) < 1e-14);

    const linalg::Matrix u = linalg::haar_random_unitary(6, 42);
    CHECK(linalg::deviation_from_unitarity(u) <= 1e-10);

    const linalg::Matrix again = linalg::haar_random_unitary(6, 42);
    CHECK(linalg::max_abs_diff(u, again) == 0.0);

    const linalg::Matrix other = linalg::haar_random_unitary(6, 43);
    CHECK(linalg::max_abs_diff(u, other) > 1e-3);
}

TEST_CASE("haar_random_unitary columns are not QR-biased") {
    // With the diagonal phase correction the distribution of any entry's
    // phase is uniform; a crude histogram over many draws should not pile
    // into a half-plane.
    int positive_real = 0;
    const int draws = 200;
    for (int s = 0; s < draws; ++s) {
        const linalg::Matrix u = linalg::haar_random_unitary(2, 1000 + static_cast<std::uint64_t>(s));
        if (u(1, 1).real() > 0.0)
            ++positive_real;
    }
    CHECK(positive_real > draws / 4);
    CHECK(positive_real < 3 * draws / 4);
}

TEST_CASE("polar_unitary returns the unitary factor") {
    const linalg::Matrix v = linalg::haar_random_unitary(4, 7);
    CHECK(linalg::max_abs_diff(linalg::polar_unitary(v), v) < 1e-12);

    CHECK(linalg::max_abs_diff(linalg::polar_unitary(0.5 * linalg::Matrix::Identity(3, 3)),
                               linalg::Matrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("polar_unitary recovers a known positive-times-unitary factorization") {
    const Eigen::Index n = 4;
    const linalg::Matrix w = linalg::haar_random_unitary(n, 21);
    // Positive definite factor: identity plus a scaled Gram matrix.
    const linalg::Matrix g = linalg::haar_random_unitary(n, 22) +
                             0.5 * linalg::haar_random_unitary(n, 23);
    const linalg::Matrix h =
        linalg::Matrix::Identity(n, n) + 0.3 * (g * linalg::conjugate_transpose(g));
    const linalg::Matrix v = h * w;
    CHECK(linalg::max_abs_diff(linalg::polar_unitary(v), w) < 1e-10);
}

TEST_CASE("polar_unitary names the offending singular value when rank-deficient") {
    linalg::Matrix degenerate(2, 2);
    degenerate << 1.0, 0.0, 0.0, 0.0;
    bool threw = false;
    try {
        static_cast<void>(linalg::polar_unitary(degenerate));
    } catch (const numerical_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("singular value") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("check_finite rejects NaN and infinity") {
    linalg::Matrix bad = linalg::Matrix::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(linalg::check_finite(bad, "test"), validation_error);
    linalg::Vector v(1);
    v(0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(linalg::check_finite(v, "test"), validation_error);
}

TEST_CASE("frobenius helpers agree with hand values") {
    linalg::Matrix a(2, 2);
    a << 3.0, 0.0, 0.0, 4.0;
    CHECK(linalg::frobenius_norm(a) == doctest::Approx(5.0));
    CHECK(linalg::frobenius_distance(a, linalg::Matrix::Zero(2, 2)) == doctest::Approx(5.0));
    CHECK(linalg::max_abs_diff(a, linalg::Matrix::Zero(2, 2)) == doctest::Approx(4.0));
}
