#include <cmath>

#include "doctest.h"
#include "schurlab/spectra.hpp"

using namespace schurlab;
using namespace schurlab::spectra;

namespace {

DenseMatrix diag2(double a, double b) {
    DenseMatrix m(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// Bbar = (B B^t)^{-1} B, so that Bbar^t is the minimum-norm right inverse.
DenseMatrix min_norm_right_inverse(const DenseMatrix& b) {
    const DenseMatrix gram = matmul(b, transpose(b));
    return cholesky_solve(gram, b);
}

} // namespace

TEST_CASE("schur spectrum: closed form for A = diag(2, 3), B = [1 1]") {
    DenseMatrix b(1, 2);
    b(0, 0) = 1.0;
    b(0, 1) = 1.0;
    const SaddleSystem sys = validate(diag2(2, 3), b, {0.0, 0.0}, {0.0});
    const auto [direct, oracle] = eigs_schur(sys);
    CHECK(direct.lambda_min == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(direct.lambda_max == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(oracle.lambda_min == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
    CHECK(oracle.lambda_max == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("schur spectrum: both routes agree across seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SaddleSystem sys = random_spd_system(7, 3, seed);
        const auto [direct, oracle] = eigs_schur(sys);
        const double s = std::max(1.0, direct.lambda_max);
        CHECK(std::abs(direct.lambda_min - oracle.lambda_min) < 1e-8 * s);
        CHECK(std::abs(direct.lambda_max - oracle.lambda_max) < 1e-8 * s);

        const auto [lower, upper] = bounds_cor_schur(sys);
        CHECK(direct.lambda_min >= lower * (1.0 - 1e-10));
        CHECK(direct.lambda_max <= upper * (1.0 + 1e-10));
    }
}

TEST_CASE("preconditioned schur spectrum: routes agree and scaling acts inversely") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SaddleSystem sys = random_spd_system(7, 3, seed);
        const DenseMatrix L = random_spd(3, seed + 1000);
        const auto [direct, oracle] = eigs_schur_preconditioned(sys, L);
        const double s = std::max(1.0, direct.lambda_max);
        CHECK(std::abs(direct.lambda_min - oracle.lambda_min) < 1e-8 * s);
        CHECK(std::abs(direct.lambda_max - oracle.lambda_max) < 1e-8 * s);

        // Scaling L by c scales the whole preconditioned spectrum by c.
        const auto [d2, o2] = eigs_schur_preconditioned(sys, scale(L, 4.0));
        CHECK(d2.lambda_min == doctest::Approx(4.0 * direct.lambda_min).epsilon(1e-9));
        CHECK(d2.lambda_max == doctest::Approx(4.0 * direct.lambda_max).epsilon(1e-9));
    }
}

TEST_CASE("right inverse preconditioner: unit floor and A-norm identity") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const SaddleSystem sys = random_spd_system(8, 3, seed);
        const DenseMatrix bbar = min_norm_right_inverse(sys.B);
        const SpectralReport rep = eigs_right_inverse_preconditioner(sys, bbar);
        CHECK(rep.lambda_min >= 1.0 - 1e-9);
        CHECK(rep.lambda_max >= rep.lambda_min);

        // When B has a true inverse (m = n), L = Bbar A Bbar^t makes LS
        // similar to the identity.
        const SaddleSystem square = random_spd_system(4, 4, seed);
        const DenseMatrix inv = min_norm_right_inverse(square.B);
        const SpectralReport sq = eigs_right_inverse_preconditioner(square, inv);
        CHECK(sq.lambda_min == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(sq.lambda_max == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("right inverse preconditioner rejects a non right inverse") {
    const SaddleSystem sys = random_spd_system(6, 2, 5);
    const DenseMatrix bogus = scale(min_norm_right_inverse(sys.B), 1.5);
    CHECK_THROWS_AS(eigs_right_inverse_preconditioner(sys, bogus), NotRightInverse);
}

TEST_CASE("projected schur spectrum: routes agree across seeds") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const SaddleSystem sys = random_semispd_system(9, 4, 2, seed);
        const auto [direct, oracle] = eigs_projected_schur(sys);
        const double s = std::max(1.0, direct.lambda_max);
        CHECK(direct.lambda_min > 0.0);
        CHECK(std::abs(direct.lambda_min - oracle.lambda_min) < 1e-8 * s);
        CHECK(std::abs(direct.lambda_max - oracle.lambda_max) < 1e-8 * s);
    }
}

TEST_CASE("projected right inverse preconditioner keeps the unit floor") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SaddleSystem sys = random_semispd_system(9, 4, 2, seed);
        const DualReduction red = projected_schur(sys);
        const DenseMatrix bbar = min_norm_right_inverse(sys.B);
        const DenseMatrix L = projected_right_inverse_preconditioner(sys, red, bbar);
        const SpectralReport rep = eigs_projected_schur_preconditioned(sys, red, L, true);
        CHECK(rep.lambda_min >= 1.0 - 1e-9);

        const auto [direct, oracle] =
            eigs_projected_schur_preconditioned_routes(sys, red, L);
        const double s = std::max(1.0, direct.lambda_max);
        CHECK(std::abs(direct.lambda_min - oracle.lambda_min) < 1e-8 * s);
        CHECK(std::abs(direct.lambda_max - oracle.lambda_max) < 1e-8 * s);
    }
}

TEST_CASE("preconditioned spectrum matches the generalized eigenproblem") {
    // Independent oracle: eigenvalues of L S equal those of the pencil
    // S q = lambda L^{-1} q, i.e. of L^{1/2} S L^{1/2}.
    const SaddleSystem sys = random_spd_system(6, 3, 9);
    const DenseMatrix L = random_spd(3, 99);
    const auto [direct, oracle] = eigs_schur_preconditioned(sys, L);
    const DenseMatrix ls = matmul(L, schur(sys).S_or_S0);
    // trace is similarity invariant
    double tr = 0.0;
    for (int i = 0; i < 3; ++i) tr += ls(i, i);
    const DenseMatrix lh = spd_sqrt(L);
    const SymEig eig = sym_eig(matmul(matmul(lh, schur(sys).S_or_S0), lh));
    double tr_sym = 0.0;
    for (double l : eig.eigenvalues) tr_sym += l;
    CHECK(tr == doctest::Approx(tr_sym).epsilon(1e-10));
    CHECK(direct.lambda_min == doctest::Approx(eig.eigenvalues.front()).epsilon(1e-10));
    CHECK(direct.lambda_max == doctest::Approx(eig.eigenvalues.back()).epsilon(1e-10));
}
