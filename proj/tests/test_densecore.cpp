#include <cmath>

#include "doctest.h"
#include "schurlab/densecore.hpp"
#include "schurlab/saddle.hpp"

using namespace schurlab;

namespace {

DenseMatrix diag(const Vector& d) {
    DenseMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[i];
    return m;
}

DenseMatrix path_laplacian(int n) {
    DenseMatrix l(n, n);
    for (int i = 0; i < n - 1; ++i) {
        l(i, i) += 1.0;
        l(i + 1, i + 1) += 1.0;
        l(i, i + 1) -= 1.0;
        l(i + 1, i) -= 1.0;
    }
    return l;
}

// Random symmetric PSD with prescribed rank deficiency.
DenseMatrix random_psd(int n, int null_dim, std::uint64_t seed) {
    const DenseMatrix r = random_matrix(n - null_dim, n, seed);
    return matmul(transpose(r), r);
}

void check_sym_eig_invariants(const DenseMatrix& a) {
    const SymEig eig = sym_eig(a);
    const int n = a.rows();
    const DenseMatrix q = eig.eigenvectors;
    const DenseMatrix qtq = matmul(transpose(q), q);
    CHECK(frob_norm(add(qtq, DenseMatrix::identity(n), -1.0)) <= 1e-10 * n);
    DenseMatrix recon(n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) recon(i, j) += q(i, k) * eig.eigenvalues[k] * q(j, k);
    CHECK(frob_norm(add(recon, a, -1.0)) <= 1e-10 * std::max(1.0, frob_norm(a)));
    for (std::size_t k = 1; k < eig.eigenvalues.size(); ++k)
        CHECK(eig.eigenvalues[k - 1] <= eig.eigenvalues[k]);
}

} // namespace

TEST_CASE("sym_eig: identity and diagonal cases") {
    SymEig eig = sym_eig(DenseMatrix::identity(3));
    for (double l : eig.eigenvalues) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));

    eig = sym_eig(diag({3.0, 1.0, 2.0}));
    CHECK(eig.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sym_eig: path-3 Laplacian spectrum (0, 1, 3)") {
    const SymEig eig = sym_eig(path_laplacian(3));
    CHECK(eig.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sym_eig: invariants on random symmetric matrices") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const int n = 3 + static_cast<int>(seed % 10);
        DenseMatrix r = random_matrix(n, n, seed);
        DenseMatrix a = add(r, transpose(r));
        check_sym_eig_invariants(a);
    }
}

TEST_CASE("sym_eig: large path Laplacian against the closed-form spectrum") {
    // n = 300 exercises the tridiagonalization path; eigenvalues are
    // 2 - 2 cos(k pi / n).
    const int n = 300;
    const SymEig eig = sym_eig(path_laplacian(n));
    for (int k = 0; k < n; ++k) {
        const double expected = 2.0 - 2.0 * std::cos(k * M_PI / n);
        CHECK(eig.eigenvalues[k] == doctest::Approx(expected).epsilon(1e-9));
    }
    check_sym_eig_invariants(path_laplacian(n));
}

TEST_CASE("sym_eig: rejects nonsymmetric input") {
    DenseMatrix a(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(sym_eig(a), NotSymmetric);
}

TEST_CASE("cholesky_solve: trivial cases") {
    const DenseMatrix x = cholesky_solve(DenseMatrix::identity(2), DenseMatrix::identity(2));
    CHECK(frob_norm(add(x, DenseMatrix::identity(2), -1.0)) <= 1e-14);

    const Vector sol = cholesky_solve(diag({2.0, 4.0}), Vector{2.0, 4.0});
    CHECK(sol[0] == doctest::Approx(1.0));
    CHECK(sol[1] == doctest::Approx(1.0));
}

TEST_CASE("cholesky_solve: residual check on a random SPD system") {
    const DenseMatrix a = random_spd(8, 7);
    Vector e1(8, 0.0);
    e1[0] = 1.0;
    const Vector x = cholesky_solve(a, e1);
    Vector r = matvec(a, x);
    r[0] -= 1.0;
    CHECK(norm2(r) <= 1e-10);
}

TEST_CASE("cholesky_solve: rejects indefinite matrices") {
    DenseMatrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = a(1, 0) = 2.0;
    a(1, 1) = 1.0;
    CHECK_THROWS_AS(cholesky_solve(a, DenseMatrix::identity(2)), NotSPD);
}

TEST_CASE("pseudoinverse: diagonal and identity cases") {
    const DenseMatrix p = pseudoinverse(diag({2.0, 0.0}), 1e-12);
    CHECK(p(0, 0) == doctest::Approx(0.5));
    CHECK(p(1, 1) == doctest::Approx(0.0));
    CHECK(p(0, 1) == doctest::Approx(0.0));

    const DenseMatrix q = pseudoinverse(DenseMatrix::identity(4), 1e-12);
    CHECK(frob_norm(add(q, DenseMatrix::identity(4), -1.0)) <= 1e-12);
}

TEST_CASE("pseudoinverse: path-3 Laplacian inverts the (0,1,3) spectrum") {
    const DenseMatrix p = pseudoinverse(path_laplacian(3), 1e-10);
    const SymEig eig = sym_eig(p);
    CHECK(eig.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pseudoinverse: Moore-Penrose identities on random PSD inputs") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const int n = 3 + static_cast<int>(seed % 10);
        const int null_dim = 1 + static_cast<int>(seed % 2);
        const DenseMatrix a = random_psd(n, null_dim, seed);
        const DenseMatrix ap = pseudoinverse(a, 1e-10);
        const double scale = std::max(1.0, frob_norm(a));

        const DenseMatrix aapa = matmul(matmul(a, ap), a);
        CHECK(frob_norm(add(aapa, a, -1.0)) <= 1e-9 * scale);
        const DenseMatrix apaap = matmul(matmul(ap, a), ap);
        CHECK(frob_norm(add(apaap, ap, -1.0)) <= 1e-9 * std::max(1.0, frob_norm(ap)));
        const DenseMatrix aap = matmul(a, ap);
        CHECK(symmetry_defect(aap) <= 1e-9 * std::max(1.0, frob_norm(aap)));
        const DenseMatrix apa = matmul(ap, a);
        CHECK(symmetry_defect(apa) <= 1e-9 * std::max(1.0, frob_norm(apa)));
    }
}

TEST_CASE("pseudoinverse: rejects indefinite input") {
    CHECK_THROWS_AS(pseudoinverse(diag({1.0, -1.0}), 1e-10), Indefinite);
}

TEST_CASE("rank: simple cases") {
    CHECK(rank(DenseMatrix(3, 3)) == 0);
    CHECK(rank(DenseMatrix::identity(5)) == 5);
    DenseMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 2.0;
    m(1, 1) = 4.0;
    CHECK(rank(m, 1e-10) == 1);
}

TEST_CASE("null_basis: simple cases") {
    CHECK(null_basis(DenseMatrix::identity(3), 1e-10).cols() == 0);

    const DenseMatrix n = null_basis(path_laplacian(3), 1e-10);
    REQUIRE(n.cols() == 1);
    const double s = n(0, 0) > 0 ? 1.0 : -1.0;
    for (int i = 0; i < 3; ++i) CHECK(s * n(i, 0) == doctest::Approx(1.0 / std::sqrt(3.0)));

    const DenseMatrix n2 = null_basis(diag({0.0, 0.0, 5.0}), 1e-10);
    REQUIRE(n2.cols() == 2);
    for (int j = 0; j < 2; ++j) CHECK(n2(2, j) == doctest::Approx(0.0));
}

TEST_CASE("rank/nullity consistency on square symmetric inputs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int n = 4 + static_cast<int>(seed % 6);
        const DenseMatrix a = random_psd(n, 1 + static_cast<int>(seed % 3), seed);
        CHECK(rank(a, 1e-10) + null_basis(a, 1e-10).cols() == n);
    }
}

TEST_CASE("constrained_min: examples") {
    DenseMatrix b(1, 2);
    b(0, 0) = 1.0;
    ConstrainedMin cm = constrained_min(DenseMatrix::identity(2), b, Vector{1.0});
    CHECK(cm.minimizer[0] == doctest::Approx(1.0));
    CHECK(cm.minimizer[1] == doctest::Approx(0.0));
    CHECK(cm.value == doctest::Approx(1.0));

    DenseMatrix b2(1, 2);
    b2(0, 0) = 1.0;
    b2(0, 1) = 1.0;
    // One-parameter calculus oracle on v = (t, 1-t): minimize t^2 + 4(1-t)^2.
    cm = constrained_min(diag({1.0, 4.0}), b2, Vector{1.0});
    CHECK(cm.minimizer[0] == doctest::Approx(0.8));
    CHECK(cm.minimizer[1] == doctest::Approx(0.2));
    CHECK(cm.value == doctest::Approx(0.8));

    cm = constrained_min(DenseMatrix::identity(3), DenseMatrix::identity(3), Vector{1.0, 2.0, 3.0});
    CHECK(cm.value == doctest::Approx(14.0));
}

TEST_CASE("constrained_min: value equals (S^{-1} q, q) for SPD A") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int n = 5 + static_cast<int>(seed % 5);
        const int m = 2 + static_cast<int>(seed % 3);
        const DenseMatrix a = random_spd(n, seed);
        const DenseMatrix b = random_matrix(m, n, seed + 1000);
        const DenseMatrix s = matmul(b, cholesky_solve(a, transpose(b)));
        for (int j = 0; j < m; ++j) {
            Vector q(m, 0.0);
            q[j] = 1.0;
            const double expected = dot(cholesky_solve(s, q), q);
            const double got = constrained_min(a, b, q).value;
            CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("constrained_min: singular KKT flags violated well-posedness") {
    DenseMatrix b(1, 2);
    b(0, 1) = 1.0;
    CHECK_THROWS_AS(constrained_min(diag({0.0, 1.0}), b, Vector{1.0}), SingularKKT);
}

TEST_CASE("spd_sqrt squares back to the input") {
    const DenseMatrix a = random_spd(7, 21);
    const DenseMatrix r = spd_sqrt(a);
    CHECK(frob_norm(add(matmul(r, r), a, -1.0)) <= 1e-9 * frob_norm(a));
    const DenseMatrix ri = spd_inv_sqrt(a);
    CHECK(frob_norm(add(matmul(matmul(ri, a), ri), DenseMatrix::identity(7), -1.0)) <= 1e-9);
}

TEST_CASE("sym_eigenvalues matches sym_eig on both solver branches") {
    // 200 exceeds the Jacobi cutoff, so this exercises the tridiagonal path.
    for (int n : {40, 200}) {
        const DenseMatrix a = random_spd(n, 100 + n);
        const Vector fast = sym_eigenvalues(a);
        const SymEig full = sym_eig(a);
        REQUIRE(fast.size() == full.eigenvalues.size());
        for (int i = 0; i < n; ++i)
            CHECK(fast[i] == doctest::Approx(full.eigenvalues[i]).epsilon(1e-9));
    }
}
