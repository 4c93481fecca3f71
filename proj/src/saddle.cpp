#include "schurlab/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "schurlab/mmio.hpp"
#include "schurlab/rng.hpp"

namespace schurlab {

namespace {

DenseMatrix symmetrize(const DenseMatrix& m) {
    DenseMatrix s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

Vector sub(const Vector& a, const Vector& b) {
    Vector c(a);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

} // namespace

double SaddleSystem::scale() const {
    return std::max({1.0, norm2(f), norm2(g), frob_norm(A), frob_norm(B)});
}

SaddleSystem validate(const DenseMatrix& A, const DenseMatrix& B, const Vector& f, const Vector& g) {
    const int n = A.rows();
    const int m = B.rows();
    if (A.cols() != n) throw Error("validate: A is not square");
    if (B.cols() != n) throw Error("validate: B has wrong column count");
    if (static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != m)
        throw Error("validate: data size mismatch");
    if (m > n) throw BNotSurjective("validate: more constraints than unknowns");
    if (!is_symmetric(A)) throw NotSymmetric("validate: A is not symmetric");

    SaddleSystem sys;
    sys.A = symmetrize(A);
    sys.B = B;
    sys.f = f;
    sys.g = g;

    const SymEig eig = sym_eig(sys.A);
    sys.lambda_min_A = eig.eigenvalues.front();
    sys.lambda_max_A = eig.eigenvalues.back();
    if (sys.lambda_max_A <= 0.0) throw NotPSD("validate: A has no positive eigenvalue");
    if (sys.lambda_min_A < -1e-10 * sys.lambda_max_A)
        throw NotPSD("validate: A has a negative eigenvalue");
    sys.lambda_ratio = sys.lambda_min_A / sys.lambda_max_A;
    sys.kind = (sys.lambda_min_A > 1e-10 * sys.lambda_max_A) ? SystemKind::SPD : SystemKind::SemiSPD;

    if (rank(B) != m) throw BNotSurjective("validate: B is not surjective");

    if (sys.kind == SystemKind::SemiSPD) {
        // Well-posedness: N(A) and N(B) intersect trivially, i.e. the
        // stacked operator [A; B] has full column rank.
        DenseMatrix stacked(n + m, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) stacked(i, j) = sys.A(i, j);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) stacked(n + i, j) = B(i, j);
        if (rank(stacked, 1e-10) != n) throw IllPosed("validate: N(A) and N(B) intersect");
    }
    return sys;
}

DualReduction schur(const SaddleSystem& sys) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("schur: system is not SPD");
    const CholeskyFactor chol(sys.A);
    DualReduction red;
    red.kind = SystemKind::SPD;
    red.S_or_S0 = symmetrize(matmul(sys.B, chol.solve(transpose(sys.B))));
    red.d_or_d0 = sub(matvec(sys.B, chol.solve(sys.f)), sys.g);
    red.P = DenseMatrix::identity(sys.m());
    red.W0_basis = DenseMatrix::identity(sys.m());
    red.N = DenseMatrix(sys.n(), 0);
    return red;
}

DualReduction projected_schur(const SaddleSystem& sys, double rank_tol) {
    if (sys.kind != SystemKind::SemiSPD)
        throw Error("projected_schur: system is SPD; use schur()");
    const int m = sys.m();

    DualReduction red;
    red.kind = SystemKind::SemiSPD;
    red.N = null_basis(sys.A, rank_tol);
    const int k = red.N.cols();

    const DenseMatrix BN = matmul(sys.B, red.N);
    const DenseMatrix G = matmul(transpose(BN), BN);
    DenseMatrix Ginv;
    try {
        Ginv = lu_solve(G, DenseMatrix::identity(k));
    } catch (const SingularKKT&) {
        throw IllPosed("projected_schur: B restricted to N(A) is not injective");
    }

    red.P = symmetrize(add(DenseMatrix::identity(m),
                           matmul(matmul(BN, Ginv), transpose(BN)), -1.0));

    // Orthonormal basis of range(P): eigenvectors of the projector with
    // eigenvalue 1.
    const SymEig peig = sym_eig(red.P);
    red.W0_basis = DenseMatrix(m, m - k);
    {
        int col = 0;
        for (int j = 0; j < m; ++j) {
            if (peig.eigenvalues[j] > 0.5) {
                for (int i = 0; i < m; ++i) red.W0_basis(i, col) = peig.eigenvectors(i, j);
                ++col;
            }
        }
        if (col != m - k) throw IllPosed("projected_schur: unexpected projector rank");
    }

    red.A_pinv = pseudoinverse(sys.A, rank_tol);
    const DenseMatrix S = symmetrize(matmul(matmul(sys.B, red.A_pinv), transpose(sys.B)));
    red.eta = matvec(Ginv, matvec_transposed(red.N, sys.f));
    const Vector d = sub(matvec(sys.B, matvec(red.A_pinv, sys.f)), sys.g);

    const DenseMatrix PS = matmul(red.P, S);
    const DenseMatrix S0_full = matmul(PS, transpose(red.P));
    red.S_or_S0 = symmetrize(matmul(matmul(transpose(red.W0_basis), S0_full), red.W0_basis));

    const Vector shift = matvec(PS, matvec(BN, red.eta));
    red.d_or_d0 = matvec_transposed(red.W0_basis, sub(d, shift));
    return red;
}

DualReduction projected_schur(const SaddleSystem& sys) { return projected_schur(sys, 1e-8); }

SaddleSolution make_solution(const SaddleSystem& sys, Vector u, Vector p) {
    SaddleSolution sol;
    Vector rp = matvec(sys.A, u);
    axpy(1.0, matvec_transposed(sys.B, p), rp);
    axpy(-1.0, sys.f, rp);
    Vector rd = sub(matvec(sys.B, u), sys.g);
    sol.residual_primal = norm2(rp);
    sol.residual_dual = norm2(rd);
    sol.u = std::move(u);
    sol.p = std::move(p);
    return sol;
}

SaddleSolution back_substitute(const SaddleSystem& sys, const DualReduction& red, const Vector& p0_or_p) {
    if (red.kind == SystemKind::SPD) {
        if (static_cast<int>(p0_or_p.size()) != sys.m())
            throw Error("back_substitute: multiplier size mismatch");
        Vector rhs = sub(sys.f, matvec_transposed(sys.B, p0_or_p));
        Vector u = cholesky_solve(sys.A, rhs);
        return make_solution(sys, std::move(u), p0_or_p);
    }

    if (static_cast<int>(p0_or_p.size()) != red.W0_basis.cols())
        throw Error("back_substitute: W0 coordinate size mismatch");
    // p = P^t p0 + BN eta; columns of W0_basis already lie in range(P).
    Vector p = matvec(red.W0_basis, p0_or_p);
    axpy(1.0, matvec(sys.B, matvec(red.N, red.eta)), p);

    Vector resid = sub(sys.f, matvec_transposed(sys.B, p));
    const Vector compat = matvec_transposed(red.N, resid);
    if (norm2(compat) > 1e-8 * sys.scale())
        throw CompatibilityViolated("back_substitute: f - B^t p is not in range(A)");

    Vector w = matvec(red.A_pinv, resid);
    // Recover xi by least squares on BN xi = g - B w; BN is injective.
    const DenseMatrix BN = matmul(sys.B, red.N);
    const Vector r = sub(sys.g, matvec(sys.B, w));
    const DenseMatrix G = matmul(transpose(BN), BN);
    const Vector xi = lu_solve(G, matvec_transposed(BN, r));
    axpy(1.0, matvec(red.N, xi), w);
    return make_solution(sys, std::move(w), std::move(p));
}

SaddleSolution solve_direct(const SaddleSystem& sys) {
    const int n = sys.n();
    const int m = sys.m();
    DenseMatrix block(n + m, n + m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) block(i, j) = sys.A(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            block(n + i, j) = sys.B(i, j);
            block(j, n + i) = sys.B(i, j);
        }
    Vector rhs(n + m);
    std::copy(sys.f.begin(), sys.f.end(), rhs.begin());
    std::copy(sys.g.begin(), sys.g.end(), rhs.begin() + n);
    const Vector sol = lu_solve(block, rhs);
    Vector u(sol.begin(), sol.begin() + n);
    Vector p(sol.begin() + n, sol.end());
    return make_solution(sys, std::move(u), std::move(p));
}

// --- seeded generators -------------------------------------------------------

DenseMatrix random_matrix(int rows, int cols, std::uint64_t seed, double lo, double hi) {
    SplitMix64 rng(seed);
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

DenseMatrix random_orthogonal(int n, std::uint64_t seed) {
    DenseMatrix q = random_matrix(n, n, seed);
    // Modified Gram-Schmidt over columns.
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < j; ++k) {
            double proj = 0.0;
            for (int i = 0; i < n; ++i) proj += q(i, k) * q(i, j);
            for (int i = 0; i < n; ++i) q(i, j) -= proj * q(i, k);
        }
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw Error("random_orthogonal: degenerate draw");
        for (int i = 0; i < n; ++i) q(i, j) /= nrm;
    }
    return q;
}

DenseMatrix random_spd(int n, std::uint64_t seed) {
    SplitMix64 master(seed);
    const std::uint64_t qseed = master.next();
    const DenseMatrix q = random_orthogonal(n, qseed);
    Vector lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = std::pow(10.0, master.uniform(-2.0, 2.0));
    DenseMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += q(i, k) * lambda[k] * q(j, k);
            a(i, j) = s;
        }
    return symmetrize(a);
}

SaddleSystem random_spd_system(int n, int m, std::uint64_t seed) {
    SplitMix64 master(seed);
    const DenseMatrix A = random_spd(n, master.next());
    for (int attempt = 0; attempt < 100; ++attempt) {
        const DenseMatrix B = random_matrix(m, n, master.next());
        if (rank(B) != m) continue;
        Vector f = to_vector(random_matrix(n, 1, master.next()));
        Vector g = to_vector(random_matrix(m, 1, master.next()));
        return validate(A, B, f, g);
    }
    throw Error("random_spd_system: could not draw a surjective B");
}

SaddleSystem random_semispd_system(int n, int m, int null_dim, std::uint64_t seed) {
    SplitMix64 master(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        // Spectral construction keeps the null space cleanly separated from
        // the positive part of the spectrum.
        const DenseMatrix q = random_orthogonal(n, master.next());
        Vector lambda(n, 0.0);
        for (int i = 0; i < n - null_dim; ++i)
            lambda[i] = std::pow(10.0, master.uniform(-2.0, 2.0));
        DenseMatrix A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = 0.0;
                for (int k = 0; k < n - null_dim; ++k) s += q(i, k) * lambda[k] * q(j, k);
                A(i, j) = A(j, i) = s;
            }
        const DenseMatrix B = random_matrix(m, n, master.next());
        Vector f = to_vector(random_matrix(n, 1, master.next()));
        Vector g = to_vector(random_matrix(m, 1, master.next()));
        try {
            SaddleSystem sys = validate(A, B, f, g);
            if (sys.kind != SystemKind::SemiSPD) continue;
            return sys;
        } catch (const Error&) {
            continue;
        }
    }
    throw Error("random_semispd_system: could not draw a well-posed system");
}

// --- serialization -----------------------------------------------------------

void save_system(const std::filesystem::path& dir, const SaddleSystem& sys) {
    std::filesystem::create_directories(dir);
    mmio::write_matrix(dir / "A.mtx", sys.A);
    mmio::write_matrix(dir / "B.mtx", sys.B);
    mmio::write_vector(dir / "f.mtx", sys.f);
    mmio::write_vector(dir / "g.mtx", sys.g);
    std::ofstream os(dir / "kind");
    os << (sys.kind == SystemKind::SPD ? "SPD" : "SemiSPD") << "\n";
}

SaddleSystem load_system(const std::filesystem::path& dir) {
    const DenseMatrix A = mmio::read_matrix(dir / "A.mtx");
    const DenseMatrix B = mmio::read_matrix(dir / "B.mtx");
    const Vector f = mmio::read_vector(dir / "f.mtx");
    const Vector g = mmio::read_vector(dir / "g.mtx");
    return validate(A, B, f, g);
}

} // namespace schurlab
