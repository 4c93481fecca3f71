#pragma once

#include <cstdint>
#include <filesystem>

#include "schurlab/densecore.hpp"

namespace schurlab {

enum class SystemKind { SPD, SemiSPD };

/// Validated saddle point system [[A, B^t], [B, 0]] (u, p) = (f, g) with A
/// symmetric positive (semi)definite and B surjective.
struct SaddleSystem {
    DenseMatrix A;
    DenseMatrix B;
    Vector f;
    Vector g;
    SystemKind kind = SystemKind::SPD;

    // Diagnostics surfaced by validate(); lambda_ratio = lambda_min/lambda_max of A.
    double lambda_min_A = 0.0;
    double lambda_max_A = 0.0;
    double lambda_ratio = 0.0;

    int n() const { return A.rows(); }
    int m() const { return B.rows(); }
    double scale() const;
};

/// Reduced dual problem. For SPD systems S_or_S0 = B A^{-1} B^t on W with
/// P = W0_basis = I. For semi-SPD systems S_or_S0 is the projected Schur
/// complement expressed in an orthonormal basis of W0, together with the
/// null basis N of A, the projector P, and the multiplier component eta.
struct DualReduction {
    DenseMatrix S_or_S0;
    Vector d_or_d0;
    DenseMatrix N;
    DenseMatrix P;
    DenseMatrix W0_basis;
    Vector eta;
    SystemKind kind = SystemKind::SPD;

    // Cached pseudoinverse of A (semi-SPD reductions only), reused by
    // back_substitute so the eigendecomposition is not repeated.
    DenseMatrix A_pinv;
};

struct SaddleSolution {
    Vector u;
    Vector p;
    double residual_primal = 0.0;
    double residual_dual = 0.0;
};

SaddleSystem validate(const DenseMatrix& A, const DenseMatrix& B, const Vector& f, const Vector& g);

DualReduction schur(const SaddleSystem& sys);

DualReduction projected_schur(const SaddleSystem& sys, double rank_tol);
DualReduction projected_schur(const SaddleSystem& sys);

/// Recovers (u, p) from a dual solution: p itself for SPD, W0-coordinates
/// p0 for semi-SPD.
SaddleSolution back_substitute(const SaddleSystem& sys, const DualReduction& red, const Vector& p0_or_p);

/// Reference solve: dense LU of the full (n+m) block operator.
SaddleSolution solve_direct(const SaddleSystem& sys);

SaddleSolution make_solution(const SaddleSystem& sys, Vector u, Vector p);

// --- seeded generators (part of the module's test surface) -------------------

DenseMatrix random_matrix(int rows, int cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0);
DenseMatrix random_orthogonal(int n, std::uint64_t seed);

/// SPD matrix Q Lambda Q^t with log-uniform spectrum in [1e-2, 1e2].
DenseMatrix random_spd(int n, std::uint64_t seed);

SaddleSystem random_spd_system(int n, int m, std::uint64_t seed);

/// Semi-SPD A = R^t R with rank-deficient R; resamples until the stacked
/// operator [A; B] has full column rank.
SaddleSystem random_semispd_system(int n, int m, int null_dim, std::uint64_t seed);

// --- serialization -----------------------------------------------------------

/// Directory layout: A.mtx, B.mtx, f.mtx, g.mtx plus a one-line "kind" file.
void save_system(const std::filesystem::path& dir, const SaddleSystem& sys);
SaddleSystem load_system(const std::filesystem::path& dir);

} // namespace schurlab
