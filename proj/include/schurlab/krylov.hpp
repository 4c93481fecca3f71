#pragma once

#include <functional>
#include <optional>

#include "schurlab/saddle.hpp"

namespace schurlab::krylov {

using ApplyFn = std::function<Vector(const Vector&)>;

struct IterationTrace {
    Vector residual_norms;
    Vector error_norms;  // filled when a reference solution is supplied
    int iterations = 0;
    bool converged = false;
    double tol = 0.0;
};

struct KrylovResult {
    Vector solution;
    IterationTrace trace;
};

/// Preconditioned conjugate gradients; stops on relative preconditioned
/// residual <= tol.
KrylovResult cg(const ApplyFn& op, const Vector& rhs, double tol, int max_iter,
                const ApplyFn& precond = nullptr);

/// Preconditioned MINRES for symmetric (possibly indefinite) operators with
/// an SPD preconditioner.
KrylovResult minres(const ApplyFn& op, const Vector& rhs, double tol, int max_iter,
                    const ApplyFn& precond = nullptr);

ApplyFn matrix_apply(const DenseMatrix& m);

/// Eigenvalues of the block-diagonally preconditioned saddle operator,
/// computed on the symmetric similarity transform
/// blockdiag(A^{-1/2}, S^{-1/2}) * [[A, B^t], [B, 0]] * blockdiag(...).
/// Every value lies in {1, (1 +- sqrt 5)/2}.
Vector mgw_spectrum(const SaddleSystem& sys);

/// MINRES on the full block system with the blockdiag(A^{-1}, S^{-1})
/// preconditioner.
KrylovResult minres_mgw(const SaddleSystem& sys, double tol, int max_iter);
SaddleSolution solve_minres_mgw(const SaddleSystem& sys, double tol, int max_iter);

struct AlmDiagnostics {
    double epsilon = 0.0;
    double lambda_min_S = 0.0;
    double lambda_max_S = 0.0;
    double lambda_min_Seps = 0.0;
    double lambda_max_Seps = 0.0;
    double contraction = 0.0;
    double kappa_Seps = 0.0;
};

struct AlmResult {
    SaddleSolution solution;
    IterationTrace trace;
};

/// Augmented Lagrangian iteration with penalty epsilon; equivalent to
/// Richardson with step 1/epsilon on the augmented dual system. When a
/// reference multiplier is supplied, per-step error norms are recorded.
AlmResult alm_iterate(const SaddleSystem& sys, double epsilon, const Vector& p0,
                      double tol, int max_iter,
                      const Vector* reference_p = nullptr);

/// Assembles S_eps = B (A + eps^{-1} B^t B)^{-1} B^t, verifies the inverse
/// identity S_eps^{-1} = S^{-1} + eps^{-1} I, and reports measured spectra.
AlmDiagnostics alm_diagnostics(const SaddleSystem& sys, double epsilon);

/// Worst-case per-step ALM error contraction, measured over seeded random
/// initial errors refined by power iteration on the error propagator.
double measure_alm_contraction(const SaddleSystem& sys, double epsilon,
                               int num_samples = 100, std::uint64_t seed = 1);

/// Richardson on the Schur complement system with a fixed step; the
/// classical Uzawa method.
AlmResult uzawa_iterate(const SaddleSystem& sys, double step, const Vector& p0,
                        double tol, int max_iter,
                        const Vector* reference_p = nullptr);

/// Multiplier iterates of Richardson with the given step on (M, d).
std::vector<Vector> richardson_iterates(const DenseMatrix& M, const Vector& d,
                                        double step, const Vector& p0, int count);

} // namespace schurlab::krylov
