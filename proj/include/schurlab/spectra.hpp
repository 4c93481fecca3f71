#pragma once

#include <string>
#include <utility>

#include "schurlab/saddle.hpp"

namespace schurlab::spectra {

enum class Route { DirectEig, VariationalOracle };

struct SpectralReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    Route route = Route::DirectEig;
    std::string operator_tag;
};

SpectralReport report_from_extremes(double lmin, double lmax, Route route, std::string tag);

/// Direct route: eigensolve of an assembled SPD operator.
SpectralReport eigs_direct(const DenseMatrix& op, std::string tag);

/// Extremal eigenvalues of the Schur complement, by eigensolve and by the
/// variational characterization (constrained minimization / matrix pencil).
/// The two routes certify each other.
std::pair<SpectralReport, SpectralReport> eigs_schur(const SaddleSystem& sys);

std::pair<SpectralReport, SpectralReport> eigs_schur_preconditioned(const SaddleSystem& sys,
                                                                    const DenseMatrix& L);

/// Two-sided a priori bounds lambda_max(A)^{-1} ||B^{-1}||^{-2} and
/// lambda_min(A)^{-1} ||B||^2 sandwiching the Schur spectrum.
std::pair<double, double> bounds_cor_schur(const SaddleSystem& sys);

/// Spectrum of L S for L = Bbar A Bbar^t built from a right inverse of B;
/// checks the floor lambda_min >= 1 and the A-norm identity for lambda_max.
SpectralReport eigs_right_inverse_preconditioner(const SaddleSystem& sys, const DenseMatrix& Bbar);

std::pair<SpectralReport, SpectralReport> eigs_projected_schur(const SaddleSystem& sys,
                                                               const DualReduction& red);
std::pair<SpectralReport, SpectralReport> eigs_projected_schur(const SaddleSystem& sys);

/// Spectrum of L S0 with L SPD in the W0 basis. When L comes from a right
/// inverse via the projected corollary, lambda_min >= 1 is asserted.
SpectralReport eigs_projected_schur_preconditioned(const SaddleSystem& sys,
                                                   const DualReduction& red,
                                                   const DenseMatrix& L,
                                                   bool corollary_floor = false);

/// Both routes (direct eigensolve and variational oracle) for L S0.
std::pair<SpectralReport, SpectralReport>
eigs_projected_schur_preconditioned_routes(const SaddleSystem& sys,
                                           const DualReduction& red,
                                           const DenseMatrix& L);

/// Corollary preconditioner (P Bbar) A (P Bbar)^t expressed in the W0 basis.
DenseMatrix projected_right_inverse_preconditioner(const SaddleSystem& sys,
                                                   const DualReduction& red,
                                                   const DenseMatrix& Bbar);

} // namespace schurlab::spectra
