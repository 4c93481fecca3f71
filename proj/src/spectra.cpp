#include "schurlab/spectra.hpp"

#include <cmath>

namespace schurlab::spectra {

namespace {

DenseMatrix symmetrize(const DenseMatrix& m) {
    DenseMatrix s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

Vector column(const DenseMatrix& m, int j) {
    Vector v(m.rows());
    for (int i = 0; i < m.rows(); ++i) v[i] = m(i, j);
    return v;
}

void require_spd(const SymEig& eig, const char* what) {
    if (eig.eigenvalues.empty() || eig.eigenvalues.front() <= 0.0)
        throw NotSPD(std::string(what) + ": operator is not SPD");
}

// Largest eigenvalue of the pencil M v = mu A v for symmetric PSD M and
// SPD A, via the congruent symmetric form A^{-1/2} M A^{-1/2}.
double pencil_lambda_max(const DenseMatrix& m, const DenseMatrix& a) {
    const DenseMatrix ai = spd_inv_sqrt(a);
    const SymEig eig = sym_eig(symmetrize(matmul(matmul(ai, m), ai)));
    return eig.eigenvalues.back();
}

// Restriction of the system to range(A) and the W0 basis: Ahat is SPD of
// order rank(A), Bhat maps range(A) coordinates to W0 coordinates, and
// S0 = Bhat Ahat^{-1} Bhat^t.
struct RestrictedSystem {
    DenseMatrix Ahat;
    DenseMatrix Bhat;
};

RestrictedSystem restrict_to_range(const SaddleSystem& sys, const DualReduction& red) {
    const DenseMatrix r = range_basis(sys.A, 1e-8);
    RestrictedSystem out;
    out.Ahat = symmetrize(matmul(matmul(transpose(r), sys.A), r));
    out.Bhat = matmul(transpose(red.W0_basis), matmul(sys.B, r));
    return out;
}

} // namespace

SpectralReport report_from_extremes(double lmin, double lmax, Route route, std::string tag) {
    SpectralReport rep;
    rep.lambda_min = lmin;
    rep.lambda_max = lmax;
    rep.kappa = lmax / lmin;
    rep.route = route;
    rep.operator_tag = std::move(tag);
    return rep;
}

SpectralReport eigs_direct(const DenseMatrix& op, std::string tag) {
    const SymEig eig = sym_eig(op);
    return report_from_extremes(eig.eigenvalues.front(), eig.eigenvalues.back(),
                                Route::DirectEig, std::move(tag));
}

std::pair<SpectralReport, SpectralReport> eigs_schur(const SaddleSystem& sys) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("eigs_schur: system is not SPD");
    const DualReduction red = schur(sys);
    const SymEig seig = sym_eig(red.S_or_S0);
    const SpectralReport direct = report_from_extremes(
        seig.eigenvalues.front(), seig.eigenvalues.back(), Route::DirectEig, "S");

    // Variational lambda_min: minimize, over unit eigenvectors q of S, the
    // attained sup of ||q||^2 / (Av, v) subject to Bv = q.
    double lmin = 0.0;
    for (int j = 0; j < sys.m(); ++j) {
        const Vector q = column(seig.eigenvectors, j);
        const double val = dot(q, q) / constrained_min(sys.A, sys.B, q).value;
        if (j == 0 || val < lmin) lmin = val;
    }
    const double lmax = pencil_lambda_max(matmul(transpose(sys.B), sys.B), sys.A);
    return {direct, report_from_extremes(lmin, lmax, Route::VariationalOracle, "S")};
}

std::pair<SpectralReport, SpectralReport> eigs_schur_preconditioned(const SaddleSystem& sys,
                                                                    const DenseMatrix& L) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("eigs_schur_preconditioned: system is not SPD");
    const SymEig leig = sym_eig(L);
    require_spd(leig, "eigs_schur_preconditioned");

    const DualReduction red = schur(sys);
    const DenseMatrix lh = spd_sqrt(L);
    const DenseMatrix lih = spd_inv_sqrt(L);
    const SymEig meig = sym_eig(symmetrize(matmul(matmul(lh, red.S_or_S0), lh)));
    const SpectralReport direct = report_from_extremes(
        meig.eigenvalues.front(), meig.eigenvalues.back(), Route::DirectEig, "LS");

    // For q = L^{-1/2} z with unit z, (Lq, q) = 1, so each candidate value
    // is the reciprocal of the constrained minimum of (Av, v).
    double lmin = 0.0;
    for (int j = 0; j < sys.m(); ++j) {
        const Vector q = matvec(lih, column(meig.eigenvectors, j));
        const double val = 1.0 / constrained_min(sys.A, sys.B, q).value;
        if (j == 0 || val < lmin) lmin = val;
    }
    const DenseMatrix btlb = matmul(matmul(transpose(sys.B), L), sys.B);
    const double lmax = pencil_lambda_max(symmetrize(btlb), sys.A);
    return {direct, report_from_extremes(lmin, lmax, Route::VariationalOracle, "LS")};
}

std::pair<double, double> bounds_cor_schur(const SaddleSystem& sys) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("bounds_cor_schur: system is not SPD");
    const Vector sv = singular_values(sys.B);
    const double sigma_max = sv.front();
    const double sigma_min = sv[sys.m() - 1];  // smallest nonzero: B is surjective
    const double lower = (sigma_min * sigma_min) / sys.lambda_max_A;
    const double upper = (sigma_max * sigma_max) / sys.lambda_min_A;
    return {lower, upper};
}

SpectralReport eigs_right_inverse_preconditioner(const SaddleSystem& sys, const DenseMatrix& Bbar) {
    if (sys.kind != SystemKind::SPD)
        throw NotSPD("eigs_right_inverse_preconditioner: system is not SPD");
    const int m = sys.m();
    const DenseMatrix bb = matmul(sys.B, transpose(Bbar));
    if (frob_norm(add(bb, DenseMatrix::identity(m), -1.0)) > 1e-10 * std::sqrt(static_cast<double>(m)))
        throw NotRightInverse("eigs_right_inverse_preconditioner: B Bbar^t != I");

    const DenseMatrix L = symmetrize(matmul(matmul(Bbar, sys.A), transpose(Bbar)));
    const DualReduction red = schur(sys);
    const DenseMatrix lh = spd_sqrt(L);
    const SymEig meig = sym_eig(symmetrize(matmul(matmul(lh, red.S_or_S0), lh)));
    const double lmin = meig.eigenvalues.front();
    const double lmax = meig.eigenvalues.back();
    if (lmin < 1.0 - 1e-9)
        throw Error("eigs_right_inverse_preconditioner: lambda_min floor violated");

    // ||Bbar^t B||_A^2 via the similarity K = A^{1/2} (Bbar^t B) A^{-1/2}.
    const DenseMatrix ah = spd_sqrt(sys.A);
    const DenseMatrix aih = spd_inv_sqrt(sys.A);
    const DenseMatrix k = matmul(matmul(ah, matmul(transpose(Bbar), sys.B)), aih);
    const double anorm_sq = sym_eig(symmetrize(matmul(k, transpose(k)))).eigenvalues.back();
    if (std::abs(lmax - anorm_sq) > 1e-8 * std::max(1.0, anorm_sq))
        throw Error("eigs_right_inverse_preconditioner: lambda_max A-norm identity violated");

    return report_from_extremes(lmin, lmax, Route::DirectEig, "LS_right_inverse");
}

std::pair<SpectralReport, SpectralReport> eigs_projected_schur(const SaddleSystem& sys,
                                                               const DualReduction& red) {
    if (red.S_or_S0.empty())
        throw Error("eigs_projected_schur: projected multiplier space is trivial");
    const SymEig seig = sym_eig(red.S_or_S0);
    const SpectralReport direct = report_from_extremes(
        seig.eigenvalues.front(), seig.eigenvalues.back(), Route::DirectEig, "S0");

    const RestrictedSystem rs = restrict_to_range(sys, red);
    double lmin = 0.0;
    const int m0 = red.S_or_S0.rows();
    for (int j = 0; j < m0; ++j) {
        const Vector q = column(seig.eigenvectors, j);
        const double val = dot(q, q) / constrained_min(rs.Ahat, rs.Bhat, q).value;
        if (j == 0 || val < lmin) lmin = val;
    }
    const double lmax = pencil_lambda_max(symmetrize(matmul(transpose(rs.Bhat), rs.Bhat)), rs.Ahat);
    return {direct, report_from_extremes(lmin, lmax, Route::VariationalOracle, "S0")};
}

std::pair<SpectralReport, SpectralReport> eigs_projected_schur(const SaddleSystem& sys) {
    return eigs_projected_schur(sys, projected_schur(sys));
}

SpectralReport eigs_projected_schur_preconditioned(const SaddleSystem& sys,
                                                   const DualReduction& red,
                                                   const DenseMatrix& L,
                                                   bool corollary_floor) {
    const SymEig leig = sym_eig(L);
    require_spd(leig, "eigs_projected_schur_preconditioned");
    const DenseMatrix lh = spd_sqrt(L);
    const SymEig meig = sym_eig(symmetrize(matmul(matmul(lh, red.S_or_S0), lh)));
    const double lmin = meig.eigenvalues.front();
    const double lmax = meig.eigenvalues.back();
    if (corollary_floor && lmin < 1.0 - 1e-9)
        throw Error("eigs_projected_schur_preconditioned: lambda_min floor violated");
    return report_from_extremes(lmin, lmax, Route::DirectEig, "LS0");
}

std::pair<SpectralReport, SpectralReport>
eigs_projected_schur_preconditioned_routes(const SaddleSystem& sys,
                                           const DualReduction& red,
                                           const DenseMatrix& L) {
    const SymEig leig = sym_eig(L);
    require_spd(leig, "eigs_projected_schur_preconditioned");
    const DenseMatrix lh = spd_sqrt(L);
    const DenseMatrix lih = spd_inv_sqrt(L);
    const SymEig meig = sym_eig(symmetrize(matmul(matmul(lh, red.S_or_S0), lh)));
    const SpectralReport direct = report_from_extremes(
        meig.eigenvalues.front(), meig.eigenvalues.back(), Route::DirectEig, "LS0");

    const RestrictedSystem rs = restrict_to_range(sys, red);
    double lmin = 0.0;
    const int m0 = red.S_or_S0.rows();
    for (int j = 0; j < m0; ++j) {
        const Vector q = matvec(lih, column(meig.eigenvectors, j));
        const double val = 1.0 / constrained_min(rs.Ahat, rs.Bhat, q).value;
        if (j == 0 || val < lmin) lmin = val;
    }
    const DenseMatrix btlb = matmul(matmul(transpose(rs.Bhat), L), rs.Bhat);
    const double lmax = pencil_lambda_max(symmetrize(btlb), rs.Ahat);
    return {direct, report_from_extremes(lmin, lmax, Route::VariationalOracle, "LS0")};
}

DenseMatrix projected_right_inverse_preconditioner(const SaddleSystem& sys,
                                                   const DualReduction& red,
                                                   const DenseMatrix& Bbar) {
    const int m = sys.m();
    const DenseMatrix bb = matmul(sys.B, transpose(Bbar));
    if (frob_norm(add(bb, DenseMatrix::identity(m), -1.0)) > 1e-10 * std::sqrt(static_cast<double>(m)))
        throw NotRightInverse("projected_right_inverse_preconditioner: B Bbar^t != I");
    const DenseMatrix pb = matmul(red.P, Bbar);
    const DenseMatrix full = symmetrize(matmul(matmul(pb, sys.A), transpose(pb)));
    return symmetrize(matmul(matmul(transpose(red.W0_basis), full), red.W0_basis));
}

} // namespace schurlab::spectra
