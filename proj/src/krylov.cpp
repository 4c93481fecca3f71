#include "schurlab/krylov.hpp"

#include <cmath>

#include "schurlab/rng.hpp"

namespace schurlab::krylov {

namespace {

DenseMatrix symmetrize(const DenseMatrix& m) {
    DenseMatrix s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

Vector scaled(const Vector& v, double s) {
    Vector out(v);
    for (double& x : out) x *= s;
    return out;
}

} // namespace

ApplyFn matrix_apply(const DenseMatrix& m) {
    return [m](const Vector& x) { return matvec(m, x); };
}

KrylovResult cg(const ApplyFn& op, const Vector& rhs, double tol, int max_iter,
                const ApplyFn& precond) {
    KrylovResult out;
    out.trace.tol = tol;
    const std::size_t n = rhs.size();
    out.solution.assign(n, 0.0);

    Vector r = rhs;
    Vector z = precond ? precond(r) : r;
    double rz = dot(r, z);
    const double res0 = std::sqrt(std::max(0.0, rz));
    out.trace.residual_norms.push_back(res0);
    if (res0 == 0.0) {
        out.trace.converged = true;
        return out;
    }

    Vector p = z;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector ap = op(p);
        const double alpha = rz / dot(p, ap);
        axpy(alpha, p, out.solution);
        axpy(-alpha, ap, r);
        z = precond ? precond(r) : r;
        const double rz_new = dot(r, z);
        const double res = std::sqrt(std::max(0.0, rz_new));
        out.trace.residual_norms.push_back(res);
        out.trace.iterations = it;
        if (res <= tol * res0) {
            out.trace.converged = true;
            return out;
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return out;
}

// Paige-Saunders MINRES with an SPD preconditioner; phibar tracks the
// preconditioned residual norm, which is monotone nonincreasing.
KrylovResult minres(const ApplyFn& op, const Vector& rhs, double tol, int max_iter,
                    const ApplyFn& precond) {
    KrylovResult out;
    out.trace.tol = tol;
    const std::size_t n = rhs.size();
    out.solution.assign(n, 0.0);

    Vector r1 = rhs;
    Vector y = precond ? precond(r1) : r1;
    double beta1 = dot(r1, y);
    if (beta1 < 0.0) throw NotSPD("minres: preconditioner is not SPD");
    beta1 = std::sqrt(beta1);
    out.trace.residual_norms.push_back(beta1);
    if (beta1 == 0.0) {
        out.trace.converged = true;
        return out;
    }

    double oldb = 0.0;
    double beta = beta1;
    double dbar = 0.0;
    double epsln = 0.0;
    double phibar = beta1;
    double cs = -1.0;
    double sn = 0.0;
    Vector r2 = r1;
    Vector w(n, 0.0);
    Vector w2(n, 0.0);

    for (int itn = 1; itn <= max_iter; ++itn) {
        const double s = 1.0 / beta;
        const Vector v = scaled(y, s);
        y = op(v);
        if (itn >= 2) axpy(-beta / oldb, r1, y);
        const double alfa = dot(v, y);
        axpy(-alfa / beta, r2, y);
        r1 = r2;
        r2 = y;
        y = precond ? precond(r2) : r2;
        oldb = beta;
        beta = dot(r2, y);
        if (beta < 0.0) throw NotSPD("minres: preconditioner is not SPD");
        beta = std::sqrt(beta);

        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::sqrt(gbar * gbar + beta * beta);
        gamma = std::max(gamma, 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        const Vector w1 = w2;
        w2 = w;
        for (std::size_t i = 0; i < n; ++i)
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        axpy(phi, w, out.solution);

        out.trace.residual_norms.push_back(phibar);
        out.trace.iterations = itn;
        if (phibar <= tol * beta1) {
            out.trace.converged = true;
            return out;
        }
    }
    return out;
}

Vector mgw_spectrum(const SaddleSystem& sys) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("mgw_spectrum: system is not SPD");
    const int n = sys.n();
    const int m = sys.m();
    const DenseMatrix ai = spd_inv_sqrt(sys.A);
    const DenseMatrix s = schur(sys).S_or_S0;
    const DenseMatrix si = spd_inv_sqrt(s);
    const DenseMatrix c = matmul(matmul(si, sys.B), ai);

    DenseMatrix block(n + m, n + m);
    for (int i = 0; i < n; ++i) block(i, i) = 1.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            block(n + i, j) = c(i, j);
            block(j, n + i) = c(i, j);
        }
    const SymEig eig = sym_eig(block);

    const double golden_hi = 0.5 * (1.0 + std::sqrt(5.0));
    const double golden_lo = 0.5 * (1.0 - std::sqrt(5.0));
    for (double l : eig.eigenvalues) {
        const bool ok = std::abs(l - 1.0) <= 1e-8 || std::abs(l - golden_hi) <= 1e-8 ||
                        std::abs(l - golden_lo) <= 1e-8;
        if (!ok) throw Error("mgw_spectrum: eigenvalue outside the three-value set");
    }
    return eig.eigenvalues;
}

KrylovResult minres_mgw(const SaddleSystem& sys, double tol, int max_iter) {
    const int n = sys.n();
    const int m = sys.m();
    const CholeskyFactor a_factor(sys.A);
    const CholeskyFactor s_factor(schur(sys).S_or_S0);

    ApplyFn op = [&sys, n, m](const Vector& x) {
        Vector u(x.begin(), x.begin() + n);
        Vector p(x.begin() + n, x.end());
        Vector top = matvec(sys.A, u);
        axpy(1.0, matvec_transposed(sys.B, p), top);
        Vector bottom = matvec(sys.B, u);
        Vector out(n + m);
        std::copy(top.begin(), top.end(), out.begin());
        std::copy(bottom.begin(), bottom.end(), out.begin() + n);
        return out;
    };
    ApplyFn precond = [&a_factor, &s_factor, n, m](const Vector& x) {
        Vector u(x.begin(), x.begin() + n);
        Vector p(x.begin() + n, x.end());
        const Vector pu = a_factor.solve(u);
        const Vector pp = s_factor.solve(p);
        Vector out(n + m);
        std::copy(pu.begin(), pu.end(), out.begin());
        std::copy(pp.begin(), pp.end(), out.begin() + n);
        return out;
    };

    Vector rhs(n + m);
    std::copy(sys.f.begin(), sys.f.end(), rhs.begin());
    std::copy(sys.g.begin(), sys.g.end(), rhs.begin() + n);
    return minres(op, rhs, tol, max_iter, precond);
}

SaddleSolution solve_minres_mgw(const SaddleSystem& sys, double tol, int max_iter) {
    const KrylovResult res = minres_mgw(sys, tol, max_iter);
    Vector u(res.solution.begin(), res.solution.begin() + sys.n());
    Vector p(res.solution.begin() + sys.n(), res.solution.end());
    return make_solution(sys, std::move(u), std::move(p));
}

namespace {

DenseMatrix augmented_primal(const SaddleSystem& sys, double epsilon) {
    return symmetrize(add(sys.A, matmul(transpose(sys.B), sys.B), 1.0 / epsilon));
}

} // namespace

AlmResult alm_iterate(const SaddleSystem& sys, double epsilon, const Vector& p0,
                      double tol, int max_iter, const Vector* reference_p) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("alm_iterate: system is not SPD");
    if (epsilon <= 0.0) throw Error("alm_iterate: epsilon must be positive");
    const CholeskyFactor aug(augmented_primal(sys, epsilon));

    // Constant part of the primal update rhs: f + eps^{-1} B^t g.
    Vector rhs_base = sys.f;
    axpy(1.0 / epsilon, matvec_transposed(sys.B, sys.g), rhs_base);

    AlmResult out;
    out.trace.tol = tol;
    Vector p = p0;
    Vector u(sys.n(), 0.0);
    double res0 = -1.0;
    const double tiny = 1e-14 * sys.scale();
    for (int m = 0; m <= max_iter; ++m) {
        Vector rhs = rhs_base;
        axpy(-1.0, matvec_transposed(sys.B, p), rhs);
        u = aug.solve(rhs);
        Vector r = sys.g;
        axpy(-1.0, matvec(sys.B, u), r);
        const double res = norm2(r);
        out.trace.residual_norms.push_back(res);
        if (reference_p) {
            Vector e = p;
            axpy(-1.0, *reference_p, e);
            out.trace.error_norms.push_back(norm2(e));
        }
        if (res0 < 0.0) res0 = res;
        out.trace.iterations = m;
        if (res <= tol * res0 || res <= tiny) {
            out.trace.converged = true;
            break;
        }
        if (m == max_iter) break;
        axpy(-1.0 / epsilon, r, p);
    }
    out.solution = make_solution(sys, std::move(u), std::move(p));
    return out;
}

AlmDiagnostics alm_diagnostics(const SaddleSystem& sys, double epsilon) {
    if (epsilon <= 0.0) throw Error("alm_diagnostics: epsilon must be positive");
    const DenseMatrix s = schur(sys).S_or_S0;
    const SymEig seig = sym_eig(s);

    const DenseMatrix aug = augmented_primal(sys, epsilon);
    const DenseMatrix seps = symmetrize(matmul(sys.B, cholesky_solve(aug, transpose(sys.B))));
    const DenseMatrix seps_inv = spd_inverse(seps);
    const DenseMatrix s_inv = spd_inverse(s);
    DenseMatrix defect = add(seps_inv, s_inv, -1.0);
    for (int i = 0; i < defect.rows(); ++i) defect(i, i) -= 1.0 / epsilon;
    if (frob_norm(defect) > 1e-8 * frob_norm(seps_inv))
        throw Error("alm_diagnostics: augmented inverse identity violated");

    const SymEig aeig = sym_eig(seps);
    AlmDiagnostics diag;
    diag.epsilon = epsilon;
    diag.lambda_min_S = seig.eigenvalues.front();
    diag.lambda_max_S = seig.eigenvalues.back();
    diag.lambda_min_Seps = aeig.eigenvalues.front();
    diag.lambda_max_Seps = aeig.eigenvalues.back();
    diag.contraction = epsilon / (epsilon + diag.lambda_min_S);
    diag.kappa_Seps = diag.lambda_max_Seps / diag.lambda_min_Seps;
    return diag;
}

double measure_alm_contraction(const SaddleSystem& sys, double epsilon,
                               int num_samples, std::uint64_t seed) {
    const DenseMatrix aug = augmented_primal(sys, epsilon);
    const DenseMatrix seps = symmetrize(matmul(sys.B, cholesky_solve(aug, transpose(sys.B))));
    // Error propagator E = I - eps^{-1} S_eps; SPD with norm eps/(eps + lambda_min(S)).
    DenseMatrix e = scale(seps, -1.0 / epsilon);
    for (int i = 0; i < e.rows(); ++i) e(i, i) += 1.0;

    SplitMix64 rng(seed);
    const int m = e.rows();
    double best_ratio = 0.0;
    Vector best(m, 0.0);
    for (int s = 0; s < num_samples; ++s) {
        Vector v(m);
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        const double nv = norm2(v);
        for (double& x : v) x /= nv;
        const Vector ev = matvec(e, v);
        const double ratio = norm2(ev);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = v;
        }
    }
    // Refine the worst sample by power iteration; the per-step ratio
    // converges to the operator norm.
    Vector v = best;
    double ratio = best_ratio;
    for (int it = 0; it < 20000; ++it) {
        Vector ev = matvec(e, v);
        const double nv = norm2(ev);
        const double new_ratio = nv / norm2(v);
        for (double& x : ev) x /= nv;
        v = std::move(ev);
        if (std::abs(new_ratio - ratio) <= 1e-12 * new_ratio && it > 2) {
            ratio = new_ratio;
            break;
        }
        ratio = new_ratio;
    }
    return ratio;
}

AlmResult uzawa_iterate(const SaddleSystem& sys, double step, const Vector& p0,
                        double tol, int max_iter, const Vector* reference_p) {
    if (sys.kind != SystemKind::SPD) throw NotSPD("uzawa_iterate: system is not SPD");
    const DualReduction red = schur(sys);
    const SymEig seig = sym_eig(red.S_or_S0);
    const double lmax = seig.eigenvalues.back();
    if (step <= 0.0 || step >= 2.0 / lmax)
        throw DivergentStep("uzawa_iterate: step outside (0, 2/lambda_max(S))");

    AlmResult out;
    out.trace.tol = tol;
    Vector p = p0;
    double res0 = -1.0;
    const double tiny = 1e-14 * sys.scale();
    for (int m = 0; m <= max_iter; ++m) {
        Vector r = red.d_or_d0;
        axpy(-1.0, matvec(red.S_or_S0, p), r);
        const double res = norm2(r);
        out.trace.residual_norms.push_back(res);
        if (reference_p) {
            Vector e = p;
            axpy(-1.0, *reference_p, e);
            out.trace.error_norms.push_back(norm2(e));
        }
        if (res0 < 0.0) res0 = res;
        out.trace.iterations = m;
        if (res <= tol * res0 || res <= tiny) {
            out.trace.converged = true;
            break;
        }
        if (m == max_iter) break;
        axpy(step, r, p);
    }
    out.solution = back_substitute(sys, red, p);
    return out;
}

std::vector<Vector> richardson_iterates(const DenseMatrix& M, const Vector& d,
                                        double step, const Vector& p0, int count) {
    std::vector<Vector> iterates;
    iterates.push_back(p0);
    Vector p = p0;
    for (int k = 0; k < count; ++k) {
        Vector r = d;
        axpy(-1.0, matvec(M, p), r);
        axpy(step, r, p);
        iterates.push_back(p);
    }
    return iterates;
}

} // namespace schurlab::krylov
