#include "schurlab/densecore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace schurlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Cyclic Jacobi is used up to this order; beyond it, Householder
// tridiagonalization + implicit-shift QL keeps the large sweep matrices
// (Darcy at the finest mesh) inside their runtime budget.
constexpr int kJacobiMaxOrder = 192;

} // namespace

DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw Error("matmul: dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double* ci = c.row_ptr(i);
        const double* ai = a.row_ptr(i);
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Vector matvec(const DenseMatrix& a, const Vector& x) {
    if (a.cols() != static_cast<int>(x.size())) throw Error("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row_ptr(i);
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector matvec_transposed(const DenseMatrix& a, const Vector& x) {
    if (a.rows() != static_cast<int>(x.size())) throw Error("matvec_transposed: dimension mismatch");
    Vector y(a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row_ptr(i);
        const double xi = x[i];
        for (int j = 0; j < a.cols(); ++j) y[j] += ai[j] * xi;
    }
    return y;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("add: dimension mismatch");
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += beta * b.data()[i];
    return c;
}

DenseMatrix scale(const DenseMatrix& a, double s) {
    DenseMatrix c = a;
    for (double& v : c.data()) v *= s;
    return c;
}

DenseMatrix from_column(const Vector& v) {
    DenseMatrix m(static_cast<int>(v.size()), 1);
    for (int i = 0; i < m.rows(); ++i) m(i, 0) = v[i];
    return m;
}

Vector to_vector(const DenseMatrix& column) {
    if (column.cols() != 1) throw Error("to_vector: matrix is not a column");
    Vector v(column.rows());
    for (int i = 0; i < column.rows(); ++i) v[i] = column(i, 0);
    return v;
}

double frob_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

double norm2(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double symmetry_defect(const DenseMatrix& m) {
    double s = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.cols(); ++j) {
            const double d = m(i, j) - m(j, i);
            s += 2.0 * d * d;
        }
    return std::sqrt(s);
}

bool is_symmetric(const DenseMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    return symmetry_defect(m) <= rel_tol * std::max(1.0, frob_norm(m));
}

namespace {

double off_diag_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

// Cyclic Jacobi with row-major sweep order. Converged when the
// off-diagonal Frobenius norm drops below 1e-12 * ||A||_F.
void jacobi_eig(DenseMatrix& a, DenseMatrix& v) {
    const int n = a.rows();
    const double norm_a = frob_norm(a);
    const double stop = 1e-12 * norm_a;
    v = DenseMatrix::identity(n);
    if (norm_a == 0.0) return;

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_diag_norm(a) <= stop) return;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_diag_norm(a) > stop)
        throw NoConvergence("sym_eig: Jacobi did not converge in 100 sweeps");
}

// Householder reduction to tridiagonal form with accumulation of the
// orthogonal transform (EISPACK tred2).
void tred2(DenseMatrix& a, Vector& d, Vector& e) {
    const int n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        double scal = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scal += std::abs(a(i, k));
            if (scal == 0.0) {
                e[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scal;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scal * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += a(i, k) * a(k, j);
                for (int k = 0; k <= l; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (int j = 0; j <= l; ++j) a(j, i) = a(i, j) = 0.0;
    }
}

// Householder reduction to tridiagonal form without accumulating the
// transform; roughly half the work of tred2 when only eigenvalues are
// needed.
void tred1(DenseMatrix& a, Vector& d, Vector& e) {
    const int n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        double scal = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scal += std::abs(a(i, k));
            if (scal == 0.0) {
                e[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scal;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scal * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
    }
    for (int i = 0; i < n; ++i) d[i] = a(i, i);
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal form, eigenvalues only.
void tql1(Vector& d, Vector& e) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw NoConvergence("sym_eigenvalues: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Implicit-shift QL on the tridiagonal form, accumulating eigenvectors
// into z (EISPACK tql2).
void tql2(Vector& d, Vector& e, DenseMatrix& z) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw NoConvergence("sym_eig: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

SymEig sym_eig(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw NotSymmetric("sym_eig: matrix is not square");
    const double tol = 1e-10 * std::max(1.0, frob_norm(a));
    if (symmetry_defect(a) > tol) throw NotSymmetric("sym_eig: matrix is not symmetric");

    const int n = a.rows();
    // Work on the symmetric part so roundoff-level asymmetry cannot bias
    // the rotations.
    DenseMatrix w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = 0.5 * (a(i, j) + a(j, i));

    SymEig out;
    Vector d(n);
    DenseMatrix v;
    if (n <= kJacobiMaxOrder) {
        jacobi_eig(w, v);
        for (int i = 0; i < n; ++i) d[i] = w(i, i);
    } else {
        Vector e;
        tred2(w, d, e);
        tql2(d, e, w);
        v = std::move(w);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&d](int i, int j) { return d[i] < d[j]; });

    out.eigenvalues.resize(n);
    out.eigenvectors = DenseMatrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[j] = d[order[j]];
        for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

Vector sym_eigenvalues(const DenseMatrix& a) {
    const int n = a.rows();
    if (n <= kJacobiMaxOrder) return sym_eig(a).eigenvalues;

    if (a.rows() != a.cols()) throw NotSymmetric("sym_eigenvalues: matrix is not square");
    const double tol = 1e-10 * std::max(1.0, frob_norm(a));
    if (symmetry_defect(a) > tol) throw NotSymmetric("sym_eigenvalues: matrix is not symmetric");

    DenseMatrix w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = 0.5 * (a(i, j) + a(j, i));

    Vector d, e;
    tred1(w, d, e);
    tql1(d, e);
    std::sort(d.begin(), d.end());
    return d;
}

namespace {

DenseMatrix cholesky_factor(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw NotSPD("cholesky: matrix is not square");
    const int n = a.rows();
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += a(i, i);
    const double pivot_floor = 1e-14 * tr / std::max(1, n);

    DenseMatrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= pivot_floor) throw NotSPD("cholesky: nonpositive pivot");
        l(j, j) = std::sqrt(diag);
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const double* li = l.row_ptr(i);
            const double* lj = l.row_ptr(j);
            for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

} // namespace

CholeskyFactor::CholeskyFactor(const DenseMatrix& a) : l_(cholesky_factor(a)) {}

Vector CholeskyFactor::solve(const Vector& rhs) const {
    const int n = l_.rows();
    if (static_cast<int>(rhs.size()) != n) throw Error("cholesky solve: size mismatch");
    Vector y(rhs);
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        const double* li = l_.row_ptr(i);
        for (int k = 0; k < i; ++k) s -= li[k] * y[k];
        y[i] = s / li[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l_(k, i) * y[k];
        y[i] = s / l_(i, i);
    }
    return y;
}

DenseMatrix CholeskyFactor::solve(const DenseMatrix& rhs) const {
    const int n = l_.rows();
    if (rhs.rows() != n) throw Error("cholesky solve: size mismatch");
    DenseMatrix x = rhs;
    // Forward substitution, all right-hand sides at once.
    for (int i = 0; i < n; ++i) {
        const double* li = l_.row_ptr(i);
        double* xi = x.row_ptr(i);
        for (int k = 0; k < i; ++k) {
            const double lik = li[k];
            if (lik == 0.0) continue;
            const double* xk = x.row_ptr(k);
            for (int j = 0; j < x.cols(); ++j) xi[j] -= lik * xk[j];
        }
        const double inv = 1.0 / li[i];
        for (int j = 0; j < x.cols(); ++j) xi[j] *= inv;
    }
    for (int i = n - 1; i >= 0; --i) {
        double* xi = x.row_ptr(i);
        for (int k = i + 1; k < n; ++k) {
            const double lki = l_(k, i);
            if (lki == 0.0) continue;
            const double* xk = x.row_ptr(k);
            for (int j = 0; j < x.cols(); ++j) xi[j] -= lki * xk[j];
        }
        const double inv = 1.0 / l_(i, i);
        for (int j = 0; j < x.cols(); ++j) xi[j] *= inv;
    }
    return x;
}

DenseMatrix cholesky_solve(const DenseMatrix& a, const DenseMatrix& rhs) {
    return CholeskyFactor(a).solve(rhs);
}

Vector cholesky_solve(const DenseMatrix& a, const Vector& rhs) {
    return CholeskyFactor(a).solve(rhs);
}

LuFactor::LuFactor(const DenseMatrix& a) : lu_(a), perm_(a.rows()) {
    if (a.rows() != a.cols()) throw Error("lu: matrix is not square");
    const int n = a.rows();
    double scale_ref = 0.0;
    for (double v : a.data()) scale_ref = std::max(scale_ref, std::abs(v));
    const double pivot_floor = 1e-14 * std::max(scale_ref, 1e-300);

    std::iota(perm_.begin(), perm_.end(), 0);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(lu_(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < pivot_floor) throw SingularKKT("lu: pivot below tolerance");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
        }
        const double inv = 1.0 / lu_(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = lu_(i, k) * inv;
            lu_(i, k) = m;
            if (m == 0.0) continue;
            const double* rk = lu_.row_ptr(k);
            double* ri = lu_.row_ptr(i);
            for (int j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
        }
    }
}

Vector LuFactor::solve(const Vector& rhs) const {
    const int n = lu_.rows();
    if (static_cast<int>(rhs.size()) != n) throw Error("lu solve: size mismatch");
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = rhs[perm_[i]];
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        const double* li = lu_.row_ptr(i);
        for (int k = 0; k < i; ++k) s -= li[k] * y[k];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        const double* li = lu_.row_ptr(i);
        for (int k = i + 1; k < n; ++k) s -= li[k] * y[k];
        y[i] = s / li[i];
    }
    return y;
}

DenseMatrix LuFactor::solve(const DenseMatrix& rhs) const {
    DenseMatrix x(rhs.rows(), rhs.cols());
    Vector col(rhs.rows());
    for (int j = 0; j < rhs.cols(); ++j) {
        for (int i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, j);
        Vector sol = solve(col);
        for (int i = 0; i < rhs.rows(); ++i) x(i, j) = sol[i];
    }
    return x;
}

DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& rhs) {
    return LuFactor(a).solve(rhs);
}

Vector lu_solve(const DenseMatrix& a, const Vector& rhs) {
    return LuFactor(a).solve(rhs);
}

DenseMatrix pseudoinverse(const DenseMatrix& a, double rank_tol) {
    const SymEig eig = sym_eig(a);
    const int n = a.rows();
    double lmax = 0.0;
    for (double l : eig.eigenvalues) lmax = std::max(lmax, l);
    for (double l : eig.eigenvalues)
        if (l < -rank_tol * std::max(lmax, 1e-300))
            throw Indefinite("pseudoinverse: matrix has a negative eigenvalue");

    const double cut = rank_tol * lmax;
    DenseMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        const double l = eig.eigenvalues[k];
        if (l <= cut) continue;
        const double inv = 1.0 / l;
        for (int i = 0; i < n; ++i) {
            const double qik = eig.eigenvectors(i, k) * inv;
            for (int j = 0; j < n; ++j) out(i, j) += qik * eig.eigenvectors(j, k);
        }
    }
    return out;
}

double default_rank_tol(int n) { return n * kEps; }

Vector singular_values(const DenseMatrix& m) {
    // Eigenvalues of the smaller Gram matrix; adequate at desk scale.
    const bool wide = m.rows() >= m.cols();
    const DenseMatrix gram = wide ? matmul(transpose(m), m) : matmul(m, transpose(m));
    SymEig eig = sym_eig(gram);
    Vector sv(eig.eigenvalues.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        sv[i] = std::sqrt(std::max(0.0, eig.eigenvalues[eig.eigenvalues.size() - 1 - i]));
    return sv;
}

int rank(const DenseMatrix& m, double tol) {
    const Vector sv = singular_values(m);
    if (sv.empty() || sv[0] == 0.0) return 0;
    int r = 0;
    for (double s : sv)
        if (s > tol * sv[0]) ++r;
    return r;
}

int rank(const DenseMatrix& m) {
    return rank(m, default_rank_tol(std::max(m.rows(), m.cols())));
}

DenseMatrix null_basis(const DenseMatrix& m, double tol) {
    const DenseMatrix gram = matmul(transpose(m), m);
    SymEig eig = sym_eig(gram);
    const int n = m.cols();
    double smax = 0.0;
    for (double l : eig.eigenvalues) smax = std::max(smax, std::sqrt(std::max(0.0, l)));
    const double cut = tol * std::max(1.0, smax);
    int k = 0;
    while (k < n && std::sqrt(std::max(0.0, eig.eigenvalues[k])) <= cut) ++k;
    DenseMatrix basis(n, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) basis(i, j) = eig.eigenvectors(i, j);
    return basis;
}

DenseMatrix null_basis(const DenseMatrix& m) { return null_basis(m, 1e-8); }

DenseMatrix range_basis(const DenseMatrix& m, double tol) {
    const DenseMatrix gram = matmul(m, transpose(m));
    SymEig eig = sym_eig(gram);
    const int n = m.rows();
    double smax = 0.0;
    for (double l : eig.eigenvalues) smax = std::max(smax, std::sqrt(std::max(0.0, l)));
    const double cut = tol * std::max(1.0, smax);
    int first = 0;
    while (first < n && std::sqrt(std::max(0.0, eig.eigenvalues[first])) <= cut) ++first;
    DenseMatrix basis(n, n - first);
    for (int j = first; j < n; ++j)
        for (int i = 0; i < n; ++i) basis(i, j - first) = eig.eigenvectors(i, j);
    return basis;
}

ConstrainedMin constrained_min(const DenseMatrix& a, const DenseMatrix& b, const Vector& q) {
    const int n = a.rows();
    const int m = b.rows();
    if (a.cols() != n || b.cols() != n || static_cast<int>(q.size()) != m)
        throw Error("constrained_min: dimension mismatch");
    DenseMatrix kkt(n + m, n + m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) kkt(i, j) = a(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            kkt(n + i, j) = b(i, j);
            kkt(j, n + i) = b(i, j);
        }
    Vector rhs(n + m, 0.0);
    for (int i = 0; i < m; ++i) rhs[n + i] = q[i];
    const Vector sol = lu_solve(kkt, rhs);
    ConstrainedMin out;
    out.minimizer.assign(sol.begin(), sol.begin() + n);
    out.value = dot(matvec(a, out.minimizer), out.minimizer);
    return out;
}

namespace {

DenseMatrix spd_function(const DenseMatrix& a, double (*f)(double)) {
    SymEig eig = sym_eig(a);
    const int n = a.rows();
    DenseMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        if (eig.eigenvalues[k] <= 0.0) throw NotSPD("spd function: nonpositive eigenvalue");
        const double fk = f(eig.eigenvalues[k]);
        for (int i = 0; i < n; ++i) {
            const double qik = eig.eigenvectors(i, k) * fk;
            for (int j = 0; j < n; ++j) out(i, j) += qik * eig.eigenvectors(j, k);
        }
    }
    return out;
}

} // namespace

DenseMatrix spd_sqrt(const DenseMatrix& a) {
    return spd_function(a, [](double x) { return std::sqrt(x); });
}

DenseMatrix spd_inv_sqrt(const DenseMatrix& a) {
    return spd_function(a, [](double x) { return 1.0 / std::sqrt(x); });
}

DenseMatrix spd_inverse(const DenseMatrix& a) {
    return cholesky_solve(a, DenseMatrix::identity(a.rows()));
}

} // namespace schurlab
