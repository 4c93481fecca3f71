#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace schurlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSymmetric : Error { using Error::Error; };
struct NotSPD : Error { using Error::Error; };
struct NotPSD : Error { using Error::Error; };
struct Indefinite : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct SingularKKT : Error { using Error::Error; };
struct BNotSurjective : Error { using Error::Error; };
struct IllPosed : Error { using Error::Error; };
struct CompatibilityViolated : Error { using Error::Error; };
struct NotRightInverse : Error { using Error::Error; };
struct DivergentStep : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct AssemblyError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. All operators in the project are
/// held densely; everything runs at desk scale.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static DenseMatrix identity(int n) {
        DenseMatrix I(n, n);
        for (int i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* row_ptr(int i) { return a_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row_ptr(int i) const { return a_.data() + static_cast<std::size_t>(i) * cols_; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

// --- basic algebra -----------------------------------------------------------

DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
Vector matvec(const DenseMatrix& a, const Vector& x);
Vector matvec_transposed(const DenseMatrix& a, const Vector& x);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b, double beta = 1.0);
DenseMatrix scale(const DenseMatrix& a, double s);
DenseMatrix from_column(const Vector& v);
Vector to_vector(const DenseMatrix& column);

double frob_norm(const DenseMatrix& m);
double norm2(const Vector& v);
double dot(const Vector& a, const Vector& b);
void axpy(double alpha, const Vector& x, Vector& y);

double symmetry_defect(const DenseMatrix& m);
bool is_symmetric(const DenseMatrix& m, double rel_tol = 1e-10);

// --- factorizations and spectral machinery -----------------------------------

/// Full symmetric eigendecomposition with eigenvalues ascending and
/// orthonormal eigenvector columns.
struct SymEig {
    Vector eigenvalues;
    DenseMatrix eigenvectors;
};

SymEig sym_eig(const DenseMatrix& a);

/// Eigenvalues only, ascending; skips the eigenvector accumulation, which
/// dominates the cost at sweep scale.
Vector sym_eigenvalues(const DenseMatrix& a);

/// Solves A X = rhs for SPD A by Cholesky. Throws NotSPD on a nonpositive
/// pivot relative to trace(A)/n.
DenseMatrix cholesky_solve(const DenseMatrix& a, const DenseMatrix& rhs);
Vector cholesky_solve(const DenseMatrix& a, const Vector& rhs);

/// Cached Cholesky factor, for repeated solves against the same SPD matrix.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const DenseMatrix& a);
    Vector solve(const Vector& rhs) const;
    DenseMatrix solve(const DenseMatrix& rhs) const;

private:
    DenseMatrix l_;
};

/// Dense LU with partial pivoting; remains valid for indefinite systems
/// (the full KKT block operator in particular).
class LuFactor {
public:
    explicit LuFactor(const DenseMatrix& a);
    Vector solve(const Vector& rhs) const;
    DenseMatrix solve(const DenseMatrix& rhs) const;

private:
    DenseMatrix lu_;
    std::vector<int> perm_;
};

DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& rhs);
Vector lu_solve(const DenseMatrix& a, const Vector& rhs);

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix: eigenvalues above
/// rank_tol * lambda_max are inverted, the rest zeroed.
DenseMatrix pseudoinverse(const DenseMatrix& a, double rank_tol);

/// Default rank tolerance n * eps * lambda_max, with lambda_max folded in by
/// the callee; callers pass the dimensionless factor.
double default_rank_tol(int n);

int rank(const DenseMatrix& m, double tol);
int rank(const DenseMatrix& m);

/// Orthonormal basis of the null space; empty matrix (n x 0) when trivial.
DenseMatrix null_basis(const DenseMatrix& m, double tol);
DenseMatrix null_basis(const DenseMatrix& m);

/// Orthonormal basis of the range; empty matrix when m is zero.
DenseMatrix range_basis(const DenseMatrix& m, double tol);

struct ConstrainedMin {
    Vector minimizer;
    double value = 0.0;
};

/// Minimizes (Av, v) over {v : Bv = q} through the KKT system, solved by
/// LU with partial pivoting so PSD A is admissible.
ConstrainedMin constrained_min(const DenseMatrix& a, const DenseMatrix& b, const Vector& q);

/// Singular values of a general matrix, descending.
Vector singular_values(const DenseMatrix& m);

DenseMatrix spd_sqrt(const DenseMatrix& a);
DenseMatrix spd_inv_sqrt(const DenseMatrix& a);
DenseMatrix spd_inverse(const DenseMatrix& a);

} // namespace schurlab
