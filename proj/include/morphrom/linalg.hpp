#pragma once

#include <span>
#include <vector>

namespace morphrom {

// Dense column-major matrix. Column access is contiguous, which is the
// access pattern of every routine below.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(j) * rows + i]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(j) * rows + i]; }

    double* col(int j) { return a.data() + static_cast<std::size_t>(j) * rows; }
    const double* col(int j) const { return a.data() + static_cast<std::size_t>(j) * rows; }
    std::span<const double> col_span(int j) const { return {col(j), static_cast<std::size_t>(rows)}; }

    static Matrix identity(int n);
};

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

// y = A x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
// y = A^T x
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);
// G = A^T A, symmetric cols x cols
Matrix gram(const Matrix& a);

struct EigResult {
    std::vector<double> values;  // descending
    Matrix vectors;              // column i pairs with values[i]
};

// Cyclic Jacobi rotations on a symmetric matrix. Off-diagonal Frobenius mass
// is annihilated pairwise until it falls below a relative threshold.
EigResult jacobi_eigh(const Matrix& sym, int max_sweeps = 64);

struct SvdResult {
    Matrix u;                   // left singular vectors, one column per sigma
    std::vector<double> sigma;  // descending, length min(rows, cols)
};

// One-sided Jacobi: orthogonalizes column pairs in place; singular values are
// the final column norms. Returns the min(rows, cols) largest pairs. A column
// whose norm lands at the rounding floor (1e-14 of the Frobenius norm) has no
// recoverable direction; its sigma is reported as computed and its u column
// is zero rather than a fabricated unit vector. A zero matrix yields zero
// kept pairs.
SvdResult one_sided_jacobi_svd(Matrix a, int max_sweeps = 64);

// Cholesky solve of an SPD system; throws IllPosedError when a pivot
// collapses relative to the diagonal scale.
std::vector<double> solve_spd(Matrix a, std::vector<double> b);

}  // namespace morphrom
