#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "cdph/errors.hpp"

namespace cdph {

using Vec = std::vector<double>;

/// Dense row-major real matrix. Every matrix in this library is tiny
/// (dimension <= ~32: transition blocks of terminating chains and their
/// Kronecker combinations), so all operations are direct dense arithmetic.
/// Values are immutable in practice once built and safe to share across
/// threads; nothing here keeps internal mutable state.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix row_vector(const Vec& v);
    static Matrix col_vector(const Vec& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    Vec row(std::size_t i) const;
    Vec col(std::size_t j) const;
    double row_sum(std::size_t i) const;

    /// Copies `block` into this matrix with upper-left corner at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const Matrix& block);

    Matrix transposed() const;

    const Vec& data() const { return entries_; }

    /// Throws ValidationError if any entry is NaN or infinite.
    void require_finite(const char* context) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec entries_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// y = A v (v a column vector).
Vec mat_vec(const Matrix& a, const Vec& v);
/// y^T = v^T A (v a row vector).
Vec vec_mat(const Vec& v, const Matrix& a);

double dot(const Vec& u, const Vec& v);
double sum(const Vec& v);
double max_abs(const Vec& v);

/// Entrywise product of two vectors of equal length.
Vec hadamard(const Vec& u, const Vec& v);
/// Entrywise product of two matrices of identical shape.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// A^n for square A, with A^0 = I.
Matrix mat_power(const Matrix& a, unsigned long n);

/// Kronecker product with row-major (lexicographic) block order: the
/// (i,j) block of the result is a(i,j) * B.
Matrix kron(const Matrix& a, const Matrix& b);

/// Partial-pivot LU factorization of a square matrix. Solves are checked:
/// a pivot collapsing to ~0 relative to the matrix scale raises NumericError.
class LuSolver {
public:
    explicit LuSolver(Matrix a);

    Vec solve(const Vec& b) const;
    Matrix solve(const Matrix& b) const;

    bool singular() const { return singular_; }
    /// Cheap conditioning proxy: min |pivot| / max |pivot|.
    double rcond_estimate() const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
};

/// Solves (I - xA) w = v. Preconditions the spectral radius of xA via the
/// Neumann-decay criterion (power iteration on |x||A| applied to the ones
/// vector must fall below 1e-12 within the termination budget); verifies
/// the residual ||(I - xA)w - v||_inf <= 1e-10 (1 + ||v||_inf), with one
/// refinement pass before giving up. Never returns a silently bad solution.
Vec resolvent_apply(const Matrix& a, double x, const Vec& v);

/// Same contract, right-hand side given column-by-column.
Matrix resolvent_solve(const Matrix& a, double x, const Matrix& b);

struct SubstochasticReport {
    bool entries_in_range = false; ///< all entries in [0, 1]
    bool row_sums_ok = false;      ///< every row sum <= 1 + 1e-9
    bool terminates = false;       ///< ||A^t 1||_inf < 1e-12 within the budget
    bool has_strict_exit = false;  ///< at least one row sum < 1
    std::size_t termination_steps = 0;
    bool strict_exit_required = false;
    bool passed = false;
};

/// Structural checks on a candidate sub-stochastic matrix. Termination uses
/// the decay proxy ||A^t 1||_inf < 1e-12 for some t <= ceil(10 d log(1e12))
/// instead of an eigensolve. Never throws; callers decide.
SubstochasticReport validate_substochastic(const Matrix& a, bool strict_exit = false);

/// Tolerances shared across parameter validation.
namespace tol {
inline constexpr double row_sum_slack = 1e-9;    // row sums may exceed 1 by this
inline constexpr double entry_clamp = 1e-12;     // entries in [-clamp, 0) are clamped at parse
inline constexpr double termination_decay = 1e-12;
} // namespace tol

} // namespace cdph
