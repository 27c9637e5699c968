#include "cdph/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cdph {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_)
            throw DimensionError("Matrix initializer rows have unequal lengths");
        entries_.insert(entries_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::row_vector(const Vec& v) {
    Matrix m(1, v.size());
    std::copy(v.begin(), v.end(), m.entries_.begin());
    return m;
}

Matrix Matrix::col_vector(const Vec& v) {
    Matrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.entries_.begin());
    return m;
}

Vec Matrix::row(std::size_t i) const {
    return Vec(entries_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
               entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

Vec Matrix::col(std::size_t j) const {
    Vec out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

double Matrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& block) {
    if (r0 + block.rows() > rows_ || c0 + block.cols() > cols_)
        throw DimensionError("set_block: block exceeds target bounds");
    for (std::size_t i = 0; i < block.rows(); ++i)
        for (std::size_t j = 0; j < block.cols(); ++j)
            (*this)(r0 + i, c0 + j) = block(i, j);
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

void Matrix::require_finite(const char* context) const {
    for (double x : entries_)
        if (!std::isfinite(x))
            throw ValidationError(std::string(context) + ": non-finite matrix entry");
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("matrix sum: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("matrix difference: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
    return c;
}

Vec mat_vec(const Matrix& a, const Vec& v) {
    if (a.cols() != v.size()) throw DimensionError("mat_vec: dimension mismatch");
    Vec out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Vec vec_mat(const Vec& v, const Matrix& a) {
    if (a.rows() != v.size()) throw DimensionError("vec_mat: dimension mismatch");
    Vec out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += vi * a(i, j);
    }
    return out;
}

double dot(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double sum(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double max_abs(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vec hadamard(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw DimensionError("hadamard: length mismatch");
    Vec out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("hadamard: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= b(i, j);
    return c;
}

Matrix mat_power(const Matrix& a, unsigned long n) {
    if (!a.square()) throw DimensionError("mat_power: matrix not square");
    Matrix result = Matrix::identity(a.rows());
    Matrix base = a;
    while (n > 0) {
        if (n & 1UL) result = result * base;
        n >>= 1UL;
        if (n > 0) base = base * base;
    }
    return result;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows() * b.rows(), a.cols() * b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

LuSolver::LuSolver(Matrix a) : lu_(std::move(a)) {
    if (!lu_.square()) throw DimensionError("LuSolver: matrix not square");
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(lu_(i, j)));
    const double pivot_floor = scale * 1e-15;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double cand = std::abs(lu_(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
        }
        if (best <= pivot_floor || best == 0.0) {
            singular_ = true;
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            lu_(i, k) /= lu_(k, k);
            const double lik = lu_(i, k);
            if (lik == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= lik * lu_(k, j);
        }
    }
}

double LuSolver::rcond_estimate() const {
    const std::size_t n = lu_.rows();
    if (n == 0) return 1.0;
    double lo = std::abs(lu_(0, 0));
    double hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
        const double p = std::abs(lu_(i, i));
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    return hi == 0.0 ? 0.0 : lo / hi;
}

Vec LuSolver::solve(const Vec& b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n) throw DimensionError("LuSolver::solve: dimension mismatch");
    if (singular_) throw NumericError("LuSolver: singular or near-singular system");
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
        x[ii] = s / lu_(ii, ii);
    }
    return x;
}

Matrix LuSolver::solve(const Matrix& b) const {
    if (b.rows() != lu_.rows()) throw DimensionError("LuSolver::solve: dimension mismatch");
    Matrix x(b.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const Vec xj = solve(b.col(j));
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
    }
    return x;
}

namespace {

std::size_t termination_budget(std::size_t dim) {
    // ceil(10 d log(1 / 1e-12)); log(1e12) ~ 27.631
    return static_cast<std::size_t>(std::ceil(10.0 * static_cast<double>(std::max<std::size_t>(dim, 1)) *
                                              27.631021115928547));
}

/// Neumann-decay criterion: does the action of |x||A| on the ones vector
/// decay below the termination tolerance within the budget?
bool neumann_converges(const Matrix& a, double x) {
    const std::size_t n = a.rows();
    if (n == 0) return true;
    Matrix abs_a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) abs_a(i, j) = std::abs(x) * std::abs(a(i, j));
    Vec v(n, 1.0);
    const std::size_t budget = termination_budget(n);
    for (std::size_t t = 0; t < budget; ++t) {
        v = mat_vec(abs_a, v);
        const double m = max_abs(v);
        if (m < tol::termination_decay) return true;
        if (!std::isfinite(m)) return false;
        if (m > 1e100) return false; // diverging; no need to exhaust the budget
    }
    return false;
}

} // namespace

Vec resolvent_apply(const Matrix& a, double x, const Vec& v) {
    if (!a.square()) throw DimensionError("resolvent_apply: matrix not square");
    if (a.rows() != v.size()) throw DimensionError("resolvent_apply: vector length mismatch");
    if (!neumann_converges(a, x))
        throw NumericError("resolvent_apply: spectral radius of xA not below 1 (Neumann criterion failed)");
    const std::size_t n = a.rows();
    Matrix system = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) system(i, j) -= x * a(i, j);
    LuSolver lu(system);
    if (lu.singular()) throw NumericError("resolvent_apply: singular system");
    Vec w = lu.solve(v);

    const double bound = 1e-10 * (1.0 + max_abs(v));
    auto residual = [&](const Vec& sol) {
        Vec r = mat_vec(system, sol);
        for (std::size_t i = 0; i < n; ++i) r[i] -= v[i];
        return max_abs(r);
    };
    double res = residual(w);
    if (res > bound) {
        // one pass of iterative refinement
        Vec r = mat_vec(system, w);
        for (std::size_t i = 0; i < n; ++i) r[i] -= v[i];
        Vec d = lu.solve(r);
        for (std::size_t i = 0; i < n; ++i) w[i] -= d[i];
        res = residual(w);
        if (res > bound)
            throw NumericError("resolvent_apply: residual exceeds tolerance (ill-conditioned system)");
    }
    return w;
}

Matrix resolvent_solve(const Matrix& a, double x, const Matrix& b) {
    if (b.rows() != a.rows()) throw DimensionError("resolvent_solve: dimension mismatch");
    Matrix out(b.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const Vec wj = resolvent_apply(a, x, b.col(j));
        for (std::size_t i = 0; i < b.rows(); ++i) out(i, j) = wj[i];
    }
    return out;
}

SubstochasticReport validate_substochastic(const Matrix& a, bool strict_exit) {
    SubstochasticReport report;
    report.strict_exit_required = strict_exit;
    if (!a.square() || a.empty()) return report;

    report.entries_in_range = true;
    report.row_sums_ok = true;
    report.has_strict_exit = false;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double e = a(i, j);
            if (!(e >= 0.0 && e <= 1.0)) report.entries_in_range = false;
            rs += e;
        }
        if (rs > 1.0 + tol::row_sum_slack) report.row_sums_ok = false;
        if (rs < 1.0) report.has_strict_exit = true;
    }

    Vec v(a.rows(), 1.0);
    const std::size_t budget = termination_budget(a.rows());
    for (std::size_t t = 1; t <= budget; ++t) {
        v = mat_vec(a, v);
        if (max_abs(v) < tol::termination_decay) {
            report.terminates = true;
            report.termination_steps = t;
            break;
        }
        if (!std::isfinite(max_abs(v))) break;
    }

    report.passed = report.entries_in_range && report.row_sums_ok && report.terminates &&
                    (!strict_exit || report.has_strict_exit);
    return report;
}

} // namespace cdph
