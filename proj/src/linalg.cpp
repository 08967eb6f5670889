#include "qbd/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "qbd/error.hpp"
#include "qbd/kernels.hpp"

namespace qbd {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw InputError("ragged matrix initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix& Matrix::operator+=(const Matrix& other) { return add_scaled(other, 1.0); }
Matrix& Matrix::operator-=(const Matrix& other) { return add_scaled(other, -1.0); }

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix& Matrix::add_scaled(const Matrix& other, double s) {
    assert(rows_ == other.rows_ && cols_ == other.cols_);
    kernels::active().axpy(data_.size(), s, other.data_.data(), data_.data());
    return *this;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Vector Matrix::row_sums() const {
    Vector s(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const auto r = row(i);
        s[i] = std::accumulate(r.begin(), r.end(), 0.0);
    }
    return s;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix c(a.rows(), b.cols());
    kernels::active().gemm(a.rows(), b.cols(), a.cols(), a.data(), b.data(), 0.0, c.data());
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    assert(a.cols() == x.size());
    Vector y(a.rows());
    kernels::active().gemv(a.rows(), a.cols(), a.data(), x.data(), y.data());
    return y;
}

Vector operator*(std::span<const double> x, const Matrix& a) {
    assert(a.rows() == x.size());
    Vector y(a.cols());
    kernels::active().gevm(a.rows(), a.cols(), x.data(), a.data(), y.data());
    return y;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double max_abs(const Matrix& a) { return max_abs(a.values()); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    return kernels::active().max_abs_diff(a.values().size(), a.data(), b.data());
}

double norm1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a(i, j));
        best = std::max(best, s);
    }
    return best;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double min_entry(const Matrix& a) {
    const auto v = a.values();
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

LuDecomposition::LuDecomposition(const Matrix& a) : n_(a.rows()), lu_(a), perm_(a.rows()) {
    if (!a.square()) {
        throw InputError("LU decomposition requires a square matrix");
    }
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t piv = k;
        double best = std::fabs(lu_(k, k));
        for (std::size_t i = k + 1; i < n_; ++i) {
            const double v = std::fabs(lu_(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= scale * std::numeric_limits<double>::epsilon() * 1e-3) {
            singular_ = true;
            lu_(k, k) = 0.0;
            continue;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
            sign_ = -sign_;
        }
        const double inv = 1.0 / lu_(k, k);
        const std::size_t tail = n_ - k - 1;
        for (std::size_t i = k + 1; i < n_; ++i) {
            const double f = lu_(i, k) * inv;
            lu_(i, k) = f;
            if (f != 0.0 && tail > 0) {
                kernels::active().axpy(tail, -f, &lu_(k, k + 1), &lu_(i, k + 1));
            }
        }
    }
}

double LuDecomposition::determinant() const {
    if (singular_) return 0.0;
    double d = sign_;
    for (std::size_t i = 0; i < n_; ++i) d *= lu_(i, i);
    return d;
}

Vector LuDecomposition::solve(std::span<const double> b) const {
    if (singular_) throw NumericalError("linear solve with a singular matrix");
    Vector x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n_; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_(ii, j) * x[j];
        x[ii] = s / lu_(ii, ii);
    }
    return x;
}

Matrix LuDecomposition::solve(const Matrix& b) const {
    if (singular_) throw NumericalError("linear solve with a singular matrix");
    assert(b.rows() == n_);
    const std::size_t m = b.cols();
    const auto& k = kernels::active();
    Matrix x(n_, m);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto src = b.row(perm_[i]);
        std::copy(src.begin(), src.end(), x.row(i).begin());
    }
    // Row-oriented substitutions so the inner loops are axpy over the right-hand sides.
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double l = lu_(i, j);
            if (l != 0.0) k.axpy(m, -l, x.row(j).data(), x.row(i).data());
        }
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n_; ++j) {
            const double u = lu_(ii, j);
            if (u != 0.0) k.axpy(m, -u, x.row(j).data(), x.row(ii).data());
        }
        const double inv = 1.0 / lu_(ii, ii);
        for (double& v : x.row(ii)) v *= inv;
    }
    return x;
}

Vector LuDecomposition::solve_left(std::span<const double> b) const {
    // x A = b  <=>  A^T x^T = b^T with A = P^T L U.
    if (singular_) throw NumericalError("linear solve with a singular matrix");
    Vector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
        double s = y[i];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * y[j];
        y[i] = s / lu_(i, i);
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_(j, ii) * y[j];
        y[ii] = s;
    }
    Vector x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
    return x;
}

Matrix LuDecomposition::inverse() const { return solve(Matrix::identity(n_)); }

InverseResult inverse_with_condition(const Matrix& a) {
    LuDecomposition lu(a);
    if (lu.singular()) {
        return {Matrix(a.rows(), a.cols(), std::numeric_limits<double>::quiet_NaN()), 0.0};
    }
    InverseResult r{lu.inverse(), 0.0};
    const double denom = norm1(a) * norm1(r.inverse);
    r.rcond = denom > 0.0 ? 1.0 / denom : 0.0;
    return r;
}

template <typename T>
T determinant(std::vector<T> a, std::size_t n) {
    assert(a.size() == n * n);
    T det = T(1.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a[i * n + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return T(0.0);
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            det = -det;
        }
        const T pivot = a[k * n + k];
        det *= pivot;
        for (std::size_t i = k + 1; i < n; ++i) {
            const T f = a[i * n + k] / pivot;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return det;
}

template double determinant<double>(std::vector<double>, std::size_t);
template std::complex<double> determinant<std::complex<double>>(std::vector<std::complex<double>>, std::size_t);

Vector stationary_distribution(const Matrix& p) {
    const std::size_t n = p.rows();
    // x (P - I) = 0 with the first column replaced by ones: x M = e_0.
    Matrix m = p - Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) m(i, 0) = 1.0;
    LuDecomposition lu(m);
    if (lu.singular()) {
        throw PreconditionError("stationary distribution is not unique (reducible matrix)");
    }
    Vector rhs(n, 0.0);
    rhs[0] = 1.0;
    Vector x = lu.solve_left(rhs);
    for (double& v : x) {
        if (v < 0.0 && v > -1e-15) v = 0.0;
    }
    return x;
}

double balance_residual(std::span<const double> x, const Matrix& p) {
    const Vector y = x * p;
    double r = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) r = std::max(r, std::fabs(y[j] - x[j]));
    return r;
}

}  // namespace qbd
