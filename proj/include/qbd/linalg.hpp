#pragma once

// Small dense linear algebra for s0 x s0 blocks (s0 up to a few hundred).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qbd {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles with value semantics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t n) { return Matrix(n, n); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> values() const { return data_; }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    /// this += s * other
    Matrix& add_scaled(const Matrix& other, double s);

    Matrix transpose() const;
    Vector row_sums() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

/// y = A x
Vector operator*(const Matrix& a, std::span<const double> x);
/// y = x A (x is a row vector)
Vector operator*(std::span<const double> x, const Matrix& a);

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(std::span<const double> v);
double norm1(const Matrix& a);
double sum(std::span<const double> v);
double min_entry(const Matrix& a);

/// LU factorization with partial pivoting.
class LuDecomposition {
public:
    explicit LuDecomposition(const Matrix& a);

    bool singular() const { return singular_; }
    double determinant() const;

    /// Solves A X = B.
    Matrix solve(const Matrix& b) const;
    /// Solves A x = b.
    Vector solve(std::span<const double> b) const;
    /// Solves x A = b for a row vector x.
    Vector solve_left(std::span<const double> b) const;
    Matrix inverse() const;

private:
    std::size_t n_;
    Matrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
    bool singular_ = false;
};

/// Inverse with a reciprocal condition estimate 1 / (||A||_1 ||A^-1||_1).
struct InverseResult {
    Matrix inverse;
    double rcond = 0.0;
};
InverseResult inverse_with_condition(const Matrix& a);

/// Determinant by Gaussian elimination with partial pivoting; works for real and complex entries.
template <typename T>
T determinant(std::vector<T> a, std::size_t n);

extern template double determinant<double>(std::vector<double>, std::size_t);
extern template std::complex<double> determinant<std::complex<double>>(std::vector<std::complex<double>>,
                                                                       std::size_t);

/// Stationary probability vector of an irreducible stochastic matrix via the
/// balance system with one equation replaced by the normalization.
Vector stationary_distribution(const Matrix& p);

/// Row vector residual max_j |(x P - x)_j|.
double balance_residual(std::span<const double> x, const Matrix& p);

}  // namespace qbd
