#include "qbd/kernels.hpp"

#include <cmath>

namespace qbd::kernels {
namespace {

double dot_scalar(std::size_t n, const double* a, const double* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void gemv_scalar(std::size_t m, std::size_t n, const double* a, const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = dot_scalar(n, a + i * n, x);
    }
}

void gevm_scalar(std::size_t m, std::size_t n, const double* x, const double* a, double* y) {
    for (std::size_t j = 0; j < n; ++j) {
        y[j] = 0.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (x[i] != 0.0) {
            axpy_scalar(n, x[i], a + i * n, y);
        }
    }
}

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double beta, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (beta == 0.0) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        } else if (beta != 1.0) {
            for (std::size_t j = 0; j < n; ++j) ci[j] *= beta;
        }
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            if (ai[p] != 0.0) {
                axpy_scalar(n, ai[p], b + p * n, ci);
            }
        }
    }
}

double max_abs_diff_scalar(std::size_t n, const double* a, const double* b) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > m || std::isnan(d)) m = d;
    }
    return m;
}

constexpr KernelTable kScalar{
    "scalar",      dot_scalar,  axpy_scalar,        gemv_scalar,
    gevm_scalar,   gemm_scalar, max_abs_diff_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace qbd::kernels
