// AVX2/FMA variants of the dense kernels. This file is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPU check.

#include "qbd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace qbd::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(std::size_t n, const double* a, const double* b) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void gemv_avx2(std::size_t m, std::size_t n, const double* a, const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = dot_avx2(n, a + i * n, x);
    }
}

void gevm_avx2(std::size_t m, std::size_t n, const double* x, const double* a, double* y) {
    for (std::size_t j = 0; j < n; ++j) {
        y[j] = 0.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (x[i] != 0.0) {
            axpy_avx2(n, x[i], a + i * n, y);
        }
    }
}

// One row of C, 16 columns at a time held in registers across the k loop.
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
               double beta, double* c) {
    const __m256d vbeta = _mm256_set1_pd(beta);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        std::size_t j = 0;
        for (; j + 16 <= n; j += 16) {
            __m256d c0 = _mm256_setzero_pd();
            __m256d c1 = _mm256_setzero_pd();
            __m256d c2 = _mm256_setzero_pd();
            __m256d c3 = _mm256_setzero_pd();
            if (beta != 0.0) {
                c0 = _mm256_mul_pd(vbeta, _mm256_loadu_pd(ci + j));
                c1 = _mm256_mul_pd(vbeta, _mm256_loadu_pd(ci + j + 4));
                c2 = _mm256_mul_pd(vbeta, _mm256_loadu_pd(ci + j + 8));
                c3 = _mm256_mul_pd(vbeta, _mm256_loadu_pd(ci + j + 12));
            }
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = ai[p];
                if (aip == 0.0) continue;
                const __m256d va = _mm256_set1_pd(aip);
                const double* bp = b + p * n + j;
                c0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp), c0);
                c1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + 4), c1);
                c2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + 8), c2);
                c3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + 12), c3);
            }
            _mm256_storeu_pd(ci + j, c0);
            _mm256_storeu_pd(ci + j + 4, c1);
            _mm256_storeu_pd(ci + j + 8, c2);
            _mm256_storeu_pd(ci + j + 12, c3);
        }
        for (; j + 4 <= n; j += 4) {
            __m256d c0 = beta != 0.0 ? _mm256_mul_pd(vbeta, _mm256_loadu_pd(ci + j)) : _mm256_setzero_pd();
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = ai[p];
                if (aip == 0.0) continue;
                c0 = _mm256_fmadd_pd(_mm256_set1_pd(aip), _mm256_loadu_pd(b + p * n + j), c0);
            }
            _mm256_storeu_pd(ci + j, c0);
        }
        for (; j < n; ++j) {
            double s = beta != 0.0 ? beta * ci[j] : 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                s += ai[p] * b[p * n + j];
            }
            ci[j] = s;
        }
    }
}

double max_abs_diff_avx2(std::size_t n, const double* a, const double* b) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    __m256d nan_seen = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(d, d, _CMP_UNORD_Q));
        acc = _mm256_max_pd(acc, d);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = lanes[0];
    for (int l = 1; l < 4; ++l) {
        if (lanes[l] > m) m = lanes[l];
    }
    if (_mm256_movemask_pd(nan_seen) != 0) {
        m = std::nan("");
    }
    for (; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > m || std::isnan(d)) m = d;
    }
    return m;
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{
    "avx2",    dot_avx2,  axpy_avx2,         gemv_avx2,
    gevm_avx2, gemm_avx2, max_abs_diff_avx2,
};

}  // namespace qbd::kernels
