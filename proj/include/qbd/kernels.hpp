#pragma once

// Dense double-precision inner loops used by the matrix solvers.
//
// Every kernel has a scalar reference implementation. On x86-64 an AVX2/FMA
// variant is compiled into a separate translation unit and selected at
// runtime when the CPU supports it. Setting QBD_SIMD=scalar in the
// environment forces the reference kernels.

#include <cstddef>
#include <string_view>

namespace qbd::kernels {

struct KernelTable {
    std::string_view name;

    /// Sum of a[i] * b[i].
    double (*dot)(std::size_t n, const double* a, const double* b);

    /// y += alpha * x.
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

    /// y = A x for a row-major m x n matrix A.
    void (*gemv)(std::size_t m, std::size_t n, const double* a, const double* x, double* y);

    /// y = x A for a row-major m x n matrix A (row vector times matrix).
    void (*gevm)(std::size_t m, std::size_t n, const double* x, const double* a, double* y);

    /// C = A B + beta C; A is m x k, B is k x n, C is m x n, all row-major.
    void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double beta, double* c);

    /// max_i |a[i] - b[i]|.
    double (*max_abs_diff)(std::size_t n, const double* a, const double* b);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Kernel table chosen once per process.
const KernelTable& active();

}  // namespace qbd::kernels
