#include <cstdlib>
#include <string_view>

#include "qbd/kernels.hpp"

namespace qbd::kernels {

#if defined(QBD_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

const KernelTable* avx2_kernels() {
#if defined(QBD_HAVE_AVX2)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable* table = [] {
        const char* forced = std::getenv("QBD_SIMD");
        if (forced != nullptr && std::string_view(forced) == "scalar") {
            return &scalar_kernels();
        }
        const KernelTable* simd = avx2_kernels();
        return simd != nullptr ? simd : &scalar_kernels();
    }();
    return *table;
}

}  // namespace qbd::kernels
