#include "vstain/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace vstain::simd {

std::string_view to_string(Backend b) noexcept {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &detail::scalar_table();
        case Backend::avx2:
#if defined(VSTAIN_HAVE_AVX2)
            __builtin_cpu_init();
            if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &detail::avx2_table();
#endif
            return nullptr;
        case Backend::neon:
#if defined(VSTAIN_HAVE_NEON)
            return &detail::neon_table();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
        if (table_for(b) != nullptr) out.push_back(b);
    }
    return out;
}

namespace {

const KernelTable& select() {
    if (const char* env = std::getenv("VSTAIN_SIMD")) {
        const std::string want(env);
        for (Backend b : available_backends()) {
            if (to_string(b) == want) return *table_for(b);
        }
    }
    return *table_for(available_backends().back());
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace vstain::simd
