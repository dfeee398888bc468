#include <cstdlib>
#include <cstring>

#include "nsv/simd.hpp"

namespace nsv::simd {

#if defined(NSV_HAVE_AVX2)
const Ops& avx2_table();
#endif

const Ops* avx2_ops() {
#if defined(NSV_HAVE_AVX2)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const Ops& active() {
    static const Ops& chosen = [] () -> const Ops& {
        const char* env = std::getenv("NSV_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return scalar_ops();
        if (const Ops* v = avx2_ops()) return *v;
        return scalar_ops();
    }();
    return chosen;
}

}  // namespace nsv::simd
