#include "cbleak/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace cbleak::kernels {
namespace {

const Ops& detect() {
    const char* env = std::getenv("CBLEAK_KERNELS");
    const std::string_view want = env ? std::string_view(env) : std::string_view();
    if (want == "scalar") {
        return scalar_ops();
    }
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    const bool have_avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (have_avx2 && (want.empty() || want == "avx2")) {
        return avx2_ops();
    }
#endif
#if defined(__aarch64__)
    if (want.empty() || want == "neon") {
        return neon_ops();
    }
#endif
    return scalar_ops();
}

}  // namespace

const Ops& active() {
    static const Ops& ops = detect();
    return ops;
}

}  // namespace cbleak::kernels
