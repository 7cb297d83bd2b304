#pragma once

#include <cstddef>
#include <string_view>

namespace cbleak::kernels {

// Dense inner-loop primitives shared by the generator, the neural nets and
// the entropy evaluation. The scalar implementations are the reference;
// wider variants are compiled per ISA and one set is selected at process
// start. All pointers may be unaligned; n may be zero.
struct Ops {
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    std::string_view name;
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
// Callable only on CPUs with AVX2 and FMA; active() checks before use.
const Ops& avx2_ops();
#endif

#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// The runtime-selected implementation. Chosen once per process from CPU
// capabilities; the env var CBLEAK_KERNELS=scalar|avx2|neon forces a
// variant (unsupported requests fall back to scalar).
const Ops& active();

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}

inline double sum(const double* x, std::size_t n) {
    return active().sum(x, n);
}

}  // namespace cbleak::kernels
