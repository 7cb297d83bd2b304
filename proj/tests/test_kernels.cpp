#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cbleak/kernels.hpp"
#include "cbleak/rng.hpp"

using namespace cbleak;

namespace {

std::vector<double> random_vec(std::size_t n, RngStream& stream) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = stream.next_gaussian();
    }
    return v;
}

std::vector<double> random_int_vec(std::size_t n, RngStream& stream) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = static_cast<double>(static_cast<int>(stream.next_below(17)) - 8);
    }
    return v;
}

// Both summation orders are accurate to ~n*eps relative to the magnitude
// of the terms, so compare against that scale.
double tolerance(const std::vector<double>& terms) {
    double mag = 1.0;
    for (double t : terms) {
        mag += std::abs(t);
    }
    return 1e-10 * mag;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33, 100, 1000, 65537};

void check_ops_match(const kernels::Ops& a, const kernels::Ops& b) {
    RngStream stream(2024, "kernel-equivalence");
    for (std::size_t n : kSizes) {
        CAPTURE(n);
        const auto x = random_vec(n, stream);
        const auto y = random_vec(n, stream);

        std::vector<double> terms(n);
        for (std::size_t i = 0; i < n; ++i) {
            terms[i] = x[i] * y[i];
        }
        CHECK(std::abs(a.dot(x.data(), y.data(), n) - b.dot(x.data(), y.data(), n)) <=
              tolerance(terms));
        CHECK(std::abs(a.sum(x.data(), n) - b.sum(x.data(), n)) <= tolerance(x));

        std::vector<double> ya = y;
        std::vector<double> yb = y;
        a.axpy(0.77, x.data(), ya.data(), n);
        b.axpy(0.77, x.data(), yb.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-14));
        }
    }

    // integer-valued doubles add exactly, so results must match bit for bit
    for (std::size_t n : {5u, 64u, 257u}) {
        const auto x = random_int_vec(n, stream);
        const auto y = random_int_vec(n, stream);
        CHECK(a.dot(x.data(), y.data(), n) == b.dot(x.data(), y.data(), n));
        CHECK(a.sum(x.data(), n) == b.sum(x.data(), n));
    }
}

}  // namespace

TEST_CASE("scalar kernels compute the obvious answers") {
    const auto& ops = kernels::scalar_ops();
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, 5.0, 6.0};
    CHECK(ops.dot(a, b, 3) == 32.0);
    CHECK(ops.sum(a, 3) == 6.0);
    double y[] = {1.0, 1.0, 1.0};
    ops.axpy(2.0, a, y, 3);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 5.0);
    CHECK(y[2] == 7.0);
    CHECK(ops.dot(a, b, 0) == 0.0);
    CHECK(ops.sum(a, 0) == 0.0);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels match the scalar reference") {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) {
        MESSAGE("CPU lacks AVX2+FMA; skipping");
        return;
    }
    check_ops_match(kernels::scalar_ops(), kernels::avx2_ops());
}
#endif

#if defined(__aarch64__)
TEST_CASE("neon kernels match the scalar reference") {
    check_ops_match(kernels::scalar_ops(), kernels::neon_ops());
}
#endif

TEST_CASE("active kernel set is usable") {
    const auto& ops = kernels::active();
    CHECK(!ops.name.empty());
    const double a[] = {1.5, -2.5};
    CHECK(ops.sum(a, 2) == doctest::Approx(-1.0));
}
