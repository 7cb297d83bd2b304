#include "cbleak/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cbleak {
namespace {

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : seed_(seed), label_(label) {
    std::uint64_t x = seed ^ mix64(fnv1a(label));
    for (auto& s : s_) {
        x = mix64(x);
        s = x;
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
        s_[0] = 1;  // xoshiro state must not be all zero
    }
}

RngStream RngStream::derive(std::string_view sublabel) const {
    std::string child = label_;
    child += '/';
    child += sublabel;
    return RngStream(seed_, child);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("RngStream::next_below: bound must be positive");
    }
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return x % bound;
}

double RngStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

bool RngStream::next_bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("RngStream::next_bernoulli: p outside [0,1]");
    }
    return next_uniform() < p;
}

std::size_t RngStream::next_categorical(std::span<const double> probs) {
    if (probs.empty()) {
        throw std::invalid_argument("RngStream::next_categorical: empty probability vector");
    }
    const double u = next_uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) {
            return i;
        }
    }
    return probs.size() - 1;
}

void RngStream::shuffle(std::span<std::size_t> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = next_below(i);
        std::swap(values[i - 1], values[j]);
    }
}

std::vector<double> sample_gaussian(RngStream& stream, std::size_t len, double mean, double stddev) {
    if (stddev < 0.0 || !std::isfinite(stddev) || !std::isfinite(mean)) {
        throw std::invalid_argument("sample_gaussian: stddev must be finite and >= 0");
    }
    if (len < 1) {
        throw std::invalid_argument("sample_gaussian: len must be >= 1");
    }
    std::vector<double> out(len);
    if (stddev == 0.0) {
        for (auto& v : out) {
            v = mean;
        }
        return out;
    }
    for (auto& v : out) {
        v = mean + stddev * stream.next_gaussian();
    }
    return out;
}

}  // namespace cbleak
