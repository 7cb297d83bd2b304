#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbleak {

// splitmix64 finalizer; used for seeding and for deriving per-cell seeds.
std::uint64_t mix64(std::uint64_t x);

// Deterministic labelled random stream (xoshiro256**). Same (seed, label)
// reproduces the same sequence within one build of the artifact; distinct
// labels from one seed give decorrelated streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }

    // Child stream with an extended label, e.g. derive("tree-3").
    RngStream derive(std::string_view sublabel) const;

    std::uint64_t next_u64();
    std::uint64_t next_below(std::uint64_t bound);  // uniform in [0, bound), bound >= 1
    double next_uniform();                          // [0, 1)
    double next_gaussian();                         // N(0, 1), Box-Muller
    bool next_bernoulli(double p);

    // Inverse-CDF draw from a probability vector; ties resolve to the
    // lower index. Returns a 0-based index.
    std::size_t next_categorical(std::span<const double> probs);

    void shuffle(std::span<std::size_t> values);

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::string label_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// len i.i.d. draws from Normal(mean, stddev^2); stddev == 0 yields the
// constant mean, stddev < 0 is an error.
std::vector<double> sample_gaussian(RngStream& stream, std::size_t len, double mean, double stddev);

}  // namespace cbleak
