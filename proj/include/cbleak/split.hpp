#pragma once

#include <cstdint>
#include <vector>

namespace cbleak {

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

// Deterministic shuffle of 0..n-1 by seed; sizes are floor(n*train),
// floor(n*val) and the remainder. Throws DegenerateSplitError if any part
// comes out empty and std::invalid_argument for bad ratios.
SplitIndices split_dataset(std::size_t n, SplitRatios ratios, std::uint64_t seed);

}  // namespace cbleak
