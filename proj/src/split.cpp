#include "cbleak/split.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cbleak/errors.hpp"
#include "cbleak/rng.hpp"

namespace cbleak {

SplitIndices split_dataset(std::size_t n, SplitRatios ratios, std::uint64_t seed) {
    if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0)) {
        throw std::invalid_argument("split_dataset: ratios must be positive");
    }
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw std::invalid_argument("split_dataset: ratios must sum to 1");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream stream(seed, "split");
    stream.shuffle(order);

    const std::size_t n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.val));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        throw DegenerateSplitError("split_dataset: a split part is empty (n=" + std::to_string(n) + ")");
    }

    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return out;
}

}  // namespace cbleak
