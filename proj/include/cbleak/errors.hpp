#pragma once

#include <stdexcept>
#include <string>

namespace cbleak {

// Invalid parameters throw std::invalid_argument directly; the types below
// cover the error cases callers are expected to branch on.

struct DegenerateSplitError : std::runtime_error {
    explicit DegenerateSplitError(const std::string& what) : std::runtime_error(what) {}
};

struct TrainingDivergedError : std::runtime_error {
    TrainingDivergedError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_index(epoch) {}
    std::size_t epoch_index;
};

// Unreadable or malformed input files (dataset binaries, config files).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cbleak
