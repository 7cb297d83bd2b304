#pragma once

#include <cstdint>
#include <span>

#include "cbleak/classifiers.hpp"
#include "cbleak/matrix.hpp"
#include "cbleak/split.hpp"
#include "cbleak/synthgen.hpp"

namespace cbleak {

// Estimated leakage I(y; chat | c) = H(y|c) - H(y|chat,c), both entropies
// from held-out cross-entropy of calibrated classifiers. Negative values
// are reported as computed, never clipped.
struct LeakageReport {
    double h_y_given_c = 0.0;       // nats, from g_b on c
    double h_y_given_chat_c = 0.0;  // nats, from g_a on [chat | c]
    double leakage = 0.0;           // h_y_given_c - h_y_given_chat_c, exact
    ClassifierKind kind = ClassifierKind::Gbt;
    double temperature_a = 1.0;
    double temperature_b = 1.0;
    double accuracy_a = 0.0;  // test accuracy of g_a
    double accuracy_b = 0.0;  // test accuracy of g_b
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    std::uint64_t split_seed = 0;
};

// Mean clipped negative log-likelihood of the true labels, in nats.
double estimate_entropy(const ProbClassifier& model, const Matrix& inputs,
                        std::span<const std::uint32_t> y);

// Splits 70/15/15, trains g_a on [chat | c] -> y and g_b on c -> y, fits
// both temperatures on the validation part, evaluates entropies on the
// test part.
LeakageReport measure_leakage(const Dataset& ds, ClassifierKind kind, std::uint64_t split_seed,
                              SplitRatios ratios = {});

// Same pipeline on bare tables; chat may be any numeric features.
LeakageReport measure_leakage_tables(const Matrix& chat, const Matrix& c,
                                     std::span<const std::uint32_t> y, std::size_t classes,
                                     ClassifierKind kind, std::uint64_t split_seed,
                                     SplitRatios ratios = {});

// Plug-in conditional mutual information I(y; chat | c) from empirical
// frequencies of fully discrete data. chat_bin and c must be 0/1 matrices
// and the joint support J * 2^(k_chat + k_c) must not exceed 2^16 cells.
double plugin_cmi_discrete(std::span<const std::uint32_t> y, const Matrix& chat_bin,
                           const Matrix& c);

}  // namespace cbleak
