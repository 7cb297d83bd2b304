#pragma once

#include <span>
#include <vector>

namespace cbleak {

// Probability floor applied before any logarithm and to saturated
// sigmoid/softmax outputs.
inline constexpr double kProbEps = 1e-12;

// Overflow-safe logistic function, clamped to [kProbEps, 1 - kProbEps].
double sigmoid(double z);

void sigmoid_vec(std::span<const double> z, std::span<double> out);
std::vector<double> sigmoid_vec(std::span<const double> z);

// Max-subtracted softmax; outputs are floored at kProbEps and renormalized,
// so every entry is strictly inside (0, 1) and rows sum to 1.
void softmax_vec(std::span<const double> z, std::span<double> out);
std::vector<double> softmax_vec(std::span<const double> z);

// -ln(max(p, kProbEps)); p must lie in [0, 1].
double clipped_neg_log(double p);

}  // namespace cbleak
