#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbleak/classifiers.hpp"
#include "cbleak/matrix.hpp"

namespace cbleak {

struct CalibrationResult {
    double temperature = 1.0;
    double nll_before = 0.0;  // nats, at T = 1
    double nll_after = 0.0;   // nats, at the fitted T; never above nll_before
};

inline constexpr double kTemperatureLo = 0.05;
inline constexpr double kTemperatureHi = 20.0;

// softmax(ln(clamp(p)) / t); argmax is preserved for every t > 0.
void apply_temperature(std::span<const double> row, double t, std::span<double> out);
std::vector<double> apply_temperature(std::span<const double> row, double t);

// Mean NLL of the labels under temperature-scaled probs.
double temperature_nll(const Matrix& probs, std::span<const std::uint32_t> y, double t);

// Golden-section search for the T in [0.05, 20] minimizing validation NLL
// (absolute tolerance 1e-4); falls back to T = 1 if the search cannot beat it.
CalibrationResult fit_temperature(const Matrix& probs, std::span<const std::uint32_t> y);

// Fits on the model's own validation predictions and installs the result.
CalibrationResult calibrate_classifier(ProbClassifier& model, const Matrix& x_val,
                                       std::span<const std::uint32_t> y_val);

}  // namespace cbleak
