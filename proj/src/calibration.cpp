#include "cbleak/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cbleak/mathfn.hpp"

namespace cbleak {

void apply_temperature(std::span<const double> row, double t, std::span<double> out) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("apply_temperature: temperature must be > 0");
    }
    if (out.size() != row.size()) {
        throw std::invalid_argument("apply_temperature: output length mismatch");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = std::log(std::max(row[j], kProbEps)) / t;
    }
    softmax_vec(out, out);  // softmax_vec is alias-safe
}

std::vector<double> apply_temperature(std::span<const double> row, double t) {
    std::vector<double> out(row.size());
    apply_temperature(row, t, out);
    return out;
}

double temperature_nll(const Matrix& probs, std::span<const std::uint32_t> y, double t) {
    if (probs.rows() != y.size() || y.empty()) {
        throw std::invalid_argument("temperature_nll: label count mismatch or empty");
    }
    std::vector<double> scaled(probs.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        apply_temperature(probs.row_span(i), t, scaled);
        total += clipped_neg_log(scaled[y[i] - 1]);
    }
    return total / static_cast<double>(probs.rows());
}

CalibrationResult fit_temperature(const Matrix& probs, std::span<const std::uint32_t> y) {
    if (probs.rows() == 0 || y.empty()) {
        throw std::invalid_argument("fit_temperature: empty validation set");
    }
    if (probs.rows() != y.size()) {
        throw std::invalid_argument("fit_temperature: label count mismatch");
    }
    const auto nll = [&](double t) { return temperature_nll(probs, y, t); };

    // Golden-section search on [kTemperatureLo, kTemperatureHi]; the
    // validation NLL is unimodal in T in practice.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kTemperatureLo;
    double b = kTemperatureHi;
    double c = b - (b - a) * invphi;
    double d = a + (b - a) * invphi;
    double fc = nll(c);
    double fd = nll(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = nll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = nll(d);
        }
    }
    double best_t = 0.5 * (a + b);
    double best_nll = nll(best_t);

    // T = 1 is always in the search space; never end up worse than it.
    const double base_nll = nll(1.0);
    if (base_nll <= best_nll) {
        best_t = 1.0;
        best_nll = base_nll;
    }

    CalibrationResult result;
    result.temperature = best_t;
    result.nll_before = base_nll;
    result.nll_after = best_nll;
    return result;
}

CalibrationResult calibrate_classifier(ProbClassifier& model, const Matrix& x_val,
                                       std::span<const std::uint32_t> y_val) {
    model.set_temperature(1.0);
    const Matrix probs = model.predict_proba(x_val);
    const CalibrationResult result = fit_temperature(probs, y_val);
    model.set_temperature(result.temperature);
    return result;
}

}  // namespace cbleak
