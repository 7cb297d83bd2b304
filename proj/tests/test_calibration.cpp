#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cbleak/calibration.hpp"
#include "cbleak/mathfn.hpp"
#include "cbleak/mlp.hpp"

using namespace cbleak;

namespace {

// probs = softmax(scale * z) with labels drawn from softmax(z); the NLL-
// optimal temperature is `scale`.
void make_calibration_case(std::size_t n, std::size_t classes, double scale, Matrix& probs,
                           std::vector<std::uint32_t>& labels, std::uint64_t seed) {
    RngStream s(seed, "calibration-case");
    probs = Matrix(n, classes);
    labels.resize(n);
    std::vector<double> z(classes), scaled(classes), p(classes);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < classes; ++j) {
            z[j] = 1.5 * s.next_gaussian();
            scaled[j] = scale * z[j];
        }
        softmax_vec(z, p);
        labels[i] = static_cast<std::uint32_t>(s.next_categorical(p) + 1);
        softmax_vec(scaled, probs.row_span(i));
    }
}

// independent oracle: exhaustive 1e-3 grid over the search interval
double grid_search_temperature(const Matrix& probs, std::span<const std::uint32_t> y) {
    double best_t = kTemperatureLo;
    double best_nll = temperature_nll(probs, y, best_t);
    for (double t = kTemperatureLo; t <= kTemperatureHi + 1e-12; t += 1e-3) {
        const double nll = temperature_nll(probs, y, t);
        if (nll < best_nll) {
            best_nll = nll;
            best_t = t;
        }
    }
    return best_t;
}

}  // namespace

TEST_CASE("apply_temperature with T = 1 is the identity on distributions") {
    const std::vector<double> row{0.6, 0.3, 0.1};
    const auto out = apply_temperature(row, 1.0);
    for (std::size_t j = 0; j < row.size(); ++j) {
        CHECK(out[j] == doctest::Approx(row[j]).epsilon(1e-12));
    }
}

TEST_CASE("apply_temperature flattens toward uniform as T grows") {
    const std::vector<double> row{0.7, 0.2, 0.1};
    const auto out = apply_temperature(row, 1e6);
    for (double p : out) {
        CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
    }
    CHECK_THROWS_AS(apply_temperature(row, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(apply_temperature(row, -2.0), std::invalid_argument);
}

TEST_CASE("apply_temperature never changes the argmax") {
    RngStream s(6, "argmax");
    std::vector<double> z(5), p(5);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto& v : z) {
            v = 2.0 * s.next_gaussian();
        }
        softmax_vec(z, p);
        const auto before = argmax_label(p);
        const double t = std::exp(2.0 * s.next_gaussian());
        const auto scaled = apply_temperature(p, std::clamp(t, 0.01, 100.0));
        CHECK(argmax_label(scaled) == before);
    }
}

TEST_CASE("fit_temperature recovers T = 1 from self-consistent probabilities") {
    Matrix probs;
    std::vector<std::uint32_t> labels;
    make_calibration_case(8000, 5, 1.0, probs, labels, 11);
    const CalibrationResult result = fit_temperature(probs, labels);
    CHECK(result.temperature >= 0.9);
    CHECK(result.temperature <= 1.1);
    CHECK(result.nll_after <= result.nll_before + 1e-12);
}

TEST_CASE("fit_temperature recovers T = 2 from twice-scaled logits") {
    Matrix probs;
    std::vector<std::uint32_t> labels;
    make_calibration_case(8000, 5, 2.0, probs, labels, 12);
    const CalibrationResult result = fit_temperature(probs, labels);
    CHECK(result.temperature >= 1.8);
    CHECK(result.temperature <= 2.2);
}

TEST_CASE("golden-section agrees with the exhaustive grid oracle") {
    Matrix probs;
    std::vector<std::uint32_t> labels;
    make_calibration_case(1500, 4, 2.0, probs, labels, 13);
    const CalibrationResult result = fit_temperature(probs, labels);
    const double oracle = grid_search_temperature(probs, labels);
    CHECK(std::abs(result.temperature - oracle) <= 2e-3);
}

TEST_CASE("fitted NLL never exceeds the T = 1 NLL") {
    RngStream s(14, "mismatch");
    for (int trial = 0; trial < 5; ++trial) {
        Matrix probs(300, 3);
        std::vector<std::uint32_t> labels(300);
        std::vector<double> z(3);
        for (std::size_t i = 0; i < 300; ++i) {
            for (auto& v : z) {
                v = 3.0 * s.next_gaussian();
            }
            softmax_vec(z, probs.row_span(i));
            labels[i] = static_cast<std::uint32_t>(s.next_below(3) + 1);
        }
        const CalibrationResult result = fit_temperature(probs, labels);
        CHECK(result.nll_after <= result.nll_before + 1e-12);
        CHECK(result.temperature >= kTemperatureLo);
        CHECK(result.temperature <= kTemperatureHi);
    }
}

TEST_CASE("fit_temperature is invariant to row order") {
    Matrix probs;
    std::vector<std::uint32_t> labels;
    make_calibration_case(1000, 4, 1.6, probs, labels, 15);

    std::vector<std::size_t> perm(labels.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RngStream s(16, "perm");
    s.shuffle(perm);
    const Matrix probs2 = take_rows(probs, perm);
    std::vector<std::uint32_t> labels2(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        labels2[i] = labels[perm[i]];
    }

    const CalibrationResult a = fit_temperature(probs, labels);
    const CalibrationResult b = fit_temperature(probs2, labels2);
    CHECK(a.temperature == doctest::Approx(b.temperature).epsilon(1e-9));
}

TEST_CASE("calibrating a model lowers validation NLL and preserves accuracy exactly") {
    RngStream data_stream(18, "cal-model");
    const std::size_t n = 400;
    Matrix x(n, 4);
    std::vector<std::uint32_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            x(i, j) = data_stream.next_gaussian();
        }
        y[i] = x(i, 0) + 0.4 * data_stream.next_gaussian() > 0 ? 1 : 2;
    }
    const Matrix x_val = take_rows(x, std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9,
                                                               10, 11, 12, 13, 14, 15});
    const std::vector<std::uint32_t> y_val(y.begin(), y.begin() + 16);

    RngStream s(19, "cal-train");
    auto model = MlpClassifier::train(x, y, 2, {{"epochs", 5}}, s);
    const double acc_before = accuracy(*model, x, y);
    const CalibrationResult result = calibrate_classifier(*model, x_val, y_val);
    CHECK(model->temperature() == result.temperature);
    CHECK(result.nll_after <= result.nll_before + 1e-12);
    CHECK(accuracy(*model, x, y) == acc_before);  // argmax invariance, bit-exact
}

TEST_CASE("empty validation sets are rejected") {
    const Matrix empty(0, 3);
    const std::vector<std::uint32_t> none;
    CHECK_THROWS_AS(fit_temperature(empty, none), std::invalid_argument);
}
