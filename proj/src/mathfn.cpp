#include "cbleak/mathfn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbleak {

double sigmoid(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

void sigmoid_vec(std::span<const double> z, std::span<double> out) {
    if (out.size() != z.size()) {
        throw std::invalid_argument("sigmoid_vec: output length mismatch");
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = sigmoid(z[i]);
    }
}

std::vector<double> sigmoid_vec(std::span<const double> z) {
    std::vector<double> out(z.size());
    sigmoid_vec(z, out);
    return out;
}

void softmax_vec(std::span<const double> z, std::span<double> out) {
    if (z.empty()) {
        throw std::invalid_argument("softmax_vec: empty input");
    }
    if (out.size() != z.size()) {
        throw std::invalid_argument("softmax_vec: output length mismatch");
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - zmax);
        sum += out[i];
    }
    double clamped_sum = 0.0;
    for (auto& p : out) {
        p = std::max(p / sum, kProbEps);
        clamped_sum += p;
    }
    for (auto& p : out) {
        p /= clamped_sum;
    }
}

std::vector<double> softmax_vec(std::span<const double> z) {
    std::vector<double> out(z.size());
    softmax_vec(z, out);
    return out;
}

double clipped_neg_log(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("clipped_neg_log: p outside [0,1]");
    }
    return -std::log(std::max(p, kProbEps));
}

}  // namespace cbleak
