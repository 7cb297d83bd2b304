#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbleak/matrix.hpp"
#include "cbleak/rng.hpp"

namespace cbleak {

// Fully connected layer, weights stored out x in.
struct Dense {
    Matrix w;
    std::vector<double> b;
};

struct DenseGrads {
    Matrix dw;
    std::vector<double> db;
};

// Gaussian init with the given scale; biases zero.
Dense make_dense(std::size_t out, std::size_t in, RngStream& stream, double weight_scale);

// x: m x in  ->  m x out
Matrix dense_forward(const Dense& layer, const Matrix& x);

// Given upstream dy (m x out) and the layer input x, fills grads and
// returns dx (m x in).
Matrix dense_backward(const Dense& layer, const Matrix& x, const Matrix& dy, DenseGrads& grads);

void relu_inplace(Matrix& m);
// Masks dy by pre > 0 elementwise.
Matrix relu_backward(const Matrix& pre, const Matrix& dy);

Matrix softmax_rows(const Matrix& logits);

// Mean clipped negative log-likelihood of the true labels (1-based).
double cross_entropy(const Matrix& probs, std::span<const std::uint32_t> y);

// d(loss)/d(logits) for softmax + mean cross-entropy: (p - onehot) / m.
Matrix cross_entropy_logit_grad(const Matrix& probs, std::span<const std::uint32_t> y);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Matrix mw, vw;
    std::vector<double> mb, vb;
    std::int64_t step = 0;
};

AdamState make_adam_state(const Dense& layer);
void adam_update(Dense& layer, const DenseGrads& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace cbleak
