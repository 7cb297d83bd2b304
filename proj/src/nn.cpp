#include "cbleak/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "cbleak/kernels.hpp"
#include "cbleak/mathfn.hpp"

namespace cbleak {

Dense make_dense(std::size_t out, std::size_t in, RngStream& stream, double weight_scale) {
    Dense layer;
    layer.w = Matrix(out, in);
    for (std::size_t i = 0; i < layer.w.size(); ++i) {
        layer.w.data()[i] = weight_scale * stream.next_gaussian();
    }
    layer.b.assign(out, 0.0);
    return layer;
}

Matrix dense_forward(const Dense& layer, const Matrix& x) {
    Matrix y = gemm_nt(x, layer.w);
    add_row_vector(y, layer.b);
    return y;
}

Matrix dense_backward(const Dense& layer, const Matrix& x, const Matrix& dy, DenseGrads& grads) {
    grads.dw = gemm_tn(dy, x);  // out x in
    grads.db.assign(layer.b.size(), 0.0);
    for (std::size_t i = 0; i < dy.rows(); ++i) {
        kernels::axpy(1.0, dy.row(i), grads.db.data(), dy.cols());
    }
    return gemm_nn(dy, layer.w);  // m x in
}

void relu_inplace(Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.data()[i] < 0.0) {
            m.data()[i] = 0.0;
        }
    }
}

Matrix relu_backward(const Matrix& pre, const Matrix& dy) {
    if (pre.rows() != dy.rows() || pre.cols() != dy.cols()) {
        throw std::invalid_argument("relu_backward: shape mismatch");
    }
    Matrix dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        if (pre.data()[i] <= 0.0) {
            dx.data()[i] = 0.0;
        }
    }
    return dx;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        softmax_vec(logits.row_span(i), out.row_span(i));
    }
    return out;
}

double cross_entropy(const Matrix& probs, std::span<const std::uint32_t> y) {
    if (probs.rows() != y.size() || probs.rows() == 0) {
        throw std::invalid_argument("cross_entropy: label count mismatch or empty");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        total += clipped_neg_log(probs(i, y[i] - 1));
    }
    return total / static_cast<double>(probs.rows());
}

Matrix cross_entropy_logit_grad(const Matrix& probs, std::span<const std::uint32_t> y) {
    Matrix g = probs;
    const double inv_m = 1.0 / static_cast<double>(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        g(i, y[i] - 1) -= 1.0;
        for (std::size_t j = 0; j < probs.cols(); ++j) {
            g(i, j) *= inv_m;
        }
    }
    return g;
}

AdamState make_adam_state(const Dense& layer) {
    AdamState st;
    st.mw = Matrix(layer.w.rows(), layer.w.cols());
    st.vw = Matrix(layer.w.rows(), layer.w.cols());
    st.mb.assign(layer.b.size(), 0.0);
    st.vb.assign(layer.b.size(), 0.0);
    return st;
}

void adam_update(Dense& layer, const DenseGrads& grads, AdamState& st, const AdamConfig& cfg) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    auto step_one = [&](double& param, double g, double& m, double& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        param -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
    };
    for (std::size_t i = 0; i < layer.w.size(); ++i) {
        step_one(layer.w.data()[i], grads.dw.data()[i], st.mw.data()[i], st.vw.data()[i]);
    }
    for (std::size_t i = 0; i < layer.b.size(); ++i) {
        step_one(layer.b[i], grads.db[i], st.mb[i], st.vb[i]);
    }
}

}  // namespace cbleak
