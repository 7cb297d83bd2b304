#pragma once

#include "cbleak/classifiers.hpp"
#include "cbleak/nn.hpp"

namespace cbleak {

// One-hidden-layer softmax network: in -> hidden (ReLU) -> classes.
struct MlpNet {
    Dense l1;
    Dense l2;

    Matrix forward_logits(const Matrix& x) const;
    Matrix forward_probs(const Matrix& x) const;

    struct Grads {
        DenseGrads g1, g2;
    };
    // Mean cross-entropy on (x, y); fills grads when non-null.
    double loss(const Matrix& x, std::span<const std::uint32_t> y, Grads* grads = nullptr) const;
};

class MlpClassifier final : public ProbClassifier {
public:
    MlpClassifier(MlpNet net, std::size_t classes);

    // Defaults: hidden 128, adaptive-moment steps (lr 1e-3, decays
    // 0.9/0.999), 20 epochs, batch 64, minibatches reshuffled per epoch.
    // Overrides: hidden, epochs, batch, lr.
    static std::unique_ptr<MlpClassifier> train(const Matrix& x, std::span<const std::uint32_t> y,
                                                std::size_t classes, const Hyper& hyper,
                                                RngStream& stream);

    const MlpNet& net() const { return net_; }

    Matrix predict_base(const Matrix& x) const override;

private:
    MlpNet net_;
};

}  // namespace cbleak
