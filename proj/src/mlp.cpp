#include "cbleak/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cbleak/mathfn.hpp"

namespace cbleak {

Matrix MlpNet::forward_logits(const Matrix& x) const {
    Matrix h = dense_forward(l1, x);
    relu_inplace(h);
    return dense_forward(l2, h);
}

Matrix MlpNet::forward_probs(const Matrix& x) const {
    return softmax_rows(forward_logits(x));
}

double MlpNet::loss(const Matrix& x, std::span<const std::uint32_t> y, Grads* grads) const {
    Matrix pre = dense_forward(l1, x);
    Matrix h = pre;
    relu_inplace(h);
    const Matrix logits = dense_forward(l2, h);
    const Matrix probs = softmax_rows(logits);
    const double loss = cross_entropy(probs, y);
    if (grads != nullptr) {
        const Matrix dlogits = cross_entropy_logit_grad(probs, y);
        const Matrix dh = dense_backward(l2, h, dlogits, grads->g2);
        const Matrix dpre = relu_backward(pre, dh);
        dense_backward(l1, x, dpre, grads->g1);
    }
    return loss;
}

MlpClassifier::MlpClassifier(MlpNet net, std::size_t classes)
    : ProbClassifier(ClassifierKind::Mlp1h, classes, net.l1.w.cols()), net_(std::move(net)) {}

Matrix MlpClassifier::predict_base(const Matrix& x) const {
    return net_.forward_probs(x);
}

std::unique_ptr<MlpClassifier> MlpClassifier::train(const Matrix& x,
                                                    std::span<const std::uint32_t> y,
                                                    std::size_t classes, const Hyper& hyper,
                                                    RngStream& stream) {
    hyper_check_keys(hyper, {"hidden", "epochs", "batch", "lr"});
    const std::size_t n = x.rows();
    const std::size_t hidden =
        std::max<std::size_t>(1, static_cast<std::size_t>(hyper_get(hyper, "hidden", 128)));
    const std::size_t epochs = static_cast<std::size_t>(hyper_get(hyper, "epochs", 20));
    const std::size_t batch =
        std::max<std::size_t>(1, static_cast<std::size_t>(hyper_get(hyper, "batch", 64)));
    AdamConfig adam;
    adam.lr = hyper_get(hyper, "lr", 1e-3);

    MlpNet net;
    net.l1 = make_dense(hidden, x.cols(), stream, std::sqrt(2.0 / static_cast<double>(x.cols())));
    net.l2 = make_dense(classes, hidden, stream, std::sqrt(2.0 / static_cast<double>(hidden)));

    // Output bias starts at the log class priors; a single-class training
    // set then emits that class at probability ~1 from step zero.
    std::vector<double> counts(classes, 0.0);
    for (std::uint32_t label : y) {
        counts[label - 1] += 1.0;
    }
    for (std::size_t j = 0; j < classes; ++j) {
        net.l2.b[j] = std::log(std::max(counts[j] / static_cast<double>(n), kProbEps));
    }

    AdamState st1 = make_adam_state(net.l1);
    AdamState st2 = make_adam_state(net.l2);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> batch_idx;
    std::vector<std::uint32_t> batch_y;
    MlpNet::Grads grads;

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        stream.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(start + batch, n);
            batch_idx.assign(order.begin() + start, order.begin() + stop);
            const Matrix bx = take_rows(x, batch_idx);
            batch_y.resize(batch_idx.size());
            for (std::size_t i = 0; i < batch_idx.size(); ++i) {
                batch_y[i] = y[batch_idx[i]];
            }
            net.loss(bx, batch_y, &grads);
            adam_update(net.l1, grads.g1, st1, adam);
            adam_update(net.l2, grads.g2, st2, adam);
        }
    }
    return std::make_unique<MlpClassifier>(std::move(net), classes);
}

}  // namespace cbleak
