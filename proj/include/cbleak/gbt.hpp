#pragma once

#include "cbleak/classifiers.hpp"

namespace cbleak {

struct RegTreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;
};

struct RegTree {
    std::vector<RegTreeNode> nodes;
    double predict(const double* row) const;
};

// Multiclass boosting with per-class regression trees fit to softmax
// gradients/hessians and exact greedy splits over presorted columns.
class GbtClassifier final : public ProbClassifier {
public:
    // Defaults: 100 rounds, max depth 6, learning rate 0.3, L2 weight 1.0,
    // min child hessian 1.0; per-class score init = log class prior.
    // Overrides: rounds, max_depth, lr, lambda, min_child_weight.
    static std::unique_ptr<GbtClassifier> train(const Matrix& x, std::span<const std::uint32_t> y,
                                                std::size_t classes, const Hyper& hyper,
                                                RngStream& stream);

    Matrix predict_base(const Matrix& x) const override;

    // Mean training cross-entropy; entry 0 is the prior-only loss, entry r
    // the loss after r rounds.
    const std::vector<double>& train_loss_curve() const { return loss_curve_; }
    const std::vector<std::vector<RegTree>>& rounds() const { return rounds_; }

    GbtClassifier(std::vector<double> base_score, std::vector<std::vector<RegTree>> rounds,
                  double learning_rate, std::size_t classes, std::size_t input_dim,
                  std::vector<double> loss_curve);

private:
    std::vector<double> base_score_;            // per class
    std::vector<std::vector<RegTree>> rounds_;  // [round][class]
    double learning_rate_;
    std::vector<double> loss_curve_;
};

}  // namespace cbleak
