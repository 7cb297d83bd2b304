#pragma once

#include "cbleak/classifiers.hpp"

namespace cbleak {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> probs;  // leaf class frequencies
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    // x[feature] <= threshold descends left.
    const std::vector<double>& leaf_probs(const double* row) const;
};

class ForestClassifier final : public ProbClassifier {
public:
    // Public so tests can assemble hand-built trees.
    ForestClassifier(std::vector<DecisionTree> trees, std::size_t classes, std::size_t input_dim);

    // Defaults: 100 trees, unlimited depth, Gini impurity, sqrt(d) feature
    // candidates per split, bootstrap resampling, leaf probability = class
    // frequency, ensemble probability = mean over trees.
    // Overrides: trees, mtry.
    static std::unique_ptr<ForestClassifier> train(const Matrix& x,
                                                   std::span<const std::uint32_t> y,
                                                   std::size_t classes, const Hyper& hyper,
                                                   RngStream& stream);

    const std::vector<DecisionTree>& trees() const { return trees_; }

    Matrix predict_base(const Matrix& x) const override;

private:
    std::vector<DecisionTree> trees_;
};

}  // namespace cbleak
