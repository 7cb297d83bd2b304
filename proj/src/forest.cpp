#include "cbleak/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cbleak {
namespace {

double gini(std::span<const double> counts, double total) {
    double acc = 1.0;
    for (double c : counts) {
        const double p = c / total;
        acc -= p * p;
    }
    return acc;
}

struct BuildContext {
    const Matrix& x;
    std::span<const std::uint32_t> y;
    std::size_t classes;
    std::size_t mtry;
    RngStream& stream;
    std::vector<std::size_t> feature_pool;  // scratch for per-node feature draws
};

struct PendingNode {
    int node_id;
    std::vector<std::size_t> samples;
};

void build_tree(DecisionTree& tree, BuildContext& ctx, std::vector<std::size_t> root_samples) {
    std::vector<PendingNode> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(root_samples)});

    std::vector<double> counts(ctx.classes);
    std::vector<double> left_counts(ctx.classes);
    std::vector<std::pair<double, std::uint32_t>> column;

    while (!stack.empty()) {
        PendingNode item = std::move(stack.back());
        stack.pop_back();
        const auto& samples = item.samples;
        const double total = static_cast<double>(samples.size());

        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i : samples) {
            counts[ctx.y[i] - 1] += 1.0;
        }
        const double node_gini = gini(counts, total);

        auto make_leaf = [&] {
            TreeNode& node = tree.nodes[item.node_id];
            node.feature = -1;
            node.probs.resize(ctx.classes);
            for (std::size_t j = 0; j < ctx.classes; ++j) {
                node.probs[j] = counts[j] / total;
            }
        };

        if (samples.size() < 2 || node_gini <= 0.0) {
            make_leaf();
            continue;
        }

        // Draw mtry distinct candidate features, then scan them in index
        // order so the result does not depend on draw order.
        auto& pool = ctx.feature_pool;
        for (std::size_t f = 0; f < ctx.mtry; ++f) {
            const std::size_t pick = f + ctx.stream.next_below(pool.size() - f);
            std::swap(pool[f], pool[pick]);
        }
        std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(ctx.mtry));

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
        for (std::size_t fi = 0; fi < ctx.mtry; ++fi) {
            const std::size_t f = pool[fi];
            column.clear();
            for (std::size_t i : samples) {
                column.emplace_back(ctx.x(i, f), ctx.y[i]);
            }
            std::sort(column.begin(), column.end());
            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            for (std::size_t pos = 0; pos + 1 < column.size(); ++pos) {
                left_counts[column[pos].second - 1] += 1.0;
                if (column[pos].first == column[pos + 1].first) {
                    continue;
                }
                const double nl = static_cast<double>(pos + 1);
                const double nr = total - nl;
                double gl = 1.0, gr = 1.0;
                for (std::size_t j = 0; j < ctx.classes; ++j) {
                    const double pl = left_counts[j] / nl;
                    const double pr = (counts[j] - left_counts[j]) / nr;
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                const double gain = node_gini - (nl / total) * gl - (nr / total) * gr;
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (column[pos].first + column[pos + 1].first);
                }
            }
        }

        if (best_feature < 0) {
            make_leaf();
            continue;
        }

        std::vector<std::size_t> left, right;
        for (std::size_t i : samples) {
            (ctx.x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
                .push_back(i);
        }
        if (left.empty() || right.empty()) {
            make_leaf();  // threshold between equal values; should not happen
            continue;
        }

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[item.node_id];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left_id;
        node.right = right_id;
        stack.push_back({right_id, std::move(right)});
        stack.push_back({left_id, std::move(left)});
    }
}

}  // namespace

const std::vector<double>& DecisionTree::leaf_probs(const double* row) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        id = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].probs;
}

ForestClassifier::ForestClassifier(std::vector<DecisionTree> trees, std::size_t classes,
                                   std::size_t input_dim)
    : ProbClassifier(ClassifierKind::RandomForest, classes, input_dim),
      trees_(std::move(trees)) {
    if (trees_.empty()) {
        throw std::invalid_argument("ForestClassifier: no trees");
    }
}

Matrix ForestClassifier::predict_base(const Matrix& x) const {
    Matrix out(x.rows(), num_classes());
    const double inv = 1.0 / static_cast<double>(trees_.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double* row = out.row(i);
        for (const DecisionTree& tree : trees_) {
            const auto& probs = tree.leaf_probs(x.row(i));
            for (std::size_t j = 0; j < probs.size(); ++j) {
                row[j] += probs[j];
            }
        }
        for (std::size_t j = 0; j < out.cols(); ++j) {
            row[j] *= inv;
        }
    }
    return out;
}

std::unique_ptr<ForestClassifier> ForestClassifier::train(const Matrix& x,
                                                          std::span<const std::uint32_t> y,
                                                          std::size_t classes, const Hyper& hyper,
                                                          RngStream& stream) {
    hyper_check_keys(hyper, {"trees", "mtry"});
    const std::size_t n = x.rows();
    const std::size_t num_trees = static_cast<std::size_t>(hyper_get(hyper, "trees", 100));
    const std::size_t default_mtry =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));
    const std::size_t mtry = std::min<std::size_t>(
        x.cols(), static_cast<std::size_t>(hyper_get(hyper, "mtry", static_cast<double>(default_mtry))));

    std::vector<DecisionTree> trees(num_trees);
    for (std::size_t t = 0; t < num_trees; ++t) {
        RngStream tree_stream = stream.derive("tree-" + std::to_string(t));
        std::vector<std::size_t> bootstrap(n);
        for (auto& idx : bootstrap) {
            idx = tree_stream.next_below(n);
        }
        BuildContext ctx{x, y, classes, mtry, tree_stream, {}};
        ctx.feature_pool.resize(x.cols());
        std::iota(ctx.feature_pool.begin(), ctx.feature_pool.end(), std::size_t{0});
        build_tree(trees[t], ctx, std::move(bootstrap));
    }
    return std::make_unique<ForestClassifier>(std::move(trees), classes, x.cols());
}

}  // namespace cbleak
