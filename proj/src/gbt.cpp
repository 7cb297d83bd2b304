#include "cbleak/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cbleak/mathfn.hpp"
#include "cbleak/nn.hpp"

namespace cbleak {
namespace {

struct GbtParams {
    std::size_t rounds = 100;
    std::size_t max_depth = 6;
    double lr = 0.3;
    double l2 = 1.0;
    double min_child_weight = 1.0;
};

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t count = 0;
    int depth = 0;
};

struct ScanState {
    double gl = 0.0;
    double hl = 0.0;
    std::size_t count = 0;
    double prev_value = 0.0;
    bool has_prev = false;
};

struct BestSplit {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

double leaf_objective(double g, double h, double l2) {
    return g * g / (h + l2);
}

// One tree on gradients/hessians, level-wise exact greedy: every feature
// column is walked once per level in presorted order and samples are
// dispatched to their node's running split scan.
RegTree build_tree(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted_idx,
                   std::span<const double> grad, std::span<const double> hess,
                   const GbtParams& params, std::vector<int>& node_of) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    RegTree tree;
    tree.nodes.emplace_back();
    std::vector<NodeStats> stats(1);
    std::fill(node_of.begin(), node_of.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        stats[0].g += grad[i];
        stats[0].h += hess[i];
    }
    stats[0].count = n;

    std::size_t level_begin = 0;
    std::size_t level_end = 1;
    std::vector<ScanState> scan;
    std::vector<BestSplit> best;

    while (level_begin < level_end) {
        const std::size_t width = level_end - level_begin;
        best.assign(width, {});

        bool any_candidate = false;
        for (std::size_t s = 0; s < width; ++s) {
            const NodeStats& ns = stats[level_begin + s];
            if (ns.count >= 2 && ns.depth < static_cast<int>(params.max_depth)) {
                any_candidate = true;
            }
        }
        if (any_candidate) {
            for (std::size_t f = 0; f < d; ++f) {
                scan.assign(width, {});
                for (const std::uint32_t i : sorted_idx[f]) {
                    const int nd = node_of[i];
                    if (nd < static_cast<int>(level_begin) || nd >= static_cast<int>(level_end)) {
                        continue;
                    }
                    const NodeStats& ns = stats[static_cast<std::size_t>(nd)];
                    if (ns.count < 2 || ns.depth >= static_cast<int>(params.max_depth)) {
                        continue;
                    }
                    ScanState& st = scan[static_cast<std::size_t>(nd) - level_begin];
                    const double value = x(i, f);
                    if (st.has_prev && value != st.prev_value && st.count > 0) {
                        const double gr = ns.g - st.gl;
                        const double hr = ns.h - st.hl;
                        if (st.hl >= params.min_child_weight && hr >= params.min_child_weight) {
                            const double gain =
                                0.5 * (leaf_objective(st.gl, st.hl, params.l2) +
                                       leaf_objective(gr, hr, params.l2) -
                                       leaf_objective(ns.g, ns.h, params.l2));
                            BestSplit& bs = best[static_cast<std::size_t>(nd) - level_begin];
                            if (gain > bs.gain + 1e-12) {
                                bs.gain = gain;
                                bs.feature = static_cast<int>(f);
                                bs.threshold = 0.5 * (st.prev_value + value);
                            }
                        }
                    }
                    st.gl += grad[i];
                    st.hl += hess[i];
                    st.count += 1;
                    st.prev_value = value;
                    st.has_prev = true;
                }
            }
        }

        const std::size_t next_begin = tree.nodes.size();
        for (std::size_t s = 0; s < width; ++s) {
            const std::size_t nd = level_begin + s;
            if (best[s].feature >= 0 && best[s].gain > 0.0) {
                const int left_id = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                RegTreeNode& node = tree.nodes[nd];  // reference taken after growth
                node.feature = best[s].feature;
                node.threshold = best[s].threshold;
                node.left = left_id;
                node.right = left_id + 1;
                NodeStats child;
                child.depth = stats[nd].depth + 1;
                stats.push_back(child);  // left
                stats.push_back(child);  // right
            } else {
                tree.nodes[nd].weight = -stats[nd].g / (stats[nd].h + params.l2);
            }
        }

        // Reassign samples of split nodes and accumulate child stats.
        if (next_begin < tree.nodes.size()) {
            for (std::size_t i = 0; i < n; ++i) {
                const int nd = node_of[i];
                if (nd < static_cast<int>(level_begin) || nd >= static_cast<int>(level_end)) {
                    continue;
                }
                const RegTreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
                if (node.feature < 0) {
                    continue;
                }
                const int child = x(i, static_cast<std::size_t>(node.feature)) <= node.threshold
                                      ? node.left
                                      : node.right;
                node_of[i] = child;
                NodeStats& cs = stats[static_cast<std::size_t>(child)];
                cs.g += grad[i];
                cs.h += hess[i];
                cs.count += 1;
            }
        }

        level_begin = level_end;
        level_end = tree.nodes.size();
    }
    return tree;
}

}  // namespace

double RegTree::predict(const double* row) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const RegTreeNode& node = nodes[static_cast<std::size_t>(id)];
        id = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].weight;
}

GbtClassifier::GbtClassifier(std::vector<double> base_score,
                             std::vector<std::vector<RegTree>> rounds, double learning_rate,
                             std::size_t classes, std::size_t input_dim,
                             std::vector<double> loss_curve)
    : ProbClassifier(ClassifierKind::Gbt, classes, input_dim),
      base_score_(std::move(base_score)),
      rounds_(std::move(rounds)),
      learning_rate_(learning_rate),
      loss_curve_(std::move(loss_curve)) {}

Matrix GbtClassifier::predict_base(const Matrix& x) const {
    Matrix scores(x.rows(), num_classes());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double* row = scores.row(i);
        for (std::size_t j = 0; j < num_classes(); ++j) {
            row[j] = base_score_[j];
        }
        for (const auto& round : rounds_) {
            for (std::size_t j = 0; j < num_classes(); ++j) {
                row[j] += learning_rate_ * round[j].predict(x.row(i));
            }
        }
    }
    return softmax_rows(scores);
}

std::unique_ptr<GbtClassifier> GbtClassifier::train(const Matrix& x,
                                                    std::span<const std::uint32_t> y,
                                                    std::size_t classes, const Hyper& hyper,
                                                    RngStream& /*stream*/) {
    // Exact greedy boosting is deterministic; the stream argument exists
    // for interface uniformity only.
    hyper_check_keys(hyper, {"rounds", "max_depth", "lr", "lambda", "min_child_weight"});
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    GbtParams params;
    params.rounds = static_cast<std::size_t>(hyper_get(hyper, "rounds", 100));
    params.max_depth = static_cast<std::size_t>(hyper_get(hyper, "max_depth", 6));
    params.lr = hyper_get(hyper, "lr", 0.3);
    params.l2 = hyper_get(hyper, "lambda", 1.0);
    params.min_child_weight = hyper_get(hyper, "min_child_weight", 1.0);

    std::vector<std::vector<std::uint32_t>> sorted_idx(d);
    for (std::size_t f = 0; f < d; ++f) {
        auto& idx = sorted_idx[f];
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0u);
        std::sort(idx.begin(), idx.end(), [&x, f](std::uint32_t a, std::uint32_t b) {
            const double va = x(a, f);
            const double vb = x(b, f);
            return va < vb || (va == vb && a < b);
        });
    }

    std::vector<double> base(classes);
    {
        std::vector<double> counts(classes, 0.0);
        for (std::uint32_t label : y) {
            counts[label - 1] += 1.0;
        }
        for (std::size_t j = 0; j < classes; ++j) {
            base[j] = std::log(std::max(counts[j] / static_cast<double>(n), kProbEps));
        }
    }

    Matrix scores(n, classes);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < classes; ++j) {
            scores(i, j) = base[j];
        }
    }

    std::vector<std::vector<RegTree>> rounds;
    rounds.reserve(params.rounds);
    std::vector<double> loss_curve;
    loss_curve.reserve(params.rounds + 1);

    std::vector<double> grad(n), hess(n);
    std::vector<int> node_of(n);

    Matrix probs = softmax_rows(scores);
    loss_curve.push_back(cross_entropy(probs, y));

    for (std::size_t r = 0; r < params.rounds; ++r) {
        std::vector<RegTree> class_trees;
        class_trees.reserve(classes);
        for (std::size_t j = 0; j < classes; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs(i, j);
                grad[i] = p - (y[i] - 1 == j ? 1.0 : 0.0);
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }
            RegTree tree = build_tree(x, sorted_idx, grad, hess, params, node_of);
            // node_of now holds each training sample's leaf.
            for (std::size_t i = 0; i < n; ++i) {
                scores(i, j) += params.lr * tree.nodes[static_cast<std::size_t>(node_of[i])].weight;
            }
            class_trees.push_back(std::move(tree));
        }
        rounds.push_back(std::move(class_trees));
        probs = softmax_rows(scores);
        loss_curve.push_back(cross_entropy(probs, y));
    }

    return std::make_unique<GbtClassifier>(std::move(base), std::move(rounds), params.lr, classes,
                                           d, std::move(loss_curve));
}

}  // namespace cbleak
