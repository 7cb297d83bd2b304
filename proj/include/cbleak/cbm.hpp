#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbleak/classifiers.hpp"
#include "cbleak/nn.hpp"
#include "cbleak/synthgen.hpp"

namespace cbleak {

// Joint soft concept bottleneck model: a sigmoid concept encoder feeding a
// softmax target head. The head consumes exactly the k encoder outputs.
struct CbmModel {
    Dense enc1, enc2;    // d -> enc_hidden -> k, sigmoid output
    Dense head1, head2;  // k -> head_hidden -> J, softmax output
    double lambda = 1.0;
    std::uint64_t train_seed = 0;

    Matrix encode(const Matrix& x) const;  // n x k, strictly inside (0,1)
    Matrix head_probs(const Matrix& chat) const;

    struct Grads {
        DenseGrads e1, e2, h1, h2;
    };
    // task CE + lambda * mean-over-concepts BCE; fills grads when non-null.
    double joint_loss(const Matrix& x, const Matrix& c, std::span<const std::uint32_t> y,
                      double lambda, Grads* grads = nullptr) const;
};

struct CbmTrainConfig {
    std::size_t epochs = 20;
    std::size_t batch = 64;
    std::size_t enc_hidden = 256;
    std::size_t head_hidden = 64;
    AdamConfig adam;
};

// Minibatch training of the joint loss on the given rows (all rows when
// empty). Throws TrainingDivergedError if the loss goes non-finite.
CbmModel train_joint_cbm(const Dataset& ds, double lambda, std::size_t epochs, std::size_t batch,
                         RngStream& stream, std::span<const std::size_t> rows = {},
                         const CbmTrainConfig& cfg = {});

Matrix cbm_predict_concepts(const CbmModel& model, const Matrix& x);

struct CbmSweepRow {
    double lambda = 0.0;
    std::size_t k = 0;
    std::size_t run = 0;
    double h_y_given_c = 0.0;
    double h_y_given_chat_c = 0.0;
    double leakage = 0.0;
    double accuracy_a = 0.0;
    double accuracy_b = 0.0;
    std::uint64_t cell_seed = 0;
};

// For each (lambda, k, run): generate a dataset, train a joint CBM on the
// training split, replace chat with the encoder's predictions and measure
// leakage with the same split seed.
std::vector<CbmSweepRow> lambda_sweep(const GenConfig& cfg, std::span<const double> lambdas,
                                      std::span<const std::size_t> k_values, ClassifierKind kind,
                                      std::size_t runs, std::size_t jobs = 1);

}  // namespace cbleak
