#include "cbleak/cbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cbleak/errors.hpp"
#include "cbleak/leakage.hpp"
#include "cbleak/mathfn.hpp"
#include "cbleak/parallel.hpp"
#include "cbleak/split.hpp"

namespace cbleak {

Matrix CbmModel::encode(const Matrix& x) const {
    Matrix h = dense_forward(enc1, x);
    relu_inplace(h);
    Matrix z = dense_forward(enc2, h);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        sigmoid_vec(z.row_span(i), z.row_span(i));
    }
    return z;
}

Matrix CbmModel::head_probs(const Matrix& chat) const {
    Matrix h = dense_forward(head1, chat);
    relu_inplace(h);
    return softmax_rows(dense_forward(head2, h));
}

double CbmModel::joint_loss(const Matrix& x, const Matrix& c, std::span<const std::uint32_t> y,
                            double lam, Grads* grads) const {
    const std::size_t m = x.rows();
    const std::size_t k = enc2.w.rows();
    if (c.rows() != m || y.size() != m || c.cols() != k) {
        throw std::invalid_argument("CbmModel::joint_loss: shape mismatch");
    }

    // encoder forward
    Matrix enc_pre = dense_forward(enc1, x);
    Matrix enc_h = enc_pre;
    relu_inplace(enc_h);
    const Matrix z = dense_forward(enc2, enc_h);
    if (!z.all_finite()) {
        return std::numeric_limits<double>::quiet_NaN();  // training has diverged
    }
    Matrix chat(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        sigmoid_vec(z.row_span(i), chat.row_span(i));
    }

    // head forward; the head sees nothing but the k concept activations
    Matrix head_pre = dense_forward(head1, chat);
    Matrix head_h = head_pre;
    relu_inplace(head_h);
    const Matrix logits = dense_forward(head2, head_h);
    if (!logits.all_finite()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const Matrix probs = softmax_rows(logits);

    const double task = cross_entropy(probs, y);
    double concept_loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double p = chat(i, j);
            concept_loss += c(i, j) != 0.0 ? clipped_neg_log(p) : clipped_neg_log(1.0 - p);
        }
    }
    concept_loss /= static_cast<double>(m * k);
    const double total = task + lam * concept_loss;

    if (grads != nullptr) {
        const Matrix dlogits = cross_entropy_logit_grad(probs, y);
        const Matrix dhead_h = dense_backward(head2, head_h, dlogits, grads->h2);
        const Matrix dhead_pre = relu_backward(head_pre, dhead_h);
        Matrix dchat = dense_backward(head1, chat, dhead_pre, grads->h1);

        // dz = dchat * sigmoid'(z) + lambda * (chat - c) / (m*k)
        const double concept_scale = lam / static_cast<double>(m * k);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const double p = chat(i, j);
                dchat(i, j) = dchat(i, j) * p * (1.0 - p) + concept_scale * (p - c(i, j));
            }
        }
        const Matrix denc_h = dense_backward(enc2, enc_h, dchat, grads->e2);
        const Matrix denc_pre = relu_backward(enc_pre, denc_h);
        dense_backward(enc1, x, denc_pre, grads->e1);
    }
    return total;
}

CbmModel train_joint_cbm(const Dataset& ds, double lambda, std::size_t epochs, std::size_t batch,
                         RngStream& stream, std::span<const std::size_t> rows,
                         const CbmTrainConfig& cfg) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("train_joint_cbm: lambda must be finite and >= 0");
    }
    if (epochs < 1 || batch < 1) {
        throw std::invalid_argument("train_joint_cbm: epochs and batch must be >= 1");
    }
    const std::size_t d = ds.config.d;
    const std::size_t k = ds.config.k;

    std::vector<std::size_t> all_rows;
    if (rows.empty()) {
        all_rows.resize(ds.config.n);
        std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
        rows = all_rows;
    }

    CbmModel model;
    model.lambda = lambda;
    model.train_seed = stream.seed();
    model.enc1 = make_dense(cfg.enc_hidden, d, stream, std::sqrt(2.0 / static_cast<double>(d)));
    model.enc2 = make_dense(k, cfg.enc_hidden, stream,
                            std::sqrt(2.0 / static_cast<double>(cfg.enc_hidden)));
    model.head1 = make_dense(cfg.head_hidden, k, stream, std::sqrt(2.0 / static_cast<double>(k)));
    model.head2 = make_dense(ds.config.j, cfg.head_hidden, stream,
                             std::sqrt(2.0 / static_cast<double>(cfg.head_hidden)));

    AdamState st_e1 = make_adam_state(model.enc1);
    AdamState st_e2 = make_adam_state(model.enc2);
    AdamState st_h1 = make_adam_state(model.head1);
    AdamState st_h2 = make_adam_state(model.head2);

    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::vector<std::size_t> batch_idx;
    std::vector<std::uint32_t> batch_y;
    CbmModel::Grads grads;

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        stream.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(start + batch, order.size());
            batch_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
            const Matrix bx = take_rows(ds.x, batch_idx);
            const Matrix bc = take_rows(ds.c, batch_idx);
            batch_y.resize(batch_idx.size());
            for (std::size_t i = 0; i < batch_idx.size(); ++i) {
                batch_y[i] = ds.y[batch_idx[i]];
            }
            const double loss = model.joint_loss(bx, bc, batch_y, lambda, &grads);
            if (!std::isfinite(loss)) {
                throw TrainingDivergedError("train_joint_cbm: non-finite loss", epoch);
            }
            adam_update(model.enc1, grads.e1, st_e1, cfg.adam);
            adam_update(model.enc2, grads.e2, st_e2, cfg.adam);
            adam_update(model.head1, grads.h1, st_h1, cfg.adam);
            adam_update(model.head2, grads.h2, st_h2, cfg.adam);
        }
    }
    return model;
}

Matrix cbm_predict_concepts(const CbmModel& model, const Matrix& x) {
    if (x.cols() != model.enc1.w.cols()) {
        throw std::invalid_argument("cbm_predict_concepts: input dimension mismatch");
    }
    return model.encode(x);
}

std::vector<CbmSweepRow> lambda_sweep(const GenConfig& cfg, std::span<const double> lambdas,
                                      std::span<const std::size_t> k_values, ClassifierKind kind,
                                      std::size_t runs, std::size_t jobs) {
    if (lambdas.empty() || k_values.empty() || runs < 1) {
        throw std::invalid_argument("lambda_sweep: lambdas, k_values and runs must be non-empty");
    }

    struct Cell {
        double lambda;
        std::size_t k;
        std::size_t run;
    };
    std::vector<Cell> cells;
    for (double lam : lambdas) {
        for (std::size_t k : k_values) {
            for (std::size_t run = 0; run < runs; ++run) {
                cells.push_back({lam, k, run});
            }
        }
    }

    std::vector<CbmSweepRow> rows(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t ci) {
        const Cell& cell = cells[ci];
        std::uint64_t seed = mix64(cfg.seed ^ std::bit_cast<std::uint64_t>(cell.lambda));
        seed = mix64(seed ^ cell.k);
        seed = mix64(seed ^ cell.run);

        GenConfig cell_cfg = cfg;
        cell_cfg.k = cell.k;
        cell_cfg.seed = seed;
        Dataset ds = generate_dataset(cell_cfg);

        const std::uint64_t split_seed = mix64(seed ^ 0x5b1dULL);
        const SplitIndices split = split_dataset(cell_cfg.n, {}, split_seed);

        RngStream train_stream(seed, "cbm-train");
        const CbmModel model =
            train_joint_cbm(ds, cell.lambda, 20, 64, train_stream, split.train);
        ds.chat = cbm_predict_concepts(model, ds.x);

        // same split seed, so the estimator evaluates on rows the CBM never saw
        const LeakageReport report = measure_leakage(ds, kind, split_seed);

        CbmSweepRow& row = rows[ci];
        row.lambda = cell.lambda;
        row.k = cell.k;
        row.run = cell.run;
        row.h_y_given_c = report.h_y_given_c;
        row.h_y_given_chat_c = report.h_y_given_chat_c;
        row.leakage = report.leakage;
        row.accuracy_a = report.accuracy_a;
        row.accuracy_b = report.accuracy_b;
        row.cell_seed = seed;
    });
    return rows;
}

}  // namespace cbleak
