#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cbleak/cbm.hpp"
#include "cbleak/errors.hpp"
#include "cbleak/mathfn.hpp"
#include "cbleak/nn.hpp"

using namespace cbleak;

namespace {

CbmModel small_model(std::uint64_t seed, std::size_t d = 6, std::size_t k = 3,
                     std::size_t classes = 3) {
    RngStream s(seed, "cbm-small");
    CbmModel model;
    model.enc1 = make_dense(8, d, s, 0.4);
    model.enc2 = make_dense(k, 8, s, 0.4);
    model.head1 = make_dense(5, k, s, 0.4);
    model.head2 = make_dense(classes, 5, s, 0.4);
    return model;
}

void small_batch(std::uint64_t seed, std::size_t m, std::size_t d, std::size_t k,
                 std::size_t classes, Matrix& x, Matrix& c, std::vector<std::uint32_t>& y) {
    RngStream s(seed, "cbm-batch");
    x = Matrix(m, d);
    c = Matrix(m, k);
    y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x(i, j) = s.next_gaussian();
        }
        for (std::size_t j = 0; j < k; ++j) {
            c(i, j) = s.next_bernoulli(0.5) ? 1.0 : 0.0;
        }
        y[i] = static_cast<std::uint32_t>(s.next_below(classes) + 1);
    }
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

GenConfig tiny_gen(std::size_t n) {
    GenConfig cfg;
    cfg.n = n;
    cfg.d = 12;
    cfg.k = 4;
    cfg.j = 3;
    cfg.b = 6;
    cfg.seed = 9;
    return cfg;
}

}  // namespace

TEST_CASE("joint loss gradients match central finite differences") {
    CbmModel model = small_model(41);
    Matrix x, c;
    std::vector<std::uint32_t> y;
    small_batch(42, 10, 6, 3, 3, x, c, y);
    const double lambda = 0.7;

    CbmModel::Grads grads;
    model.joint_loss(x, c, y, lambda, &grads);

    const double step = 1e-5;
    double max_rel = 0.0;
    auto check_param = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + step;
        const double up = model.joint_loss(x, c, y, lambda);
        param = saved - step;
        const double down = model.joint_loss(x, c, y, lambda);
        param = saved;
        max_rel = std::max(max_rel, rel_err((up - down) / (2.0 * step), analytic));
    };
    auto check_layer = [&](Dense& layer, const DenseGrads& g) {
        for (std::size_t i = 0; i < layer.w.size(); ++i) {
            check_param(layer.w.data()[i], g.dw.data()[i]);
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            check_param(layer.b[i], g.db[i]);
        }
    };
    check_layer(model.enc1, grads.e1);
    check_layer(model.enc2, grads.e2);
    check_layer(model.head1, grads.h1);
    check_layer(model.head2, grads.h2);
    CHECK(max_rel <= 1e-4);
}

TEST_CASE("lambda = 0 reduces the joint loss to the task cross-entropy") {
    const CbmModel model = small_model(43);
    Matrix x, c;
    std::vector<std::uint32_t> y;
    small_batch(44, 12, 6, 3, 3, x, c, y);

    const double joint = model.joint_loss(x, c, y, 0.0);
    const Matrix probs = model.head_probs(model.encode(x));
    CHECK(joint == cross_entropy(probs, y));
}

TEST_CASE("concept-loss gradient contribution is linear in lambda") {
    const CbmModel model = small_model(45);
    Matrix x, c;
    std::vector<std::uint32_t> y;
    small_batch(46, 10, 6, 3, 3, x, c, y);

    CbmModel::Grads g0, g1, g2;
    model.joint_loss(x, c, y, 0.0, &g0);
    model.joint_loss(x, c, y, 1.0, &g1);
    model.joint_loss(x, c, y, 2.0, &g2);

    auto check_linear = [](const DenseGrads& a0, const DenseGrads& a1, const DenseGrads& a2) {
        for (std::size_t i = 0; i < a0.dw.size(); ++i) {
            const double predicted = a0.dw.data()[i] + 2.0 * (a1.dw.data()[i] - a0.dw.data()[i]);
            CHECK(a2.dw.data()[i] == doctest::Approx(predicted).epsilon(1e-10));
        }
        for (std::size_t i = 0; i < a0.db.size(); ++i) {
            const double predicted = a0.db[i] + 2.0 * (a1.db[i] - a0.db[i]);
            CHECK(a2.db[i] == doctest::Approx(predicted).epsilon(1e-10));
        }
    };
    check_linear(g0.e1, g1.e1, g2.e1);
    check_linear(g0.e2, g1.e2, g2.e2);

    // the head never sees the concept loss, so its gradients do not move
    for (std::size_t i = 0; i < g0.h1.dw.size(); ++i) {
        CHECK(g0.h1.dw.data()[i] == doctest::Approx(g2.h1.dw.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("the bottleneck is structural: the head consumes exactly k activations") {
    const Dataset ds = generate_dataset(tiny_gen(80));
    RngStream s(3, "train");
    const CbmModel model = train_joint_cbm(ds, 1.0, 2, 16, s);
    CHECK(model.head1.w.cols() == ds.config.k);
    CHECK(model.enc2.w.rows() == ds.config.k);
    const Matrix chat = model.encode(ds.x);
    CHECK(chat.cols() == ds.config.k);
    CHECK_NOTHROW(model.head_probs(chat));
    // feeding covariates straight into the head cannot typecheck
    CHECK_THROWS_AS(model.head_probs(ds.x), std::invalid_argument);
}

TEST_CASE("encoder outputs stay strictly inside (0,1) and are deterministic") {
    const Dataset ds = generate_dataset(tiny_gen(60));
    RngStream s(4, "train");
    const CbmModel model = train_joint_cbm(ds, 0.5, 2, 16, s);
    const Matrix a = cbm_predict_concepts(model, ds.x);
    const Matrix b = cbm_predict_concepts(model, ds.x);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.data()[i] > 0.0);
        CHECK(a.data()[i] < 1.0);
    }
    CHECK_THROWS_AS(cbm_predict_concepts(model, Matrix(3, 5)), std::invalid_argument);
}

TEST_CASE("zero-weight encoder emits 0.5 everywhere") {
    CbmModel model;
    model.enc1.w = Matrix(8, 4);
    model.enc1.b.assign(8, 0.0);
    model.enc2.w = Matrix(3, 8);
    model.enc2.b.assign(3, 0.0);
    model.head1.w = Matrix(5, 3);
    model.head1.b.assign(5, 0.0);
    model.head2.w = Matrix(2, 5);
    model.head2.b.assign(2, 0.0);
    const Matrix out = model.encode(Matrix(6, 4));
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out.data()[i] == 0.5);
    }
}

TEST_CASE("200 epochs overfit a tiny dataset") {
    const Dataset ds = generate_dataset(tiny_gen(64));
    std::vector<std::uint32_t> y = ds.y;

    RngStream s1(21, "overfit");
    const CbmModel after_one = train_joint_cbm(ds, 1.0, 1, 16, s1);
    RngStream s2(21, "overfit");
    const CbmModel after_many = train_joint_cbm(ds, 1.0, 200, 16, s2);

    const double loss_one = after_one.joint_loss(ds.x, ds.c, y, 1.0);
    const double loss_many = after_many.joint_loss(ds.x, ds.c, y, 1.0);
    MESSAGE("loss after 1 epoch: ", loss_one, ", after 200: ", loss_many);
    CHECK(loss_many < loss_one);
}

TEST_CASE("diverged training reports the offending epoch") {
    const Dataset ds = generate_dataset(tiny_gen(64));
    RngStream s(22, "diverge");
    CbmTrainConfig cfg;
    cfg.adam.lr = 1e308;  // drives the weights to +-inf within a step or two
    CHECK_THROWS_AS(train_joint_cbm(ds, 1.0, 3, 16, s, {}, cfg), TrainingDivergedError);
}

TEST_CASE("invalid training parameters are rejected") {
    const Dataset ds = generate_dataset(tiny_gen(64));
    RngStream s(23, "bad");
    CHECK_THROWS_AS(train_joint_cbm(ds, -0.5, 2, 16, s), std::invalid_argument);
    CHECK_THROWS_AS(train_joint_cbm(ds, 1.0, 0, 16, s), std::invalid_argument);
}

TEST_CASE("lambda sweep emits |k_values| x runs rows per lambda in order") {
    GenConfig cfg = tiny_gen(120);
    const std::vector<double> lambdas{0.5};
    const std::vector<std::size_t> ks{3, 4};
    const auto rows = lambda_sweep(cfg, lambdas, ks, ClassifierKind::Gbt, 2, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].lambda == 0.5);
    CHECK(rows[0].k == 3);
    CHECK(rows[0].run == 0);
    CHECK(rows[1].k == 3);
    CHECK(rows[1].run == 1);
    CHECK(rows[2].k == 4);
    CHECK(rows[3].k == 4);
    for (const auto& row : rows) {
        CHECK(row.leakage == row.h_y_given_c - row.h_y_given_chat_c);
    }

    // deterministic regardless of worker count
    const auto rows_serial = lambda_sweep(cfg, lambdas, ks, ClassifierKind::Gbt, 2, 1);
    REQUIRE(rows_serial.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].leakage == rows_serial[i].leakage);
    }
}
