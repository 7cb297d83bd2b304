#include "cbleak/classifiers.hpp"

#include <algorithm>
#include <stdexcept>

#include "cbleak/calibration.hpp"
#include "cbleak/forest.hpp"
#include "cbleak/gbt.hpp"
#include "cbleak/mathfn.hpp"
#include "cbleak/mlp.hpp"

namespace cbleak {

std::string_view kind_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Mlp1h: return "mlp";
        case ClassifierKind::RandomForest: return "rf";
        case ClassifierKind::Gbt: return "gbt";
    }
    throw std::invalid_argument("kind_name: unknown classifier kind");
}

ClassifierKind kind_from_name(std::string_view name) {
    if (name == "mlp") return ClassifierKind::Mlp1h;
    if (name == "rf") return ClassifierKind::RandomForest;
    if (name == "gbt") return ClassifierKind::Gbt;
    throw std::invalid_argument("unknown classifier '" + std::string(name) + "' (expected mlp|rf|gbt)");
}

double hyper_get(const Hyper& hyper, const std::string& key, double fallback) {
    const auto it = hyper.find(key);
    return it == hyper.end() ? fallback : it->second;
}

void hyper_check_keys(const Hyper& hyper, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : hyper) {
        bool known = false;
        for (const char* name : allowed) {
            known = known || key == name;
        }
        if (!known) {
            throw std::invalid_argument("unknown hyperparameter '" + key + "'");
        }
    }
}

void ProbClassifier::set_temperature(double t) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("ProbClassifier::set_temperature: temperature must be > 0");
    }
    temperature_ = t;
}

Matrix ProbClassifier::predict_proba(const Matrix& x) const {
    if (x.cols() != input_dim_) {
        throw std::invalid_argument("predict_proba: input dimension mismatch");
    }
    Matrix probs = predict_base(x);
    std::vector<double> scratch(classes_);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        auto row = probs.row_span(i);
        if (temperature_ != 1.0) {
            apply_temperature(row, temperature_, scratch);
            std::copy(scratch.begin(), scratch.end(), row.begin());
        }
        double sum = 0.0;
        for (auto& p : row) {
            p = std::clamp(p, kProbEps, 1.0 - kProbEps);
            sum += p;
        }
        for (auto& p : row) {
            p /= sum;
        }
    }
    return probs;
}

std::uint32_t argmax_label(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
        if (row[j] > row[best]) {
            best = j;
        }
    }
    return static_cast<std::uint32_t>(best + 1);
}

double accuracy(const ProbClassifier& model, const Matrix& x, std::span<const std::uint32_t> y) {
    if (x.rows() != y.size() || y.empty()) {
        throw std::invalid_argument("accuracy: label count mismatch or empty");
    }
    const Matrix probs = model.predict_proba(x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        if (argmax_label(probs.row_span(i)) == y[i]) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

std::unique_ptr<ProbClassifier> train_classifier(ClassifierKind kind, const Matrix& x,
                                                 std::span<const std::uint32_t> y,
                                                 std::size_t classes, const Hyper& hyper,
                                                 RngStream& stream) {
    if (x.rows() == 0 || y.empty()) {
        throw std::invalid_argument("train_classifier: empty training set");
    }
    if (x.rows() != y.size()) {
        throw std::invalid_argument("train_classifier: row/label count mismatch");
    }
    if (classes < 2) {
        throw std::invalid_argument("train_classifier: need at least 2 classes");
    }
    for (std::uint32_t label : y) {
        if (label < 1 || label > classes) {
            throw std::invalid_argument("train_classifier: label outside {1..J}");
        }
    }
    switch (kind) {
        case ClassifierKind::Mlp1h: return MlpClassifier::train(x, y, classes, hyper, stream);
        case ClassifierKind::RandomForest: return ForestClassifier::train(x, y, classes, hyper, stream);
        case ClassifierKind::Gbt: return GbtClassifier::train(x, y, classes, hyper, stream);
    }
    throw std::invalid_argument("train_classifier: unknown classifier kind");
}

}  // namespace cbleak
