#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "cbleak/matrix.hpp"
#include "cbleak/rng.hpp"

namespace cbleak {

enum class ClassifierKind { Mlp1h, RandomForest, Gbt };

std::string_view kind_name(ClassifierKind kind);              // "mlp" | "rf" | "gbt"
ClassifierKind kind_from_name(std::string_view name);         // throws on unknown

// Numeric hyperparameter overrides; unknown keys are rejected by trainers.
using Hyper = std::map<std::string, double>;
double hyper_get(const Hyper& hyper, const std::string& key, double fallback);
void hyper_check_keys(const Hyper& hyper, std::initializer_list<const char*> allowed);

// A trained probabilistic multiclass model. predict_proba applies the
// model's temperature, floors every entry at kProbEps and renormalizes, so
// rows are always valid distributions.
class ProbClassifier {
public:
    virtual ~ProbClassifier() = default;

    ClassifierKind kind() const { return kind_; }
    std::size_t num_classes() const { return classes_; }
    std::size_t input_dim() const { return input_dim_; }

    double temperature() const { return temperature_; }
    void set_temperature(double t);  // throws if t <= 0

    Matrix predict_proba(const Matrix& x) const;

    // Uncalibrated probabilities; public so tests can probe raw outputs.
    virtual Matrix predict_base(const Matrix& x) const = 0;

protected:
    ProbClassifier(ClassifierKind kind, std::size_t classes, std::size_t input_dim)
        : kind_(kind), classes_(classes), input_dim_(input_dim) {}

private:
    ClassifierKind kind_;
    std::size_t classes_;
    std::size_t input_dim_;
    double temperature_ = 1.0;
};

// Argmax with ties resolved to the lowest class index; returns a 1-based label.
std::uint32_t argmax_label(std::span<const double> row);

double accuracy(const ProbClassifier& model, const Matrix& x, std::span<const std::uint32_t> y);

// Trains the requested kind with its defaults plus overrides. Labels are
// 1-based in {1..classes}; a single-class training set yields a model that
// emits that class with probability >= 0.99.
std::unique_ptr<ProbClassifier> train_classifier(ClassifierKind kind, const Matrix& x,
                                                 std::span<const std::uint32_t> y,
                                                 std::size_t classes, const Hyper& hyper,
                                                 RngStream& stream);

}  // namespace cbleak
