#include "cbleak/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "cbleak/calibration.hpp"
#include "cbleak/errors.hpp"
#include "cbleak/mathfn.hpp"

namespace cbleak {

double estimate_entropy(const ProbClassifier& model, const Matrix& inputs,
                        std::span<const std::uint32_t> y) {
    if (inputs.rows() == 0 || y.empty()) {
        throw std::invalid_argument("estimate_entropy: empty input");
    }
    if (inputs.rows() != y.size()) {
        throw std::invalid_argument("estimate_entropy: label count mismatch");
    }
    const Matrix probs = model.predict_proba(inputs);
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        total += clipped_neg_log(probs(i, y[i] - 1));
    }
    return total / static_cast<double>(probs.rows());
}

LeakageReport measure_leakage_tables(const Matrix& chat, const Matrix& c,
                                     std::span<const std::uint32_t> y, std::size_t classes,
                                     ClassifierKind kind, std::uint64_t split_seed,
                                     SplitRatios ratios) {
    const std::size_t n = y.size();
    if (chat.rows() != n || c.rows() != n || n == 0) {
        throw std::invalid_argument("measure_leakage: inconsistent or empty inputs");
    }

    const SplitIndices split = split_dataset(n, ratios, split_seed);

    std::vector<std::uint32_t> y_train, y_val, y_test;
    auto gather = [&y](const std::vector<std::size_t>& idx, std::vector<std::uint32_t>& out) {
        out.resize(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            out[i] = y[idx[i]];
        }
    };
    gather(split.train, y_train);
    gather(split.val, y_val);
    gather(split.test, y_test);

    if (std::set<std::uint32_t>(y_train.begin(), y_train.end()).size() < 2) {
        throw DegenerateSplitError("measure_leakage: training split has fewer than 2 classes");
    }

    const Matrix xa = hstack(chat, c);  // g_a sees chat columns first, then c
    const Matrix& xb = c;

    const Matrix xa_train = take_rows(xa, split.train);
    const Matrix xa_val = take_rows(xa, split.val);
    const Matrix xa_test = take_rows(xa, split.test);
    const Matrix xb_train = take_rows(xb, split.train);
    const Matrix xb_val = take_rows(xb, split.val);
    const Matrix xb_test = take_rows(xb, split.test);

    RngStream stream_a(split_seed, "g-a");
    RngStream stream_b(split_seed, "g-b");
    auto ga = train_classifier(kind, xa_train, y_train, classes, {}, stream_a);
    auto gb = train_classifier(kind, xb_train, y_train, classes, {}, stream_b);

    const CalibrationResult cal_a = calibrate_classifier(*ga, xa_val, y_val);
    const CalibrationResult cal_b = calibrate_classifier(*gb, xb_val, y_val);

    LeakageReport report;
    report.h_y_given_chat_c = estimate_entropy(*ga, xa_test, y_test);
    report.h_y_given_c = estimate_entropy(*gb, xb_test, y_test);
    report.leakage = report.h_y_given_c - report.h_y_given_chat_c;
    report.kind = kind;
    report.temperature_a = cal_a.temperature;
    report.temperature_b = cal_b.temperature;
    report.accuracy_a = accuracy(*ga, xa_test, y_test);
    report.accuracy_b = accuracy(*gb, xb_test, y_test);
    report.n_train = split.train.size();
    report.n_val = split.val.size();
    report.n_test = split.test.size();
    report.split_seed = split_seed;
    return report;
}

LeakageReport measure_leakage(const Dataset& ds, ClassifierKind kind, std::uint64_t split_seed,
                              SplitRatios ratios) {
    return measure_leakage_tables(ds.chat, ds.c, ds.y, ds.config.j, kind, split_seed, ratios);
}

double plugin_cmi_discrete(std::span<const std::uint32_t> y, const Matrix& chat_bin,
                           const Matrix& c) {
    const std::size_t n = y.size();
    if (n == 0 || chat_bin.rows() != n || c.rows() != n) {
        throw std::invalid_argument("plugin_cmi_discrete: inconsistent or empty inputs");
    }
    const std::size_t ka = chat_bin.cols();
    const std::size_t kc = c.cols();
    std::uint32_t y_max = 0;
    for (std::uint32_t label : y) {
        y_max = std::max(y_max, label);
    }
    if (ka + kc > 16) {
        throw std::invalid_argument("plugin_cmi_discrete: joint support too large");
    }
    const std::size_t a_cells = std::size_t{1} << ka;
    const std::size_t c_cells = std::size_t{1} << kc;
    if (static_cast<std::size_t>(y_max) * a_cells * c_cells > (std::size_t{1} << 16)) {
        throw std::invalid_argument("plugin_cmi_discrete: joint support too large");
    }

    auto encode = [](const Matrix& m, std::size_t row) {
        std::size_t code = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m(row, j);
            if (v != 0.0 && v != 1.0) {
                throw std::invalid_argument("plugin_cmi_discrete: inputs must be binary");
            }
            code = (code << 1) | (v != 0.0 ? 1u : 0u);
        }
        return code;
    };

    // counts over (y, a, c), plus the marginals the plug-in estimator needs
    std::vector<double> n_yac(y_max * a_cells * c_cells, 0.0);
    std::vector<double> n_yc(y_max * c_cells, 0.0);
    std::vector<double> n_ac(a_cells * c_cells, 0.0);
    std::vector<double> n_c(c_cells, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = encode(chat_bin, i);
        const std::size_t cc = encode(c, i);
        const std::size_t yy = y[i] - 1;
        n_yac[(yy * a_cells + a) * c_cells + cc] += 1.0;
        n_yc[yy * c_cells + cc] += 1.0;
        n_ac[a * c_cells + cc] += 1.0;
        n_c[cc] += 1.0;
    }

    // I(y; a | c) = sum p(y,a,c) * ln[ p(y,a,c) p(c) / (p(y,c) p(a,c)) ]
    double cmi = 0.0;
    const double total = static_cast<double>(n);
    for (std::size_t yy = 0; yy < y_max; ++yy) {
        for (std::size_t a = 0; a < a_cells; ++a) {
            for (std::size_t cc = 0; cc < c_cells; ++cc) {
                const double joint = n_yac[(yy * a_cells + a) * c_cells + cc];
                if (joint == 0.0) {
                    continue;
                }
                const double ratio =
                    (joint * n_c[cc]) / (n_yc[yy * c_cells + cc] * n_ac[a * c_cells + cc]);
                cmi += (joint / total) * std::log(ratio);
            }
        }
    }
    return cmi;
}

}  // namespace cbleak
