#include "cbleak/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cbleak/errors.hpp"
#include "cbleak/parallel.hpp"
#include "cbleak/synthgen.hpp"

namespace cbleak {

void SweepConfig::validate() const {
    if (n_values.empty() || d_values.empty() || k_values.empty() || noise_values.empty() ||
        kinds.empty()) {
        throw std::invalid_argument("SweepConfig: every grid must be non-empty");
    }
    if (levels < 1 || runs < 1) {
        throw std::invalid_argument("SweepConfig: levels and runs must be >= 1");
    }
    if (classes < 2) {
        throw std::invalid_argument("SweepConfig: classes must be >= 2");
    }
    for (std::size_t k : k_values) {
        for (std::size_t d : d_values) {
            if (k >= d) {
                throw std::invalid_argument("SweepConfig: k must be < d for every (k, d) pair");
            }
            if (k + 1 > d - k - l - 1) {
                throw std::invalid_argument("SweepConfig: empty b interval for k=" +
                                            std::to_string(k) + ", d=" + std::to_string(d));
            }
        }
    }
}

std::vector<std::size_t> leakage_levels(std::size_t k, std::size_t d, std::size_t l,
                                        std::size_t m) {
    if (m < 1) {
        throw std::invalid_argument("leakage_levels: m must be >= 1");
    }
    if (d < k + l + 2 || k + 1 > d - k - l - 1) {
        throw std::invalid_argument("leakage_levels: empty interval (k < b < d-k-l has no integers)");
    }
    const double lo = static_cast<double>(k + 1);
    const double hi = static_cast<double>(d - k - l - 1);
    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = m == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
        const auto b = static_cast<std::size_t>(std::llround(lo + t * (hi - lo)));
        if (out.empty() || b > out.back()) {
            out.push_back(b);
        }
    }
    return out;
}

std::uint64_t sweep_cell_seed(std::uint64_t base_seed, std::size_t n, std::size_t d, std::size_t k,
                              double noise, std::size_t b, std::size_t l, ClassifierKind kind,
                              std::size_t run) {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ n);
    h = mix64(h ^ d);
    h = mix64(h ^ k);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(noise));
    h = mix64(h ^ b);
    h = mix64(h ^ l);
    h = mix64(h ^ static_cast<std::uint64_t>(kind));
    h = mix64(h ^ run);
    return h;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    cfg.validate();

    std::vector<SweepRow> rows;
    std::size_t config_id = 0;
    for (std::size_t n : cfg.n_values) {
        for (std::size_t d : cfg.d_values) {
            for (std::size_t k : cfg.k_values) {
                for (double noise : cfg.noise_values) {
                    const auto levels = leakage_levels(k, d, cfg.l, cfg.levels);
                    for (std::size_t b : levels) {
                        for (ClassifierKind kind : cfg.kinds) {
                            for (std::size_t run = 0; run < cfg.runs; ++run) {
                                SweepRow row;
                                row.config_id = config_id;
                                row.n = n;
                                row.d = d;
                                row.k = k;
                                row.classes = cfg.classes;
                                row.noise = noise;
                                row.b = b;
                                row.l = cfg.l;
                                row.kind = kind;
                                row.run = run;
                                row.cell_seed = sweep_cell_seed(cfg.base_seed, n, d, k, noise, b,
                                                                cfg.l, kind, run);
                                rows.push_back(std::move(row));
                            }
                        }
                    }
                    ++config_id;
                }
            }
        }
    }

    parallel_for(rows.size(), cfg.jobs, [&](std::size_t ri) {
        SweepRow& row = rows[ri];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            GenConfig gen;
            gen.n = row.n;
            gen.d = row.d;
            gen.k = row.k;
            gen.j = row.classes;
            gen.b = row.b;
            gen.l = row.l;
            gen.sigma_x = 1.0;
            // the noise level is the shared diagonal variance of the three
            // noise covariances; sigma fields hold the std
            const double sigma = std::sqrt(row.noise);
            gen.sigma_c = sigma;
            gen.sigma_chat = sigma;
            gen.sigma_y = sigma;
            gen.seed = row.cell_seed;
            const Dataset ds = generate_dataset(gen);
            const std::uint64_t split_seed = mix64(row.cell_seed ^ 0x5b1dULL);
            const LeakageReport report = measure_leakage(ds, row.kind, split_seed);
            row.h_y_given_c = report.h_y_given_c;
            row.h_y_given_chat_c = report.h_y_given_chat_c;
            row.leakage = report.leakage;
            row.accuracy_a = report.accuracy_a;
            row.accuracy_b = report.accuracy_b;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.h_y_given_c = nan;
            row.h_y_given_chat_c = nan;
            row.leakage = nan;
            row.accuracy_a = nan;
            row.accuracy_b = nan;
        }
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = cfg.measure_time
                          ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                          : 0.0;
    });
    return rows;
}

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string sweep_csv_header() {
    return "config_id,n,d,k,J,noise,b,l,classifier,run,h_y_c,h_y_chat_c,leakage,acc_ga,acc_gb,"
           "wall_ms";
}

std::string sweep_rows_to_csv(std::span<const SweepRow> rows) {
    std::string out = sweep_csv_header();
    out += '\n';
    for (const SweepRow& row : rows) {
        out += std::to_string(row.config_id);
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.d);
        out += ',';
        out += std::to_string(row.k);
        out += ',';
        out += std::to_string(row.classes);
        out += ',';
        out += format_g6(row.noise);
        out += ',';
        out += std::to_string(row.b);
        out += ',';
        out += std::to_string(row.l);
        out += ',';
        out += kind_name(row.kind);
        out += ',';
        out += std::to_string(row.run);
        out += ',';
        out += format_g6(row.h_y_given_c);
        out += ',';
        out += format_g6(row.h_y_given_chat_c);
        out += ',';
        out += format_g6(row.leakage);
        out += ',';
        out += format_g6(row.accuracy_a);
        out += ',';
        out += format_g6(row.accuracy_b);
        out += ',';
        out += format_g6(row.wall_ms);
        out += '\n';
    }
    return out;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw FormatError("CSV column not found: " + std::string(name));
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open CSV file: " + path.string());
    }
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size()) {
                throw FormatError("CSV row width differs from header: " + path.string());
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) {
        throw FormatError("CSV file is empty: " + path.string());
    }
    return table;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman_rho: need two same-length series of size >= 2");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        return 0.0;  // a constant series carries no rank information
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace cbleak
