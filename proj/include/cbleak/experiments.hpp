#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cbleak/classifiers.hpp"
#include "cbleak/leakage.hpp"

namespace cbleak {

// The full experiment grid: every (n, d, k, noise) config is swept over the
// b schedule, all classifier kinds and `runs` repetitions.
struct SweepConfig {
    std::vector<std::size_t> n_values{500, 2000, 10000};
    std::vector<std::size_t> d_values{500, 2500};
    std::vector<std::size_t> k_values{50, 200};
    std::vector<double> noise_values{0.5, 2.0};
    std::size_t classes = 5;
    std::vector<ClassifierKind> kinds{ClassifierKind::Mlp1h, ClassifierKind::RandomForest,
                                      ClassifierKind::Gbt};
    std::size_t levels = 30;
    std::size_t runs = 5;
    std::size_t l = 0;
    std::uint64_t base_seed = 1;
    std::size_t jobs = 1;
    bool measure_time = true;

    void validate() const;
};

struct SweepRow {
    std::size_t config_id = 0;
    std::size_t n = 0, d = 0, k = 0, classes = 0;
    double noise = 0.0;
    std::size_t b = 0, l = 0;
    ClassifierKind kind = ClassifierKind::Gbt;
    std::size_t run = 0;
    double h_y_given_c = 0.0;
    double h_y_given_chat_c = 0.0;
    double leakage = 0.0;
    double accuracy_a = 0.0;
    double accuracy_b = 0.0;
    double wall_ms = 0.0;
    std::uint64_t cell_seed = 0;
    bool ok = true;
    std::string error;
};

// m evenly spaced integers over [k+1, d-k-l-1] (endpoints included,
// duplicates removed after rounding).
std::vector<std::size_t> leakage_levels(std::size_t k, std::size_t d, std::size_t l,
                                        std::size_t m = 30);

// Stable per-cell seed: no two cells of a sweep share an RNG stream.
std::uint64_t sweep_cell_seed(std::uint64_t base_seed, std::size_t n, std::size_t d, std::size_t k,
                              double noise, std::size_t b, std::size_t l, ClassifierKind kind,
                              std::size_t run);

// Runs every cell (in parallel up to cfg.jobs) and returns rows in the
// deterministic enumeration order. Cell failures are recorded on the row
// (ok = false, NaN metrics) and do not abort the sweep.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

std::string sweep_csv_header();
std::string sweep_rows_to_csv(std::span<const SweepRow> rows);  // header + rows

// Minimal CSV reader for the artifact's own outputs (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(std::string_view name) const;  // throws if absent
};
CsvTable read_csv(const std::filesystem::path& path);

// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// "%.6g" formatting used for every float written to CSV.
std::string format_g6(double v);

}  // namespace cbleak
