#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbleak/matrix.hpp"
#include "cbleak/rng.hpp"

namespace cbleak {

// Generator knobs. b and l are the two leakage dials: the concept
// projection reads features 1..b, the leakage projection reads features
// b+1..d-l.
struct GenConfig {
    std::size_t n = 1000;  // observations
    std::size_t d = 100;   // feature dimension
    std::size_t k = 10;    // concepts
    std::size_t j = 5;     // target classes
    std::size_t b = 50;    // features feeding the concept projection
    std::size_t l = 0;     // trailing features excluded from the leakage projection
    std::size_t h = 64;    // label-MLP hidden width
    double sigma_x = 1.0;
    double sigma_c = 0.5;
    double sigma_chat = 0.5;
    double sigma_y = 0.5;
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument
};

// Frozen random MLP that maps (concepts, leakage) to target logits.
struct LabelMlp {
    Matrix w1;               // h x 2k
    std::vector<double> b1;  // h, zeros at construction
    Matrix w2;               // J x h
    std::vector<double> b2;  // J, zeros at construction
};

std::vector<double> label_mlp_forward(const LabelMlp& f, std::span<const double> concepts,
                                      std::span<const double> leak);

struct Dataset {
    Matrix x;     // n x d
    Matrix c;     // n x k, entries exactly 0/1
    Matrix chat;  // n x k, strictly inside (0,1)
    Matrix leak;  // n x k
    std::vector<std::uint32_t> y;  // 1-based labels in {1..J}
    GenConfig config;
    Matrix proj_a;  // k x d, columns b+1..d exactly zero
    Matrix proj_b;  // k x d, columns 1..b and d-l+1..d exactly zero
    LabelMlp label_mlp;
};

Matrix build_projection_a(const GenConfig& cfg, RngStream& stream);
Matrix build_projection_b(const GenConfig& cfg, RngStream& stream);
Dataset generate_dataset(const GenConfig& cfg);

// Flat "key = value" text form of a GenConfig; round-trips exactly.
std::string encode_gen_config(const GenConfig& cfg);
GenConfig parse_gen_config(std::string_view text);

// Binary dataset file ("CBLK"); round-trips bit-exactly.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace cbleak
