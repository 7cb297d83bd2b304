#include "cbleak/synthgen.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cbleak/errors.hpp"
#include "cbleak/kernels.hpp"
#include "cbleak/mathfn.hpp"

namespace cbleak {

void GenConfig::validate() const {
    if (n < 1) throw std::invalid_argument("GenConfig: n must be >= 1");
    if (k < 1) throw std::invalid_argument("GenConfig: k must be >= 1");
    if (j < 2) throw std::invalid_argument("GenConfig: j must be >= 2");
    if (h < 1) throw std::invalid_argument("GenConfig: h must be >= 1");
    if (b > d) throw std::invalid_argument("GenConfig: b must satisfy 0 <= b <= d");
    if (l > d - b) throw std::invalid_argument("GenConfig: l must satisfy 0 <= l <= d - b");
    for (double s : {sigma_x, sigma_c, sigma_chat, sigma_y}) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("GenConfig: noise scales must be finite and >= 0");
        }
    }
}

Matrix build_projection_a(const GenConfig& cfg, RngStream& stream) {
    cfg.validate();
    Matrix a(cfg.k, cfg.d);
    for (std::size_t i = 0; i < cfg.k; ++i) {
        double* row = a.row(i);
        for (std::size_t p = 0; p < cfg.b; ++p) {
            row[p] = stream.next_gaussian();
        }
    }
    return a;
}

Matrix build_projection_b(const GenConfig& cfg, RngStream& stream) {
    cfg.validate();
    Matrix b(cfg.k, cfg.d);
    const std::size_t hi = cfg.d - cfg.l;
    for (std::size_t i = 0; i < cfg.k; ++i) {
        double* row = b.row(i);
        for (std::size_t p = cfg.b; p < hi; ++p) {
            row[p] = stream.next_gaussian();
        }
    }
    return b;
}

std::vector<double> label_mlp_forward(const LabelMlp& f, std::span<const double> concepts,
                                      std::span<const double> leak) {
    const std::size_t h = f.w1.rows();
    const std::size_t j = f.w2.rows();
    if (concepts.size() + leak.size() != f.w1.cols() || f.w2.cols() != h ||
        f.b1.size() != h || f.b2.size() != j) {
        throw std::invalid_argument("label_mlp_forward: shape mismatch");
    }
    std::vector<double> input(concepts.begin(), concepts.end());
    input.insert(input.end(), leak.begin(), leak.end());
    std::vector<double> hidden(h);
    for (std::size_t i = 0; i < h; ++i) {
        const double z = kernels::dot(f.w1.row(i), input.data(), input.size()) + f.b1[i];
        hidden[i] = z > 0.0 ? z : 0.0;
    }
    std::vector<double> logits(j);
    for (std::size_t i = 0; i < j; ++i) {
        logits[i] = kernels::dot(f.w2.row(i), hidden.data(), h) + f.b2[i];
    }
    return logits;
}

Dataset generate_dataset(const GenConfig& cfg) {
    cfg.validate();

    RngStream s_feat(cfg.seed, "features");
    RngStream s_pa(cfg.seed, "proj-a");
    RngStream s_pb(cfg.seed, "proj-b");
    RngStream s_mlp(cfg.seed, "label-mlp");
    RngStream s_cnoise(cfg.seed, "concept-noise");
    RngStream s_cdraw(cfg.seed, "concept-draw");
    RngStream s_hnoise(cfg.seed, "chat-noise");
    RngStream s_ynoise(cfg.seed, "target-noise");
    RngStream s_ydraw(cfg.seed, "target-draw");

    Dataset ds;
    ds.config = cfg;

    ds.x = Matrix(cfg.n, cfg.d);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double* row = ds.x.row(i);
        for (std::size_t p = 0; p < cfg.d; ++p) {
            row[p] = cfg.sigma_x * s_feat.next_gaussian();
        }
    }

    ds.proj_a = build_projection_a(cfg, s_pa);
    ds.proj_b = build_projection_b(cfg, s_pb);

    const Matrix xa = gemm_nt(ds.x, ds.proj_a);  // n x k concept logits, pre-noise
    ds.leak = gemm_nt(ds.x, ds.proj_b);          // l_i = B x_i

    ds.c = Matrix(cfg.n, cfg.k);
    std::vector<double> logits(cfg.k);
    std::vector<double> probs(cfg.k);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double* xai = xa.row(i);
        for (std::size_t jj = 0; jj < cfg.k; ++jj) {
            logits[jj] = xai[jj] + cfg.sigma_c * s_cnoise.next_gaussian();
        }
        sigmoid_vec(logits, probs);
        double* ci = ds.c.row(i);
        for (std::size_t jj = 0; jj < cfg.k; ++jj) {
            ci[jj] = s_cdraw.next_bernoulli(probs[jj]) ? 1.0 : 0.0;
        }
    }

    ds.chat = Matrix(cfg.n, cfg.k);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double* xai = xa.row(i);
        const double* li = ds.leak.row(i);
        for (std::size_t jj = 0; jj < cfg.k; ++jj) {
            logits[jj] = xai[jj] + li[jj] + cfg.sigma_chat * s_hnoise.next_gaussian();
        }
        sigmoid_vec(logits, ds.chat.row_span(i));
    }

    ds.label_mlp.w1 = Matrix(cfg.h, 2 * cfg.k);
    for (std::size_t i = 0; i < ds.label_mlp.w1.size(); ++i) {
        ds.label_mlp.w1.data()[i] = s_mlp.next_gaussian();
    }
    ds.label_mlp.b1.assign(cfg.h, 0.0);
    ds.label_mlp.w2 = Matrix(cfg.j, cfg.h);
    for (std::size_t i = 0; i < ds.label_mlp.w2.size(); ++i) {
        ds.label_mlp.w2.data()[i] = s_mlp.next_gaussian();
    }
    ds.label_mlp.b2.assign(cfg.j, 0.0);

    ds.y.resize(cfg.n);
    std::vector<double> ylogits(cfg.j);
    std::vector<double> yprobs(cfg.j);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        ylogits = label_mlp_forward(ds.label_mlp, ds.c.row_span(i), ds.leak.row_span(i));
        for (std::size_t jj = 0; jj < cfg.j; ++jj) {
            ylogits[jj] += cfg.sigma_y * s_ynoise.next_gaussian();
        }
        softmax_vec(ylogits, yprobs);
        ds.y[i] = static_cast<std::uint32_t>(s_ydraw.next_categorical(yprobs) + 1);
    }

    return ds;
}

// ---------------------------------------------------------------------------
// GenConfig text form
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::string encode_gen_config(const GenConfig& cfg) {
    std::string out;
    auto put = [&out](std::string_view key, const std::string& value) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    };
    put("n", std::to_string(cfg.n));
    put("d", std::to_string(cfg.d));
    put("k", std::to_string(cfg.k));
    put("j", std::to_string(cfg.j));
    put("b", std::to_string(cfg.b));
    put("l", std::to_string(cfg.l));
    put("h", std::to_string(cfg.h));
    put("sigma_x", fmt_double(cfg.sigma_x));
    put("sigma_c", fmt_double(cfg.sigma_c));
    put("sigma_chat", fmt_double(cfg.sigma_chat));
    put("sigma_y", fmt_double(cfg.sigma_y));
    put("seed", std::to_string(cfg.seed));
    return out;
}

GenConfig parse_gen_config(std::string_view text) {
    GenConfig cfg;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw FormatError("GenConfig: expected key=value, got '" + std::string(line) + "'");
        }
        std::string_view key = line.substr(0, eq);
        std::string_view val = line.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
        while (!val.empty() && val.front() == ' ') val.remove_prefix(1);

        auto parse_size = [&](std::size_t& out) {
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
            if (ec != std::errc() || p != val.data() + val.size()) {
                throw FormatError("GenConfig: bad integer for " + std::string(key));
            }
        };
        auto parse_f64 = [&](double& out) {
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
            if (ec != std::errc() || p != val.data() + val.size()) {
                throw FormatError("GenConfig: bad float for " + std::string(key));
            }
        };

        if (key == "n") parse_size(cfg.n);
        else if (key == "d") parse_size(cfg.d);
        else if (key == "k") parse_size(cfg.k);
        else if (key == "j") parse_size(cfg.j);
        else if (key == "b") parse_size(cfg.b);
        else if (key == "l") parse_size(cfg.l);
        else if (key == "h") parse_size(cfg.h);
        else if (key == "sigma_x") parse_f64(cfg.sigma_x);
        else if (key == "sigma_c") parse_f64(cfg.sigma_c);
        else if (key == "sigma_chat") parse_f64(cfg.sigma_chat);
        else if (key == "sigma_y") parse_f64(cfg.sigma_y);
        else if (key == "seed") {
            std::uint64_t s = 0;
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), s);
            if (ec != std::errc() || p != val.data() + val.size()) {
                throw FormatError("GenConfig: bad integer for seed");
            }
            cfg.seed = s;
        } else {
            throw FormatError("GenConfig: unknown key '" + std::string(key) + "'");
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Binary dataset file
//
// magic "CBLK", version u32 LE, then n d k J as u64 LE, then X (n*d f64 LE,
// row-major), C (n*k u8), Chat (n*k f64), L (n*k f64), Y (n u32, 1-based),
// then the GenConfig text prefixed by its u64 LE byte length.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'B', 'L', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void put_bytes(std::string& buf, const void* p, std::size_t len) {
    buf.append(static_cast<const char*>(p), len);
}

void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    put_bytes(buf, b, 4);
}

void put_u64(std::string& buf, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    put_bytes(buf, b, 8);
}

void put_f64(std::string& buf, double v) {
    put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

struct Cursor {
    const unsigned char* p;
    std::size_t left;

    void need(std::size_t n) const {
        if (left < n) {
            throw FormatError("dataset file truncated");
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        p += 8;
        left -= 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    unsigned char u8() {
        need(1);
        unsigned char v = *p;
        ++p;
        --left;
        return v;
    }
};

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    const GenConfig& cfg = ds.config;
    std::string buf;
    buf.reserve(64 + ds.x.size() * 8 + ds.c.size() + ds.chat.size() * 8 + ds.leak.size() * 8 +
                ds.y.size() * 4);
    put_bytes(buf, kMagic, 4);
    put_u32(buf, kFormatVersion);
    put_u64(buf, cfg.n);
    put_u64(buf, cfg.d);
    put_u64(buf, cfg.k);
    put_u64(buf, cfg.j);
    for (double v : ds.x.values()) put_f64(buf, v);
    for (double v : ds.c.values()) buf.push_back(v != 0.0 ? '\1' : '\0');
    for (double v : ds.chat.values()) put_f64(buf, v);
    for (double v : ds.leak.values()) put_f64(buf, v);
    for (std::uint32_t v : ds.y) put_u32(buf, v);
    const std::string cfg_text = encode_gen_config(cfg);
    put_u64(buf, cfg_text.size());
    buf += cfg_text;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open dataset file: " + path.string());
    }
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Cursor cur{reinterpret_cast<const unsigned char*>(raw.data()), raw.size()};

    cur.need(4);
    if (std::memcmp(cur.p, kMagic, 4) != 0) {
        throw FormatError("not a CBLK dataset file: " + path.string());
    }
    cur.p += 4;
    cur.left -= 4;
    const std::uint32_t version = cur.u32();
    if (version != kFormatVersion) {
        throw FormatError("unsupported CBLK version " + std::to_string(version));
    }
    const std::uint64_t n = cur.u64();
    const std::uint64_t d = cur.u64();
    const std::uint64_t k = cur.u64();
    const std::uint64_t j = cur.u64();

    Dataset ds;
    ds.x = Matrix(n, d);
    for (auto i = 0ull; i < n * d; ++i) ds.x.data()[i] = cur.f64();
    ds.c = Matrix(n, k);
    for (auto i = 0ull; i < n * k; ++i) {
        const unsigned char v = cur.u8();
        if (v > 1) {
            throw FormatError("dataset file: non-binary concept value");
        }
        ds.c.data()[i] = v;
    }
    ds.chat = Matrix(n, k);
    for (auto i = 0ull; i < n * k; ++i) ds.chat.data()[i] = cur.f64();
    ds.leak = Matrix(n, k);
    for (auto i = 0ull; i < n * k; ++i) ds.leak.data()[i] = cur.f64();
    ds.y.resize(n);
    for (auto i = 0ull; i < n; ++i) {
        ds.y[i] = cur.u32();
        if (ds.y[i] < 1 || ds.y[i] > j) {
            throw FormatError("dataset file: label out of range");
        }
    }
    const std::uint64_t cfg_len = cur.u64();
    cur.need(cfg_len);
    const std::string cfg_text(reinterpret_cast<const char*>(cur.p), cfg_len);
    cur.p += cfg_len;
    cur.left -= cfg_len;
    if (cur.left != 0) {
        throw FormatError("dataset file: trailing bytes");
    }
    ds.config = parse_gen_config(cfg_text);
    if (ds.config.n != n || ds.config.d != d || ds.config.k != k || ds.config.j != j) {
        throw FormatError("dataset file: header and config dimensions disagree");
    }

    // Projections and the label MLP are deterministic in the seed; rebuild
    // them rather than storing redundant copies.
    RngStream s_pa(ds.config.seed, "proj-a");
    RngStream s_pb(ds.config.seed, "proj-b");
    RngStream s_mlp(ds.config.seed, "label-mlp");
    ds.proj_a = build_projection_a(ds.config, s_pa);
    ds.proj_b = build_projection_b(ds.config, s_pb);
    ds.label_mlp.w1 = Matrix(ds.config.h, 2 * ds.config.k);
    for (std::size_t i = 0; i < ds.label_mlp.w1.size(); ++i) {
        ds.label_mlp.w1.data()[i] = s_mlp.next_gaussian();
    }
    ds.label_mlp.b1.assign(ds.config.h, 0.0);
    ds.label_mlp.w2 = Matrix(ds.config.j, ds.config.h);
    for (std::size_t i = 0; i < ds.label_mlp.w2.size(); ++i) {
        ds.label_mlp.w2.data()[i] = s_mlp.next_gaussian();
    }
    ds.label_mlp.b2.assign(ds.config.j, 0.0);
    return ds;
}

}  // namespace cbleak
