#include "cbleak/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbleak/cbm.hpp"
#include "cbleak/errors.hpp"
#include "cbleak/experiments.hpp"
#include "cbleak/leakage.hpp"
#include "cbleak/parallel.hpp"
#include "cbleak/svgplot.hpp"
#include "cbleak/synthgen.hpp"

namespace cbleak {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Argument-class failures (bad flags, missing files, malformed configs);
// mapped to exit code 1. Everything else that throws is exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("CBLEAK_SEED")) {
        std::uint64_t v = 0;
        const std::string_view sv(env);
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec == std::errc() && p == sv.data() + sv.size()) {
            return v;
        }
        throw UsageError("CBLEAK_SEED is not a valid integer");
    }
    return 42;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const std::string& tok : split_commas(s)) {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) {
            throw UsageError("bad integer '" + tok + "' in " + what);
        }
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const std::string& tok : split_commas(s)) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) {
            throw UsageError("bad number '" + tok + "' in " + what);
        }
        out.push_back(v);
    }
    return out;
}

std::vector<ClassifierKind> parse_kind_list(const std::string& s) {
    std::vector<ClassifierKind> out;
    for (const std::string& tok : split_commas(s)) {
        try {
            out.push_back(kind_from_name(tok));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

// Flat "key = value" file with '#' comments.
std::map<std::string, std::string> read_kv_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open config file: " + path.string());
    }
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv(line);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r'))
            sv.remove_suffix(1);
        if (sv.empty() || sv.front() == '#') {
            continue;
        }
        const std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string_view key = sv.substr(0, eq);
        std::string_view val = sv.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
        while (!val.empty() && val.front() == ' ') val.remove_prefix(1);
        kv[std::string(key)] = std::string(val);
    }
    return kv;
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

json manifest_base(const std::string& subcommand, std::uint64_t seed) {
    json m;
    m["tool"] = std::string(kToolName);
    m["version"] = std::string(kToolVersion);
    m["subcommand"] = subcommand;
    m["base_seed"] = seed;
    return m;
}

// The manifest lives next to the artifact it describes.
void write_manifest(const fs::path& artifact, const json& manifest) {
    write_text_file(fs::path(artifact.string() + ".manifest.json"), manifest.dump(2) + "\n");
}

json gen_config_json(const GenConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["d"] = cfg.d;
    j["k"] = cfg.k;
    j["j"] = cfg.j;
    j["b"] = cfg.b;
    j["l"] = cfg.l;
    j["h"] = cfg.h;
    j["sigma_x"] = cfg.sigma_x;
    j["sigma_c"] = cfg.sigma_c;
    j["sigma_chat"] = cfg.sigma_chat;
    j["sigma_y"] = cfg.sigma_y;
    j["seed"] = cfg.seed;
    return j;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string out;
    std::string config_file;
    std::uint64_t n = 0, d = 0, k = 0, j = 0, b = 0, l = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    bool has_n = false, has_d = false, has_k = false, has_j = false, has_b = false, has_l = false;
    bool has_noise = false, has_seed = false;
};

GenConfig resolve_gen_config(const GenerateArgs& args) {
    GenConfig cfg;
    cfg.seed = default_seed();
    if (!args.config_file.empty()) {
        std::ifstream in(args.config_file);
        if (!in) {
            throw UsageError("cannot open config file: " + args.config_file);
        }
        const std::string text((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        try {
            cfg = parse_gen_config(text);
        } catch (const FormatError& e) {
            throw UsageError(e.what());
        }
    }
    if (args.has_n) cfg.n = args.n;
    if (args.has_d) cfg.d = args.d;
    if (args.has_k) cfg.k = args.k;
    if (args.has_j) cfg.j = args.j;
    if (args.has_b) cfg.b = args.b;
    if (args.has_l) cfg.l = args.l;
    if (args.has_noise) {
        if (args.noise < 0.0) {
            throw UsageError("--noise must be >= 0");
        }
        // --noise is the shared diagonal variance; sigma fields hold the std
        const double sigma = std::sqrt(args.noise);
        cfg.sigma_c = sigma;
        cfg.sigma_chat = sigma;
        cfg.sigma_y = sigma;
    }
    if (args.has_seed) cfg.seed = args.seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

int cmd_generate(const GenerateArgs& args) {
    const GenConfig cfg = resolve_gen_config(args);
    const Dataset ds = generate_dataset(cfg);
    save_dataset(ds, args.out);

    json manifest = manifest_base("generate", cfg.seed);
    manifest["config"] = gen_config_json(cfg);
    manifest["outputs"] = json::array({args.out});
    write_manifest(args.out, manifest);

    std::cout << "wrote " << args.out << " (n=" << cfg.n << ", d=" << cfg.d << ", k=" << cfg.k
              << ", J=" << cfg.j << ", b=" << cfg.b << ", l=" << cfg.l << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// measure
// ---------------------------------------------------------------------------

struct MeasureArgs {
    std::string in;
    std::string out;
    std::string classifier = "gbt";
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool no_timing = false;
};

SweepRow report_to_row(const LeakageReport& report, const GenConfig& cfg, double wall_ms) {
    SweepRow row;
    row.config_id = 0;
    row.n = cfg.n;
    row.d = cfg.d;
    row.k = cfg.k;
    row.classes = cfg.j;
    row.noise = cfg.sigma_c * cfg.sigma_c;  // the noise column is the diagonal variance
    row.b = cfg.b;
    row.l = cfg.l;
    row.kind = report.kind;
    row.run = 0;
    row.h_y_given_c = report.h_y_given_c;
    row.h_y_given_chat_c = report.h_y_given_chat_c;
    row.leakage = report.leakage;
    row.accuracy_a = report.accuracy_a;
    row.accuracy_b = report.accuracy_b;
    row.wall_ms = wall_ms;
    row.cell_seed = report.split_seed;
    return row;
}

int cmd_measure(const MeasureArgs& args) {
    ClassifierKind kind;
    try {
        kind = kind_from_name(args.classifier);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    Dataset ds;
    try {
        ds = load_dataset(args.in);
    } catch (const FormatError& e) {
        throw UsageError(e.what());
    }
    const std::uint64_t seed = args.has_seed ? args.seed : default_seed();

    const auto t0 = std::chrono::steady_clock::now();
    const LeakageReport report = measure_leakage(ds, kind, seed);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms =
        args.no_timing ? 0.0 : std::chrono::duration<double, std::milli>(t1 - t0).count();

    const GenConfig& cfg = ds.config;
    std::printf("dataset:     n=%zu d=%zu k=%zu J=%zu b=%zu l=%zu noise(c,chat,y)=(%s,%s,%s)\n",
                cfg.n, cfg.d, cfg.k, cfg.j, cfg.b, cfg.l, format_g6(cfg.sigma_c).c_str(),
                format_g6(cfg.sigma_chat).c_str(), format_g6(cfg.sigma_y).c_str());
    std::printf("classifier:  %s   split: %zu/%zu/%zu (seed %llu)\n",
                std::string(kind_name(kind)).c_str(), report.n_train, report.n_val, report.n_test,
                static_cast<unsigned long long>(seed));
    std::printf("H(y|c):      %.6f nats   (g_b: acc %.4f, T %.4f)\n", report.h_y_given_c,
                report.accuracy_b, report.temperature_b);
    std::printf("H(y|chat,c): %.6f nats   (g_a: acc %.4f, T %.4f)\n", report.h_y_given_chat_c,
                report.accuracy_a, report.temperature_a);
    std::printf("leakage:     %.6f nats\n", report.leakage);

    const SweepRow row = report_to_row(report, cfg, wall_ms);
    const std::string csv = sweep_rows_to_csv({&row, 1});
    if (!args.out.empty()) {
        write_text_file(args.out, csv);
        json manifest = manifest_base("measure", seed);
        manifest["config"] = gen_config_json(cfg);
        manifest["classifier"] = std::string(kind_name(kind));
        manifest["inputs"] = json::array({args.in});
        manifest["outputs"] = json::array({args.out});
        json summary;
        summary["leakage"] = report.leakage;
        summary["negative_leakage_rows"] = report.leakage < 0.0 ? json::array({0}) : json::array();
        manifest["summary"] = summary;
        write_manifest(args.out, manifest);
    } else {
        std::printf("csv:\n%s", csv.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string out;
    std::string config_file;
    std::string n_list, d_list, k_list, noise_list, kind_list;
    std::uint64_t levels = 0, runs = 0, l = 0, j = 0, seed = 0, jobs = 0;
    bool has_levels = false, has_runs = false, has_l = false, has_j = false, has_seed = false;
    bool no_timing = false;
};

SweepConfig resolve_sweep_config(const SweepArgs& args) {
    SweepConfig cfg;
    cfg.base_seed = default_seed();
    cfg.jobs = default_jobs();
    if (!args.config_file.empty()) {
        const auto kv = read_kv_file(args.config_file);
        for (const auto& [key, value] : kv) {
            if (key == "n") cfg.n_values = parse_size_list(value, "n");
            else if (key == "d") cfg.d_values = parse_size_list(value, "d");
            else if (key == "k") cfg.k_values = parse_size_list(value, "k");
            else if (key == "noise") cfg.noise_values = parse_double_list(value, "noise");
            else if (key == "classifiers") cfg.kinds = parse_kind_list(value);
            else if (key == "levels") cfg.levels = parse_size_list(value, "levels").at(0);
            else if (key == "runs") cfg.runs = parse_size_list(value, "runs").at(0);
            else if (key == "l") cfg.l = parse_size_list(value, "l").at(0);
            else if (key == "j") cfg.classes = parse_size_list(value, "j").at(0);
            else if (key == "seed") cfg.base_seed = parse_size_list(value, "seed").at(0);
            else throw UsageError("unknown sweep config key '" + key + "'");
        }
    }
    if (!args.n_list.empty()) cfg.n_values = parse_size_list(args.n_list, "--n");
    if (!args.d_list.empty()) cfg.d_values = parse_size_list(args.d_list, "--d");
    if (!args.k_list.empty()) cfg.k_values = parse_size_list(args.k_list, "--k");
    if (!args.noise_list.empty()) cfg.noise_values = parse_double_list(args.noise_list, "--noise");
    if (!args.kind_list.empty()) cfg.kinds = parse_kind_list(args.kind_list);
    if (args.has_levels) cfg.levels = args.levels;
    if (args.has_runs) cfg.runs = args.runs;
    if (args.has_l) cfg.l = args.l;
    if (args.has_j) cfg.classes = args.j;
    if (args.has_seed) cfg.base_seed = args.seed;
    if (args.jobs > 0) cfg.jobs = args.jobs;
    cfg.measure_time = !args.no_timing;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

json sweep_config_json(const SweepConfig& cfg) {
    json j;
    j["n"] = cfg.n_values;
    j["d"] = cfg.d_values;
    j["k"] = cfg.k_values;
    j["noise"] = cfg.noise_values;
    j["j"] = cfg.classes;
    std::vector<std::string> kinds;
    kinds.reserve(cfg.kinds.size());
    for (ClassifierKind kind : cfg.kinds) {
        kinds.emplace_back(kind_name(kind));
    }
    j["classifiers"] = kinds;
    j["levels"] = cfg.levels;
    j["runs"] = cfg.runs;
    j["l"] = cfg.l;
    j["seed"] = cfg.base_seed;
    j["timing"] = cfg.measure_time;
    return j;
}

json rows_summary(std::span<const SweepRow> rows) {
    json negatives = json::array();
    json errors = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok && rows[i].leakage < 0.0) {
            negatives.push_back(i);
        }
        if (!rows[i].ok) {
            json err;
            err["row"] = i;
            err["message"] = rows[i].error;
            errors.push_back(err);
        }
    }
    json summary;
    summary["rows"] = rows.size();
    summary["negative_leakage_count"] = negatives.size();
    summary["negative_leakage_rows"] = negatives;
    summary["error_rows"] = errors;
    return summary;
}

int cmd_sweep(const SweepArgs& args) {
    const SweepConfig cfg = resolve_sweep_config(args);
    const std::vector<SweepRow> rows = run_sweep(cfg);
    write_text_file(args.out, sweep_rows_to_csv(rows));

    json manifest = manifest_base("sweep", cfg.base_seed);
    manifest["config"] = sweep_config_json(cfg);
    if (!args.config_file.empty()) {
        manifest["inputs"] = json::array({args.config_file});
    }
    manifest["outputs"] = json::array({args.out});
    manifest["summary"] = rows_summary(rows);
    write_manifest(args.out, manifest);

    std::size_t failures = 0;
    for (const SweepRow& row : rows) {
        if (!row.ok) {
            ++failures;
        }
    }
    std::cout << "wrote " << args.out << " (" << rows.size() << " rows";
    if (failures > 0) {
        std::cout << ", " << failures << " failed cells";
    }
    std::cout << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cbm-sweep
// ---------------------------------------------------------------------------

struct CbmSweepArgs {
    std::string out;
    std::string k_list = "16";
    std::string lambda_list = "0.01,0.1,0.5,1,2,5,10";
    std::string classifier = "gbt";
    std::uint64_t n = 2000, d = 200, j = 5, b = 40, l = 0;
    double noise = 0.5;
    std::uint64_t runs = 3, seed = 0, jobs = 0;
    bool has_seed = false;
};

std::string cbm_csv_header() {
    return "lambda,k,run,h_y_c,h_y_chat_c,leakage,acc_ga,acc_gb";
}

std::string cbm_rows_to_csv(std::span<const CbmSweepRow> rows) {
    std::string out = cbm_csv_header();
    out += '\n';
    for (const CbmSweepRow& row : rows) {
        out += format_g6(row.lambda);
        out += ',';
        out += std::to_string(row.k);
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
        out += '\n';
    }
    return out;
}

int cmd_cbm_sweep(const CbmSweepArgs& args) {
    ClassifierKind kind;
    std::vector<double> lambdas;
    std::vector<std::size_t> k_values;
    try {
        kind = kind_from_name(args.classifier);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    lambdas = parse_double_list(args.lambda_list, "--lambda-grid");
    k_values = parse_size_list(args.k_list, "--k");

    if (args.noise < 0.0) {
        throw UsageError("--noise must be >= 0");
    }
    GenConfig cfg;
    cfg.n = args.n;
    cfg.d = args.d;
    cfg.k = k_values.front();
    cfg.j = args.j;
    cfg.b = args.b;
    cfg.l = args.l;
    const double sigma = std::sqrt(args.noise);
    cfg.sigma_c = sigma;
    cfg.sigma_chat = sigma;
    cfg.sigma_y = sigma;
    cfg.seed = args.has_seed ? args.seed : default_seed();
    for (std::size_t k : k_values) {
        GenConfig probe = cfg;
        probe.k = k;
        try {
            probe.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }

    const std::size_t jobs = args.jobs > 0 ? args.jobs : default_jobs();
    const std::vector<CbmSweepRow> rows = lambda_sweep(cfg, lambdas, k_values, kind, args.runs, jobs);
    write_text_file(args.out, cbm_rows_to_csv(rows));

    json manifest = manifest_base("cbm-sweep", cfg.seed);
    json config = gen_config_json(cfg);
    config.erase("k");
    config["k_values"] = k_values;
    config["lambdas"] = lambdas;
    config["runs"] = args.runs;
    config["classifier"] = std::string(kind_name(kind));
    manifest["config"] = config;
    manifest["outputs"] = json::array({args.out});
    json negatives = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].leakage < 0.0) {
            negatives.push_back(i);
        }
    }
    json summary;
    summary["rows"] = rows.size();
    summary["negative_leakage_count"] = negatives.size();
    summary["negative_leakage_rows"] = negatives;
    manifest["summary"] = summary;
    write_manifest(args.out, manifest);

    std::cout << "wrote " << args.out << " (" << rows.size() << " rows)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

struct PlotArgs {
    std::string in;
    std::string out;
};

double parse_csv_double(const std::string& s) {
    if (s == "nan" || s == "-nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw UsageError("bad numeric CSV field '" + s + "'");
    }
    return v;
}

struct SeriesAccumulator {
    // x -> run values
    std::map<double, std::vector<double>> cells;

    std::vector<PlotPoint> points() const {
        std::vector<PlotPoint> out;
        for (const auto& [x, values] : cells) {
            PlotPoint p;
            p.x = x;
            p.lo = values.front();
            p.hi = values.front();
            double sum = 0.0;
            for (double v : values) {
                sum += v;
                p.lo = std::min(p.lo, v);
                p.hi = std::max(p.hi, v);
            }
            p.mean = sum / static_cast<double>(values.size());
            out.push_back(p);
        }
        return out;
    }
};

int cmd_plot(const PlotArgs& args) {
    CsvTable table;
    try {
        table = read_csv(args.in);
    } catch (const FormatError& e) {
        throw UsageError(e.what());
    }

    const bool is_cbm = !table.header.empty() && table.header.front() == "lambda";
    std::vector<std::string> outputs;

    if (is_cbm) {
        const std::size_t col_lambda = table.column("lambda");
        const std::size_t col_k = table.column("k");
        const std::size_t col_leak = table.column("leakage");
        std::map<std::string, SeriesAccumulator> by_k;  // keyed by k string
        for (const auto& row : table.rows) {
            const double leak = parse_csv_double(row[col_leak]);
            if (std::isnan(leak)) {
                continue;
            }
            by_k[row[col_k]].cells[parse_csv_double(row[col_lambda])].push_back(leak);
        }
        if (by_k.empty()) {
            throw UsageError("plot: no usable rows in " + args.in);
        }
        std::vector<PlotSeries> series;
        for (const auto& [k, acc] : by_k) {
            series.push_back({"k=" + k, acc.points()});
        }
        PlotSpec spec;
        spec.title = "leakage vs lambda";
        spec.x_label = "lambda";
        spec.y_label = "estimated leakage (nats)";
        spec.log_x = true;
        write_text_file(args.out, emit_svg_lineplot(spec, series));
        outputs.push_back(args.out);
    } else {
        const std::size_t col_n = table.column("n");
        const std::size_t col_d = table.column("d");
        const std::size_t col_k = table.column("k");
        const std::size_t col_noise = table.column("noise");
        const std::size_t col_b = table.column("b");
        const std::size_t col_kind = table.column("classifier");
        const std::size_t col_leak = table.column("leakage");

        struct Panel {
            std::map<std::string, SeriesAccumulator> by_kind;
        };
        std::map<std::string, Panel> panels;  // key "n..._d..._k..._noise..."
        for (const auto& row : table.rows) {
            const double leak = parse_csv_double(row[col_leak]);
            if (std::isnan(leak)) {
                continue;  // failed cells are listed in the sweep manifest
            }
            const std::string key = "n" + row[col_n] + "_d" + row[col_d] + "_k" + row[col_k] +
                                    "_noise" + row[col_noise];
            panels[key].by_kind[row[col_kind]].cells[parse_csv_double(row[col_b])].push_back(leak);
        }
        if (panels.empty()) {
            throw UsageError("plot: no usable rows in " + args.in);
        }

        const fs::path out_path(args.out);
        for (const auto& [key, panel] : panels) {
            std::vector<PlotSeries> series;
            for (const auto& [kind, acc] : panel.by_kind) {
                series.push_back({kind, acc.points()});
            }
            PlotSpec spec;
            spec.title = "leakage vs b (" + key + ")";
            spec.x_label = "b";
            spec.y_label = "estimated leakage (nats)";
            fs::path target = out_path;
            if (panels.size() > 1) {
                fs::path stem = out_path;
                stem.replace_extension();
                target = fs::path(stem.string() + "_" + key + ".svg");
            }
            write_text_file(target, emit_svg_lineplot(spec, series));
            outputs.push_back(target.string());
        }
    }

    json manifest = manifest_base("plot", 0);
    manifest["inputs"] = json::array({args.in});
    manifest["outputs"] = outputs;
    write_manifest(args.out, manifest);
    for (const std::string& path : outputs) {
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"synthetic-data leakage measurement for concept bottleneck models"};
    app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kToolVersion));
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* sub_gen = app.add_subcommand("generate", "generate a synthetic dataset binary");
    sub_gen->add_option("--out", gen.out, "output dataset path")->required();
    sub_gen->add_option("--config", gen.config_file, "key=value config file");
    auto* gn = sub_gen->add_option("--n", gen.n, "observations (default 1000)");
    auto* gd = sub_gen->add_option("--d", gen.d, "feature dimension (default 100)");
    auto* gk = sub_gen->add_option("--k", gen.k, "concepts (default 10)");
    auto* gj = sub_gen->add_option("--j", gen.j, "target classes (default 5)");
    auto* gb = sub_gen->add_option("--b", gen.b, "features feeding concepts (default 50)");
    auto* gl = sub_gen->add_option("--l", gen.l, "trailing features excluded from leakage (default 0)");
    auto* gnoise = sub_gen->add_option("--noise", gen.noise,
                                       "shared diagonal noise variance for concept/chat/target noise (default 0.25)");
    auto* gseed = sub_gen->add_option("--seed", gen.seed, "generator seed (env CBLEAK_SEED, else 42)");

    MeasureArgs meas;
    auto* sub_meas = app.add_subcommand("measure", "measure leakage on a dataset");
    sub_meas->add_option("--in", meas.in, "dataset binary")->required();
    sub_meas->add_option("--classifier", meas.classifier, "mlp|rf|gbt (default gbt)");
    auto* mseed = sub_meas->add_option("--seed", meas.seed, "split seed (env CBLEAK_SEED, else 42)");
    sub_meas->add_option("--out", meas.out, "optional CSV output path");
    sub_meas->add_flag("--no-timing", meas.no_timing, "write wall_ms as 0 for reproducible bytes");

    SweepArgs sweep;
    auto* sub_sweep = app.add_subcommand("sweep", "run the b-schedule experiment grid");
    sub_sweep->add_option("--out", sweep.out, "results CSV path")->required();
    sub_sweep->add_option("--config", sweep.config_file, "key=value sweep config file");
    sub_sweep->add_option("--n", sweep.n_list, "comma list of dataset sizes (default 500,2000,10000)");
    sub_sweep->add_option("--d", sweep.d_list, "comma list of feature dims (default 500,2500)");
    sub_sweep->add_option("--k", sweep.k_list, "comma list of concept counts (default 50,200)");
    sub_sweep->add_option("--noise", sweep.noise_list,
                          "comma list of diagonal noise variances (default 0.5,2)");
    sub_sweep->add_option("--classifier", sweep.kind_list,
                          "comma list of mlp|rf|gbt (default all three)");
    auto* slev = sub_sweep->add_option("--levels", sweep.levels, "b levels per config (default 30)");
    auto* sruns = sub_sweep->add_option("--runs", sweep.runs, "runs per cell (default 5)");
    auto* sl = sub_sweep->add_option("--l", sweep.l, "trailing excluded features (default 0)");
    auto* sj = sub_sweep->add_option("--j", sweep.j, "target classes (default 5)");
    auto* sseed = sub_sweep->add_option("--seed", sweep.seed, "base seed (env CBLEAK_SEED, else 42)");
    sub_sweep->add_option("--jobs", sweep.jobs, "worker threads (default: processors)");
    sub_sweep->add_flag("--no-timing", sweep.no_timing, "write wall_ms as 0 for reproducible bytes");

    CbmSweepArgs cbm;
    auto* sub_cbm = app.add_subcommand("cbm-sweep", "lambda sweep of the joint soft CBM");
    sub_cbm->add_option("--out", cbm.out, "results CSV path")->required();
    sub_cbm->add_option("--n", cbm.n, "observations (default 2000)");
    sub_cbm->add_option("--d", cbm.d, "feature dimension (default 200)");
    sub_cbm->add_option("--k", cbm.k_list, "comma list of concept counts (default 16)");
    sub_cbm->add_option("--j", cbm.j, "target classes (default 5)");
    sub_cbm->add_option("--b", cbm.b, "features feeding concepts (default 40)");
    sub_cbm->add_option("--l", cbm.l, "trailing excluded features (default 0)");
    sub_cbm->add_option("--noise", cbm.noise, "shared diagonal noise variance (default 0.5)");
    sub_cbm->add_option("--lambda-grid", cbm.lambda_list,
                        "comma list of lambdas (default 0.01,0.1,0.5,1,2,5,10)");
    sub_cbm->add_option("--runs", cbm.runs, "runs per cell (default 3)");
    sub_cbm->add_option("--classifier", cbm.classifier, "mlp|rf|gbt (default gbt)");
    auto* cseed = sub_cbm->add_option("--seed", cbm.seed, "base seed (env CBLEAK_SEED, else 42)");
    sub_cbm->add_option("--jobs", cbm.jobs, "worker threads (default: processors)");

    PlotArgs plot;
    auto* sub_plot = app.add_subcommand("plot", "render sweep CSVs as SVG line plots");
    sub_plot->add_option("--in", plot.in, "results CSV")->required();
    sub_plot->add_option("--out", plot.out, "SVG output path (panel tag appended if several)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    gen.has_n = gn->count() > 0;
    gen.has_d = gd->count() > 0;
    gen.has_k = gk->count() > 0;
    gen.has_j = gj->count() > 0;
    gen.has_b = gb->count() > 0;
    gen.has_l = gl->count() > 0;
    gen.has_noise = gnoise->count() > 0;
    gen.has_seed = gseed->count() > 0;
    meas.has_seed = mseed->count() > 0;
    sweep.has_levels = slev->count() > 0;
    sweep.has_runs = sruns->count() > 0;
    sweep.has_l = sl->count() > 0;
    sweep.has_j = sj->count() > 0;
    sweep.has_seed = sseed->count() > 0;
    cbm.has_seed = cseed->count() > 0;

    try {
        if (sub_gen->parsed()) return cmd_generate(gen);
        if (sub_meas->parsed()) return cmd_measure(meas);
        if (sub_sweep->parsed()) return cmd_sweep(sweep);
        if (sub_cbm->parsed()) return cmd_cbm_sweep(cbm);
        if (sub_plot->parsed()) return cmd_plot(plot);
        std::cerr << "error: no subcommand given\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace cbleak
