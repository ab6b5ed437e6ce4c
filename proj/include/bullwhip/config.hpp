#pragma once

// Run configuration for the CLI commands. The on-disk format is flat
// key=value text: '#' starts a comment, blank lines are skipped, list values
// are comma separated. Unknown keys are rejected so typos fail loudly.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "bullwhip/model.hpp"
#include "bullwhip/simulate.hpp"
#include "bullwhip/synthesis.hpp"

namespace bullwhip {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    VendorParams vendor;
    double a4_factor = 10.0;  // assumption 4 ratio: steady state vs eps_d + eps_f

    // solver
    double feas_tol = 1e-7;
    double gap_tol = 1e-8;
    double margin = 1e-7;
    int max_newton = 1500;

    // synthesis
    double lambda_min = 1e-3;
    std::vector<double> lambda_grid;  // explicit probes; empty means search
    ExtractionMode extraction = ExtractionMode::Unscaled;

    // simulation
    int horizon = 1000;
    int trials = 10;
    std::uint64_t seed = 12345;
    DisturbanceKind policy = DisturbanceKind::UniformBox;
    int period = 24;        // Sinusoid only
    double x0_scale = 0.0;  // x(0) on the ellipsoid boundary scaled by this

    // sweep grids
    std::vector<double> alpha_list{0.1, 0.5, 0.9};
    std::vector<double> beta_list{0.5};
    std::vector<double> lambda_list{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> eps_f_grid{0.0,   100.0, 200.0, 300.0, 400.0, 500.0,
                                   600.0, 700.0, 800.0, 900.0, 1000.0};

    // output
    std::string out_dir = "out";
    bool emit_svg = false;
    int jobs = 0;  // sweep worker count; 0 means all hardware units
};

namespace config_detail {

[[nodiscard]] inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[nodiscard]] inline double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError("config: empty value for " + key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    return x;
}

[[nodiscard]] inline long long parse_int(const std::string& key, const std::string& value) {
    const double x = parse_double(key, value);
    const long long n = static_cast<long long>(x);
    if (static_cast<double>(n) != x)
        throw ConfigError("config: " + key + " must be an integer");
    return n;
}

[[nodiscard]] inline bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

[[nodiscard]] inline std::vector<double> parse_list(const std::string& key,
                                                    const std::string& value) {
    std::vector<double> out;
    if (trim(value).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = value.find(',', start);
        const std::string item = value.substr(start, comma - start);
        out.push_back(parse_double(key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

[[nodiscard]] inline DisturbanceKind parse_policy(const std::string& value) {
    const std::string v = trim(value);
    if (v == "uniform") return DisturbanceKind::UniformBox;
    if (v == "corner") return DisturbanceKind::CornerBangBang;
    if (v == "sinusoid") return DisturbanceKind::Sinusoid;
    if (v == "zero") return DisturbanceKind::Zero;
    throw ConfigError("config: policy must be uniform|corner|sinusoid|zero, got '" + v + "'");
}

[[nodiscard]] inline ExtractionMode parse_extraction(const std::string& value) {
    const std::string v = trim(value);
    if (v == "unscaled") return ExtractionMode::Unscaled;
    if (v == "paper_scaled") return ExtractionMode::PaperScaled;
    throw ConfigError("config: extraction_mode must be unscaled|paper_scaled, got '" + v + "'");
}

}  // namespace config_detail

[[nodiscard]] inline const char* to_string(ExtractionMode m) {
    return m == ExtractionMode::Unscaled ? "unscaled" : "paper_scaled";
}

// Apply a single key=value assignment. Shared by the file parser and tests.
inline void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using namespace config_detail;
    if (key == "alpha")
        cfg.vendor.alpha = parse_double(key, value);
    else if (key == "beta")
        cfg.vendor.beta = parse_double(key, value);
    else if (key == "d_inf")
        cfg.vendor.d_inf = parse_double(key, value);
    else if (key == "eps_d")
        cfg.vendor.eps_d = parse_double(key, value);
    else if (key == "eps_f")
        cfg.vendor.eps_f = parse_double(key, value);
    else if (key == "gamma_I")
        cfg.vendor.gamma_I = parse_double(key, value);
    else if (key == "gamma_P")
        cfg.vendor.gamma_P = parse_double(key, value);
    else if (key == "gamma_D")
        cfg.vendor.gamma_D = parse_double(key, value);
    else if (key == "a4_factor")
        cfg.a4_factor = parse_double(key, value);
    else if (key == "feas_tol")
        cfg.feas_tol = parse_double(key, value);
    else if (key == "gap_tol")
        cfg.gap_tol = parse_double(key, value);
    else if (key == "margin")
        cfg.margin = parse_double(key, value);
    else if (key == "max_newton")
        cfg.max_newton = static_cast<int>(parse_int(key, value));
    else if (key == "lambda_min")
        cfg.lambda_min = parse_double(key, value);
    else if (key == "lambda_grid")
        cfg.lambda_grid = parse_list(key, value);
    else if (key == "extraction_mode")
        cfg.extraction = parse_extraction(value);
    else if (key == "horizon")
        cfg.horizon = static_cast<int>(parse_int(key, value));
    else if (key == "trials")
        cfg.trials = static_cast<int>(parse_int(key, value));
    else if (key == "seed") {
        const long long n = parse_int(key, value);
        if (n < 0) throw ConfigError("config: seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(n);
    } else if (key == "policy")
        cfg.policy = parse_policy(value);
    else if (key == "period")
        cfg.period = static_cast<int>(parse_int(key, value));
    else if (key == "x0_scale")
        cfg.x0_scale = parse_double(key, value);
    else if (key == "alpha_list")
        cfg.alpha_list = parse_list(key, value);
    else if (key == "beta_list")
        cfg.beta_list = parse_list(key, value);
    else if (key == "lambda_list")
        cfg.lambda_list = parse_list(key, value);
    else if (key == "eps_f_grid")
        cfg.eps_f_grid = parse_list(key, value);
    else if (key == "out_dir") {
        cfg.out_dir = config_detail::trim(value);
        if (cfg.out_dir.empty()) throw ConfigError("config: out_dir must be nonempty");
    } else if (key == "emit_svg")
        cfg.emit_svg = parse_bool(key, value);
    else if (key == "jobs")
        cfg.jobs = static_cast<int>(parse_int(key, value));
    else
        throw ConfigError("config: unknown key '" + key + "'");
}

[[nodiscard]] inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = config_detail::trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        const std::string key = config_detail::trim(stripped.substr(0, eq));
        if (key.empty())
            throw ConfigError("config: line " + std::to_string(lineno) + " has an empty key");
        set_key(cfg, key, stripped.substr(eq + 1));
    }
    return cfg;
}

// Every numeric field is checked against the owning module's preconditions
// before any command does work. Per-command requirements (nonempty grids,
// nonzero disturbance) are checked by the commands themselves.
inline void validate_config(const RunConfig& cfg) {
    try {
        validate(cfg.vendor);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    auto positive = [](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0))
            throw ConfigError(std::string("config: ") + name + " must be positive");
    };
    positive(cfg.a4_factor, "a4_factor");
    positive(cfg.feas_tol, "feas_tol");
    positive(cfg.gap_tol, "gap_tol");
    positive(cfg.margin, "margin");
    if (cfg.max_newton < 1) throw ConfigError("config: max_newton must be >= 1");
    if (!(std::isfinite(cfg.lambda_min) && cfg.lambda_min > 0.0 && cfg.lambda_min <= 1.0))
        throw ConfigError("config: lambda_min outside (0, 1]");
    for (double l : cfg.lambda_grid)
        if (!std::isfinite(l)) throw ConfigError("config: lambda_grid entries must be finite");
    if (cfg.horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
    if (cfg.period < 2) throw ConfigError("config: period must be >= 2");
    if (!(std::isfinite(cfg.x0_scale) && cfg.x0_scale >= 0.0 && cfg.x0_scale <= 1.0))
        throw ConfigError("config: x0_scale outside [0, 1]");
    for (double a : cfg.alpha_list)
        if (!(std::isfinite(a) && a >= 0.0 && a <= 1.0))
            throw ConfigError("config: alpha_list entries outside [0, 1]");
    for (double b : cfg.beta_list)
        if (!(std::isfinite(b) && b >= 0.0 && b <= 1.0))
            throw ConfigError("config: beta_list entries outside [0, 1]");
    for (double l : cfg.lambda_list)
        if (!std::isfinite(l)) throw ConfigError("config: lambda_list entries must be finite");
    for (double e : cfg.eps_f_grid)
        if (!(std::isfinite(e) && e >= 0.0))
            throw ConfigError("config: eps_f_grid entries must be >= 0");
    if (cfg.out_dir.empty()) throw ConfigError("config: out_dir must be nonempty");
    if (cfg.jobs < 0) throw ConfigError("config: jobs must be >= 0");
}

// Solver and search settings in the shape the synthesis layer consumes.
[[nodiscard]] inline SynthOptions synth_options(const RunConfig& cfg) {
    SynthOptions so;
    so.lambda_min = cfg.lambda_min;
    so.lambda_grid = cfg.lambda_grid;
    so.extraction = cfg.extraction;
    so.margin = cfg.margin;
    so.solver.feas_tol = cfg.feas_tol;
    so.solver.gap_tol = cfg.gap_tol;
    so.solver.max_newton = cfg.max_newton;
    return so;
}

}  // namespace bullwhip
