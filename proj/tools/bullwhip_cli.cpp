// Command-line front end: analyze | synth | sweep | simulate. A config file
// supplies the run parameters; a handful of flags override the common ones.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bullwhip/cli.hpp"
#include "bullwhip/config.hpp"

namespace {

struct Overrides {
    std::optional<double> alpha, beta, lambda_min, eps_f, feas_tol, gap_tol;
    std::optional<long long> seed, jobs;
    std::optional<std::string> out_dir;
    bool emit_svg = false;
};

void add_common_flags(CLI::App& cmd, std::string& config_path, Overrides& ov) {
    cmd.add_option("--config", config_path, "Path to a key=value config file");
    cmd.add_option("--alpha", ov.alpha, "Backlog rate in [0, 1]");
    cmd.add_option("--beta", ov.beta, "Perish rate in [0, 1]");
    cmd.add_option("--lambda-min", ov.lambda_min, "Lower edge of the lambda search window");
    cmd.add_option("--eps-f", ov.eps_f, "Forecast error bound");
    cmd.add_option("--seed", ov.seed, "Simulation seed");
    cmd.add_option("--out", ov.out_dir, "Output directory");
    cmd.add_flag("--emit-svg", ov.emit_svg, "Also write SVG plots");
    cmd.add_option("--feas-tol", ov.feas_tol, "Solver infeasibility tolerance");
    cmd.add_option("--gap-tol", ov.gap_tol, "Solver duality-gap tolerance");
    cmd.add_option("--jobs", ov.jobs, "Sweep worker count (0 = all hardware units)");
}

[[nodiscard]] int apply_and_run(const std::string& config_path, const Overrides& ov,
                                int (*command)(const bullwhip::RunConfig&, std::ostream&)) {
    bullwhip::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = bullwhip::parse_config_file(config_path);
        if (ov.seed) {
            if (*ov.seed < 0) throw bullwhip::ConfigError("config: seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(*ov.seed);
        }
        if (ov.jobs) cfg.jobs = static_cast<int>(*ov.jobs);
    } catch (const bullwhip::ConfigError& e) {
        std::cout << "error: " << e.what() << "\n";
        return bullwhip::kExitConfig;
    }
    if (ov.alpha) cfg.vendor.alpha = *ov.alpha;
    if (ov.beta) cfg.vendor.beta = *ov.beta;
    if (ov.lambda_min) cfg.lambda_min = *ov.lambda_min;
    if (ov.eps_f) cfg.vendor.eps_f = *ov.eps_f;
    if (ov.feas_tol) cfg.feas_tol = *ov.feas_tol;
    if (ov.gap_tol) cfg.gap_tol = *ov.gap_tol;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.emit_svg) cfg.emit_svg = true;
    return command(cfg, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forecast-driven vendor controller synthesis and simulation"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    struct Entry {
        const char* name;
        const char* help;
        int (*command)(const bullwhip::RunConfig&, std::ostream&);
    };
    const Entry entries[] = {
        {"analyze", "Stability, equilibrium, and assumption checks", &bullwhip::cmd_analyze},
        {"synth", "Synthesize the peak-gain-minimizing controller", &bullwhip::cmd_synth},
        {"sweep", "Peak gain over an (alpha, beta, lambda) grid", &bullwhip::cmd_sweep},
        {"simulate", "Closed-loop trace, metrics, and forecast sweep", &bullwhip::cmd_simulate},
    };
    for (const Entry& e : entries) add_common_flags(*app.add_subcommand(e.name, e.help),
                                                    config_path, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints help or the usage error
        return rc == 0 ? 0 : bullwhip::kExitConfig;
    }
    for (const Entry& e : entries)
        if (app.got_subcommand(e.name)) return apply_and_run(config_path, ov, e.command);
    return bullwhip::kExitConfig;
}
