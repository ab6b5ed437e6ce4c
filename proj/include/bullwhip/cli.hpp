#pragma once

// The four experiment commands behind the command-line tool. Each takes a
// validated-on-entry RunConfig, prints a short report to the given stream,
// writes its files under cfg.out_dir, and returns a process exit code:
//   0 success, 1 analyze checks failed, 2 config, 3 infeasible,
//   4 numerical failure, 5 divergent simulation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bullwhip/config.hpp"
#include "bullwhip/csv.hpp"
#include "bullwhip/model.hpp"
#include "bullwhip/simulate.hpp"
#include "bullwhip/svg.hpp"
#include "bullwhip/synthesis.hpp"

namespace bullwhip {

constexpr int kExitOk = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitDivergence = 5;

namespace cli_detail {

[[nodiscard]] inline std::string g10(double v) {
    if (v == 0.0) return "0";  // fold -0 for report text
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

[[nodiscard]] inline std::string fmt_complex(std::complex<double> z) {
    if (z.imag() == 0.0) return g10(z.real());
    return g10(z.real()) + (z.imag() < 0.0 ? " - " : " + ") + g10(std::abs(z.imag())) + "i";
}

[[nodiscard]] inline std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("config: cannot create out_dir '" + cfg.out_dir + "'");
    return dir;
}

// Shared exit-code mapping. The body runs against an already validated
// config and reports through exceptions.
template <typename Body>
[[nodiscard]] int guarded(const RunConfig& cfg, std::ostream& out, Body&& body) {
    try {
        validate_config(cfg);
        return body();
    } catch (const ConfigError& e) {
        out << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NoFeasibleLambda& e) {
        out << "error: " << e.what() << "\n";
        return e.numerical ? kExitNumerical : kExitInfeasible;
    } catch (const SimDivergence& e) {
        out << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

inline const std::vector<std::string>& controller_header() {
    static const std::vector<std::string> header{
        "fx1", "fx2", "fx3", "g_w", "sigma", "lambda_star",
        "gamma_star", "wt_bound", "p11", "p12", "p13", "p21",
        "p22", "p23", "p31", "p32", "p33", "extraction_mode"};
    return header;
}

inline void write_controller_csv(const std::string& path, const Controller& c) {
    std::vector<std::string> row{csv_num(c.f_x(0, 0)), csv_num(c.f_x(0, 1)),
                                 csv_num(c.f_x(0, 2)), csv_num(c.g_w),
                                 csv_num(c.sigma),     csv_num(c.lambda_star),
                                 csv_num(c.gamma_star), csv_num(c.wt_bound)};
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t col = 0; col < 3; ++col) row.push_back(csv_num(c.p(r, col)));
    row.push_back(to_string(c.mode));
    write_csv(path, controller_header(), {row});
}

[[nodiscard]] inline Controller load_controller(const std::string& path) {
    try {
        const CsvTable t = read_csv(path);
        if (t.header != controller_header())
            throw std::runtime_error("unexpected header in '" + path + "'");
        if (t.rows.size() != 1)
            throw std::runtime_error("expected exactly one controller row in '" + path + "'");
        const auto& row = t.rows[0];
        Controller c;
        c.f_x = Matrix(1, 3);
        for (std::size_t i = 0; i < 3; ++i) c.f_x(0, i) = csv_to_double(row[i]);
        c.g_w = csv_to_double(row[3]);
        c.sigma = csv_to_double(row[4]);
        c.lambda_star = csv_to_double(row[5]);
        c.gamma_star = csv_to_double(row[6]);
        c.wt_bound = csv_to_double(row[7]);
        c.p = Matrix(3, 3);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t col = 0; col < 3; ++col)
                c.p(r, col) = csv_to_double(row[8 + 3 * r + col]);
        c.q = inverse_pd(c.p);
        c.mode = config_detail::parse_extraction(row[17]);
        return c;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("controller file: ") + e.what());
    }
}

// Initial state on the ellipsoid boundary, scaled and converted to physical
// deviation units. Rejection-samples a direction, then normalizes against P.
[[nodiscard]] inline Matrix draw_x0(const RunConfig& cfg, const Controller& c, double eps) {
    Matrix x0(3, 1);
    if (cfg.x0_scale == 0.0 || eps == 0.0) return x0;
    std::mt19937_64 rng(cfg.seed ^ 0x517cc1b727220a95ULL);
    const auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Matrix dir(3, 1);
    double nrm2 = 0.0;
    do {
        for (std::size_t i = 0; i < 3; ++i) dir(i, 0) = 2.0 * u01() - 1.0;
        nrm2 = (dir.transpose() * dir)(0, 0);
    } while (nrm2 < 1e-6 || nrm2 > 1.0);
    const double level = (dir.transpose() * c.p * dir)(0, 0);
    const double scale = eps * cfg.x0_scale / std::sqrt(level);
    for (std::size_t i = 0; i < 3; ++i) x0(i, 0) = scale * dir(i, 0);
    return x0;
}

}  // namespace cli_detail

// Stability, equilibrium, and assumption report. Exit 0 only when the
// closed loop is stable and assumptions 3 and 4 both hold.
[[nodiscard]] inline int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    using namespace cli_detail;
    return guarded(cfg, out, [&]() {
        const VendorParams& v = cfg.vendor;
        out << "vendor: alpha=" << g10(v.alpha) << " beta=" << g10(v.beta)
            << " d_inf=" << g10(v.d_inf) << " eps_d=" << g10(v.eps_d)
            << " eps_f=" << g10(v.eps_f) << " gamma_I=" << g10(v.gamma_I)
            << " gamma_P=" << g10(v.gamma_P) << " gamma_D=" << g10(v.gamma_D) << "\n";

        const StabilityReport st = stability(v);
        out << "eigenvalues: lambda+ = " << fmt_complex(st.lambda_plus)
            << ", lambda- = " << fmt_complex(st.lambda_minus) << "\n";
        if (st.stable)
            out << "stability: stable (spectral radius " << g10(st.spectral_radius) << ")\n";
        else if (std::abs(st.spectral_radius - 1.0) <= 1e-9)
            out << "stability: marginally stable/unstable (spectral radius 1)\n";
        else
            out << "stability: unstable (spectral radius " << g10(st.spectral_radius) << ")\n";

        bool a3_ok = false, a4_ok = false;
        try {
            const Assumption3Report a3 = check_assumption3(v);
            a3_ok = a3.ok;
            out << "steady state: i_inf=" << g10(a3.steady.i_inf)
                << " p_inf=" << g10(a3.steady.p_inf) << " o_inf=" << g10(a3.steady.o_inf)
                << "\n";
            if (a3.ok)
                out << "Assumption 3 holds (equilibrium strictly positive)\n";
            else
                out << "Assumption 3 fails (equilibrium has a nonpositive component)\n";
            const Assumption4Report a4 = check_assumption4(v, cfg.a4_factor);
            a4_ok = a4.ok;
            out << "Assumption 4 " << (a4.ok ? "holds" : "fails") << " (smallest steady value "
                << g10(a4.smallest) << (a4.ok ? " >= " : " < ") << g10(a4.required)
                << " = " << g10(cfg.a4_factor) << " x disturbance)\n";
        } catch (const std::exception&) {
            out << "steady state: none (steady-state system is singular)\n";
            out << "Assumption 3 fails (no equilibrium)\n";
            out << "Assumption 4 fails (no equilibrium)\n";
        }

        const ControllabilityReport ctrb = controllability_ok(v);
        out << "controllability: " << (ctrb.ok ? "full rank" : "rank deficient")
            << " (det " << g10(ctrb.det) << ")\n";

        return (st.stable && a3_ok && a4_ok) ? kExitOk : kExitChecksFailed;
    });
}

// Synthesize the peak-gain-minimizing controller and persist it.
[[nodiscard]] inline int cmd_synth(const RunConfig& cfg, std::ostream& out) {
    using namespace cli_detail;
    return guarded(cfg, out, [&]() {
        const SynthesisResult res = minimize_f(cfg.vendor, synth_options(cfg));
        const Controller& c = res.controller;
        const auto dir = ensure_out_dir(cfg);
        const std::string path = (dir / "controller.csv").string();
        write_controller_csv(path, c);

        out << "synthesis: lambda_star=" << g10(c.lambda_star)
            << " gamma_star=" << g10(c.gamma_star) << " sigma=" << g10(c.sigma)
            << " (" << res.evals.size() << " probes, " << res.best.iterations
            << " Newton steps at the winner)\n";
        out << "controller: F_x=[" << g10(c.f_x(0, 0)) << ", " << g10(c.f_x(0, 1)) << ", "
            << g10(c.f_x(0, 2)) << "] g_w=" << g10(c.g_w) << " extraction="
            << to_string(c.mode) << "\n";
        out << "W_T bound: " << g10(c.wt_bound) << "\n";
        out << "controller written to " << path << "\n";
        return kExitOk;
    });
}

// Peak gain across the (alpha, beta, lambda) grid. Individual solve failures
// become rows; only setup problems abort the sweep.
[[nodiscard]] inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    using namespace cli_detail;
    return guarded(cfg, out, [&]() {
        if (cfg.alpha_list.empty() || cfg.beta_list.empty() || cfg.lambda_list.empty())
            throw ConfigError("config: sweep needs nonempty alpha_list, beta_list, lambda_list");

        auto sorted_unique = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            return v;
        };
        const std::vector<double> alphas = sorted_unique(cfg.alpha_list);
        const std::vector<double> betas = sorted_unique(cfg.beta_list);
        const std::vector<double> lambdas = sorted_unique(cfg.lambda_list);

        struct Task {
            double alpha, beta, lambda;
        };
        std::vector<Task> tasks;
        for (double a : alphas)
            for (double b : betas)
                for (double l : lambdas) tasks.push_back({a, b, l});

        SynthOptions so = synth_options(cfg);
        so.lambda_grid.clear();
        std::vector<LambdaEval> results(tasks.size());
        std::atomic<std::size_t> next{0};
        const auto worker = [&]() {
            for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                VendorParams p = cfg.vendor;
                p.alpha = tasks[i].alpha;
                p.beta = tasks[i].beta;
                try {
                    results[i] = eval_f(p, tasks[i].lambda, so);
                } catch (const std::exception&) {
                    results[i].lambda = tasks[i].lambda;
                    results[i].status = sdp::Status::NumericalFailure;
                }
            }
        };
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        const std::size_t jobs =
            std::min<std::size_t>(cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs) : hw,
                                  tasks.size());
        if (jobs <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(jobs);
            for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        std::vector<std::vector<std::string>> rows;
        rows.reserve(tasks.size());
        std::size_t optimal = 0;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const LambdaEval& ev = results[i];
            const bool opt = ev.status == sdp::Status::Optimal;
            optimal += opt;
            rows.push_back({csv_num(tasks[i].alpha), csv_num(tasks[i].beta),
                            csv_num(tasks[i].lambda), sdp::to_string(ev.status),
                            opt ? csv_num(ev.gamma) : std::string(),
                            csv_int(ev.iterations), csv_num(ev.solve_cost_ms)});
        }
        const auto dir = ensure_out_dir(cfg);
        const std::string path = (dir / "sweep.csv").string();
        write_csv(path, {"alpha", "beta", "lambda", "status", "gamma", "iterations", "solve_ms"},
                  rows);
        out << "sweep: " << tasks.size() << " solves, " << optimal << " optimal, written to "
            << path << "\n";

        if (cfg.emit_svg) {
            std::vector<SvgSeries> series;
            std::size_t i = 0;
            for (double a : alphas)
                for (double b : betas) {
                    SvgSeries s;
                    s.label = "alpha=" + g10(a) + " beta=" + g10(b);
                    for (double l : lambdas) {
                        if (results[i].status == sdp::Status::Optimal)
                            s.points.push_back({l, results[i].gamma});
                        ++i;
                    }
                    series.push_back(std::move(s));
                }
            const std::string svg_path = (dir / "sweep.svg").string();
            write_line_chart(svg_path, "peak gain vs lambda", "lambda", "gamma", series);
            out << "plot written to " << svg_path << "\n";
        }
        return kExitOk;
    });
}

// Closed-loop trace, metrics, and the forecast-error sweep. Reuses a
// controller.csv already sitting in out_dir, otherwise synthesizes one.
[[nodiscard]] inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    using namespace cli_detail;
    return guarded(cfg, out, [&]() {
        const VendorParams& v = cfg.vendor;
        const double eps = eps_hat(v);
        if (eps == 0.0)
            throw ConfigError("config: simulate needs eps_d + eps_f > 0");
        if (cfg.eps_f_grid.empty()) throw ConfigError("config: eps_f_grid must be nonempty");

        const auto dir = ensure_out_dir(cfg);
        const std::string ctl_path = (dir / "controller.csv").string();
        Controller c;
        if (std::filesystem::exists(ctl_path)) {
            c = load_controller(ctl_path);
            out << "controller: loaded from " << ctl_path << "\n";
        } else {
            const SynthesisResult res = minimize_f(v, synth_options(cfg));
            c = res.controller;
            out << "controller: synthesized (lambda_star=" << g10(c.lambda_star)
                << " gamma_star=" << g10(c.gamma_star) << ")\n";
        }

        const SimSetup setup = unshifted_setup(v);
        const DisturbancePolicy policy{cfg.policy, cfg.seed, cfg.period};
        const Matrix x0 = draw_x0(cfg, c, eps);
        const SimTrace trace = run(setup, c, policy, cfg.horizon, x0);
        const MetricsReport met = metrics(trace, c, setup.steady, eps);

        std::vector<std::vector<std::string>> trace_rows;
        trace_rows.reserve(trace.rows.size());
        for (const SimRow& r : trace.rows)
            trace_rows.push_back({csv_int(r.k), csv_num(r.i), csv_num(r.p), csv_num(r.o),
                                  csv_num(r.d), csv_num(r.f), csv_num(r.x1), csv_num(r.x2),
                                  csv_num(r.x3), csv_num(r.w1), csv_num(r.w2), csv_num(r.u)});
        const std::string trace_path = (dir / "trace.csv").string();
        write_csv(trace_path,
                  {"k", "i", "p", "o", "d", "f", "x1", "x2", "x3", "w1", "w2", "u"}, trace_rows);

        const std::string metrics_path = (dir / "metrics.csv").string();
        write_csv(metrics_path,
                  {"peak_order", "peak_inventory", "energy_ratio", "wt_bound",
                   "max_ellipsoid_level", "ellipsoid_ok", "negativity_warnings"},
                  {{csv_num(met.peak_order), csv_num(met.peak_inventory),
                    csv_num(met.energy_ratio), csv_num(met.wt_bound),
                    csv_num(met.max_ellipsoid_level), met.ellipsoid_ok ? "1" : "0",
                    csv_int(met.negativity_warnings)}});

        const std::vector<ForecastSweepRow> table =
            sweep_forecast_error(v, c, v.eps_d, cfg.eps_f_grid, cfg.horizon, cfg.trials,
                                 cfg.seed, cfg.policy);
        std::vector<std::vector<std::string>> sweep_rows;
        sweep_rows.reserve(table.size());
        for (const ForecastSweepRow& r : table)
            sweep_rows.push_back({csv_num(r.eps_f), csv_num(r.peak_order),
                                  csv_num(r.peak_inventory), csv_num(r.wt_bound)});
        const std::string sweep_path = (dir / "forecast_sweep.csv").string();
        write_csv(sweep_path, {"eps_f", "peak_order", "peak_inventory", "wt_bound"}, sweep_rows);

        out << "trace: " << trace.rows.size() << " steps (policy "
            << to_string(cfg.policy) << ", seed " << cfg.seed << ") -> " << trace_path << "\n";
        out << "metrics: peak_order=" << g10(met.peak_order)
            << " peak_inventory=" << g10(met.peak_inventory)
            << " energy_ratio=" << g10(met.energy_ratio) << " wt_bound=" << g10(met.wt_bound)
            << "\n";
        out << "ellipsoid: max level " << g10(met.max_ellipsoid_level) << " ("
            << (met.ellipsoid_ok ? "inescapable bound holds" : "BOUND VIOLATED")
            << "), negativity warnings " << met.negativity_warnings << "\n";
        out << "forecast sweep: " << table.size() << " points -> " << sweep_path << "\n";

        if (cfg.emit_svg) {
            SvgSeries inv{"inventory i(k)", {}}, ord{"order o(k)", {}}, dem{"demand d(k)", {}};
            for (const SimRow& r : trace.rows) {
                const double k = static_cast<double>(r.k);
                inv.points.push_back({k, r.i});
                ord.points.push_back({k, r.o});
                dem.points.push_back({k, r.d});
            }
            const std::string trace_svg = (dir / "trace.svg").string();
            write_line_chart(trace_svg, "closed-loop trace", "k", "level", {inv, ord, dem});

            SvgSeries peak{"peak_order", {}}, bound{"wt_bound", {}};
            for (const ForecastSweepRow& r : table) {
                peak.points.push_back({r.eps_f, r.peak_order});
                bound.points.push_back({r.eps_f, r.wt_bound});
            }
            const std::string sweep_svg = (dir / "forecast_sweep.svg").string();
            write_line_chart(sweep_svg, "peak order vs forecast error bound", "eps_f",
                             "order deviation", {peak, bound});
            out << "plots written to " << trace_svg << " and " << sweep_svg << "\n";
        }
        return kExitOk;
    });
}

}  // namespace bullwhip
