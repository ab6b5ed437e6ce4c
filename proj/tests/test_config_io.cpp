#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "bullwhip/config.hpp"
#include "bullwhip/csv.hpp"
#include "bullwhip/svg.hpp"
#include "test_util.hpp"

using namespace bullwhip;

namespace {

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "bw_config_io_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_text(const std::string& name, const std::string& content) {
    const auto path = scratch_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("default config is self-consistent") {
    const RunConfig cfg;
    REQUIRE_NOTHROW(validate_config(cfg));
    CHECK(cfg.vendor.alpha == 0.1);
    CHECK(cfg.lambda_grid.empty());
    CHECK(cfg.eps_f_grid.size() == 11);
    CHECK(cfg.eps_f_grid.front() == 0.0);
    CHECK(cfg.eps_f_grid.back() == 1000.0);
    CHECK(cfg.lambda_list.size() == 9);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.policy == DisturbanceKind::UniformBox);
    CHECK(cfg.extraction == ExtractionMode::Unscaled);

    const SynthOptions so = synth_options(cfg);
    CHECK(so.lambda_min == cfg.lambda_min);
    CHECK(so.margin == cfg.margin);
    CHECK(so.solver.feas_tol == cfg.feas_tol);
    CHECK(so.solver.gap_tol == cfg.gap_tol);
    CHECK(so.solver.max_newton == cfg.max_newton);
}

TEST_CASE("config file parsing covers every key") {
    const std::string path = write_text("full.cfg",
                                        "# full-coverage config\n"
                                        "alpha = 0.25\n"
                                        "beta=0.5   # inline comment\n"
                                        "d_inf = 5000\n"
                                        "eps_d = 300\n"
                                        "eps_f = 40\n"
                                        "gamma_I = 0.7\n"
                                        "gamma_P = 1.1\n"
                                        "gamma_D = 2.5\n"
                                        "a4_factor = 4\n"
                                        "\n"
                                        "feas_tol = 1e-6\n"
                                        "gap_tol = 1e-9\n"
                                        "margin = 1e-6\n"
                                        "max_newton = 900\n"
                                        "lambda_min = 0.01\n"
                                        "lambda_grid = 0.1, 0.5 ,0.9\n"
                                        "extraction_mode = paper_scaled\n"
                                        "horizon = 250\n"
                                        "trials = 3\n"
                                        "seed = 99\n"
                                        "policy = sinusoid\n"
                                        "period = 48\n"
                                        "x0_scale = 0.5\n"
                                        "alpha_list = 0.1,0.9\n"
                                        "beta_list = 0.2\n"
                                        "lambda_list = 0.3, 0.6\n"
                                        "eps_f_grid = 0, 10, 20\n"
                                        "out_dir = results\n"
                                        "emit_svg = true\n"
                                        "jobs = 2\n");
    const RunConfig cfg = parse_config_file(path);
    CHECK(cfg.vendor.alpha == 0.25);
    CHECK(cfg.vendor.beta == 0.5);
    CHECK(cfg.vendor.d_inf == 5000.0);
    CHECK(cfg.vendor.eps_d == 300.0);
    CHECK(cfg.vendor.eps_f == 40.0);
    CHECK(cfg.vendor.gamma_I == 0.7);
    CHECK(cfg.vendor.gamma_P == 1.1);
    CHECK(cfg.vendor.gamma_D == 2.5);
    CHECK(cfg.a4_factor == 4.0);
    CHECK(cfg.feas_tol == 1e-6);
    CHECK(cfg.gap_tol == 1e-9);
    CHECK(cfg.margin == 1e-6);
    CHECK(cfg.max_newton == 900);
    CHECK(cfg.lambda_min == 0.01);
    CHECK(cfg.lambda_grid == std::vector<double>{0.1, 0.5, 0.9});
    CHECK(cfg.extraction == ExtractionMode::PaperScaled);
    CHECK(cfg.horizon == 250);
    CHECK(cfg.trials == 3);
    CHECK(cfg.seed == 99);
    CHECK(cfg.policy == DisturbanceKind::Sinusoid);
    CHECK(cfg.period == 48);
    CHECK(cfg.x0_scale == 0.5);
    CHECK(cfg.alpha_list == std::vector<double>{0.1, 0.9});
    CHECK(cfg.beta_list == std::vector<double>{0.2});
    CHECK(cfg.lambda_list == std::vector<double>{0.3, 0.6});
    CHECK(cfg.eps_f_grid == std::vector<double>{0.0, 10.0, 20.0});
    CHECK(cfg.out_dir == "results");
    CHECK(cfg.emit_svg);
    CHECK(cfg.jobs == 2);
    REQUIRE_NOTHROW(validate_config(cfg));
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS_AS(parse_config_file(write_text("bad1.cfg", "no_such_key = 1\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad2.cfg", "alpha 0.2\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad3.cfg", "= 0.2\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad4.cfg", "alpha = zero\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad5.cfg", "alpha = 0.2 0.3\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad6.cfg", "emit_svg = maybe\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad7.cfg", "policy = brownian\n")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad8.cfg", "extraction_mode = scaled\n")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad9.cfg", "seed = -4\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad10.cfg", "horizon = 2.5\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad11.cfg", "lambda_grid = 0.1,,0.5\n")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_file(write_text("bad12.cfg", "out_dir =\n")), ConfigError);
    CHECK_THROWS_AS(parse_config_file(scratch_dir().string() + "/does_not_exist.cfg"),
                    ConfigError);

    // An empty file is a valid all-defaults config.
    REQUIRE_NOTHROW(parse_config_file(write_text("empty.cfg", "# only a comment\n\n")));
}

TEST_CASE("config validation enforces module preconditions") {
    auto broken = [](auto&& mutate) {
        RunConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.vendor.alpha = 1.2; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.vendor.beta = -0.1; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.vendor.d_inf = 0.0; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.vendor.eps_d = -1.0; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.a4_factor = 0.0; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.feas_tol = 0.0; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.gap_tol = -1e-9; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.margin = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.max_newton = 0; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.lambda_min = 0.0; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.lambda_min = 1.5; })),
                    ConfigError);
    CHECK_THROWS_AS(
        validate_config(broken([](RunConfig& c) { c.lambda_grid = {0.5, std::nan("")}; })),
        ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.horizon = 0; })), ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.trials = 0; })), ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.period = 1; })), ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.x0_scale = 1.5; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.alpha_list = {0.5, 1.01}; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.beta_list = {-0.2}; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.eps_f_grid = {10.0, -1.0}; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.out_dir.clear(); })),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(broken([](RunConfig& c) { c.jobs = -1; })), ConfigError);
}

TEST_CASE("csv round trip preserves doubles bitwise") {
    std::mt19937_64 rng(2024);
    std::vector<double> values{0.0,    -0.0,   1.0,     -1.0,    0.1,
                               1e-300, 1e300,  1.5e-10, 2.0 / 3.0, 12345.6789};
    for (int i = 0; i < 100; ++i) {
        const double mag = std::exp(testutil::uniform(rng, -200.0, 200.0));
        values.push_back((testutil::uniform01(rng) < 0.5 ? -1.0 : 1.0) * mag *
                         testutil::uniform01(rng));
    }

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i + 1 < values.size(); i += 2)
        rows.push_back({csv_num(values[i]), csv_num(values[i + 1])});
    const std::string path = (scratch_dir() / "roundtrip.csv").string();
    write_csv(path, {"a", "b"}, rows);

    const CsvTable t = read_csv(path);
    REQUIRE(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double expect = values[2 * i + j];
            const double got = csv_to_double(t.rows[i][j]);
            CHECK(std::bit_cast<std::uint64_t>(got) == std::bit_cast<std::uint64_t>(expect));
        }

    // Re-writing the parsed table reproduces the file byte for byte.
    const std::string path2 = (scratch_dir() / "roundtrip2.csv").string();
    write_csv(path2, t.header, t.rows);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("csv reader surfaces structural errors") {
    const std::string ragged = write_text("ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_WITH(read_csv(ragged), Catch::Matchers::ContainsSubstring("ragged"));
    CHECK_THROWS(read_csv((scratch_dir() / "missing.csv").string()));
    CHECK_THROWS(read_csv(write_text("headerless.csv", "")));

    const std::string sparse = write_text("sparse.csv", "a,b\n1,\n");
    const CsvTable t = read_csv(sparse);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1].empty());
    CHECK_THROWS(csv_to_double(t.rows[0][1]));
    CHECK_THROWS(csv_to_double("1.5x"));
    CHECK(t.column("b") == 1);
    CHECK_THROWS(t.column("c"));

    // CRLF input parses the same as LF.
    const CsvTable crlf = read_csv(write_text("crlf.csv", "a,b\r\n1,2\r\n"));
    REQUIRE(crlf.rows.size() == 1);
    CHECK(crlf.rows[0][0] == "1");
    CHECK(csv_to_double(crlf.rows[0][1]) == 2.0);
}

TEST_CASE("svg line charts are deterministic and skip non-finite points") {
    const double nan = std::nan("");
    std::vector<SvgSeries> series{
        {"gamma & bound", {{0.1, 0.4}, {0.2, nan}, {0.3, 0.6}, {0.4, 0.9}}},
        {"<flat>", {{0.1, 2.0}, {0.4, 2.0}}},
        {"lonely", {{0.25, 1.0}}},
    };
    const std::string p1 = (scratch_dir() / "chart1.svg").string();
    const std::string p2 = (scratch_dir() / "chart2.svg").string();
    write_line_chart(p1, "peak gain vs lambda", "lambda", "gamma", series);
    write_line_chart(p2, "peak gain vs lambda", "lambda", "gamma", series);

    const std::string body = slurp(p1);
    CHECK(body == slurp(p2));
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(body.find("</svg>") == body.size() - 7);
    CHECK(body.find("polyline") != std::string::npos);
    CHECK(body.find("peak gain vs lambda") != std::string::npos);
    CHECK(body.find("nan") == std::string::npos);
    CHECK(body.find("&lt;flat&gt;") != std::string::npos);  // label escaping

    // The NaN splits the first series into a 1-point run (dropped) and a
    // 2-point run; with the flat series that makes exactly two polylines.
    std::size_t polylines = 0;
    for (std::size_t pos = body.find("<polyline"); pos != std::string::npos;
         pos = body.find("<polyline", pos + 1))
        ++polylines;
    CHECK(polylines == 2);

    // Degenerate inputs still produce a well-formed chart.
    const std::string p3 = (scratch_dir() / "chart3.svg").string();
    REQUIRE_NOTHROW(write_line_chart(p3, "empty", "x", "y", {}));
    CHECK(slurp(p3).find("</svg>") != std::string::npos);
}
