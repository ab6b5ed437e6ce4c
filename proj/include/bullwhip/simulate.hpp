#pragma once

// Closed-loop simulation of the vendor dynamics under bounded disturbances,
// plus the transient and energy Bullwhip metrics and the forecast-error sweep.
//
// The simulator works in the shifted coordinates x = (i - i_inf, p - p_inf,
// f(k-1) - d_inf) and decorates each step with the physical bookkeeping
// (inventory, pipeline, orders, demand, forecast). A scaled setup runs the
// same dynamics on the normalized disturbance box with zero offsets, which is
// the frame where the invariance certificate lives.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bullwhip/matrix.hpp"
#include "bullwhip/model.hpp"
#include "bullwhip/synthesis.hpp"

namespace bullwhip {

enum class DisturbanceKind { UniformBox, CornerBangBang, Sinusoid, Zero };

[[nodiscard]] inline const char* to_string(DisturbanceKind k) {
    switch (k) {
        case DisturbanceKind::UniformBox: return "uniform";
        case DisturbanceKind::CornerBangBang: return "corner";
        case DisturbanceKind::Sinusoid: return "sinusoid";
        case DisturbanceKind::Zero: return "zero";
    }
    return "?";
}

struct DisturbancePolicy {
    DisturbanceKind kind = DisturbanceKind::UniformBox;
    std::uint64_t seed = 12345;
    int period = 24;  // Sinusoid only
};

// Everything run() needs besides the controller. The unshifted setup carries
// the physical offsets; the scaled setup has unit-normalized disturbances and
// zero offsets so ellipsoid levels read directly against 1.
struct SimSetup {
    PlantMatrices plant;
    DisturbanceBox box;
    SteadyState steady{0.0, 0.0, 0.0};
    double d_inf = 0.0;
};

[[nodiscard]] inline SimSetup unshifted_setup(const VendorParams& p) {
    return SimSetup{build_plant(p), raw_box(p), steady_state(p), p.d_inf};
}

[[nodiscard]] inline SimSetup scaled_setup(const VendorParams& p) {
    return SimSetup{build_plant(p), scaled_box(p), SteadyState{0.0, 0.0, 0.0}, 0.0};
}

struct SimRow {
    int k = 0;
    double i = 0.0, p = 0.0, o = 0.0, d = 0.0, f = 0.0;
    double x1 = 0.0, x2 = 0.0, x3 = 0.0;
    double w1 = 0.0, w2 = 0.0, u = 0.0;
};

struct SimTrace {
    int horizon = 0;
    std::vector<SimRow> rows;                       // one per step k = 0..horizon-1
    std::array<double, 3> final_state{0.0, 0.0, 0.0};  // x(horizon)
};

struct SimDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricsReport {
    double peak_order = 0.0;      // max |o(k) - o_inf|
    double peak_inventory = 0.0;  // max |i(k) - i_inf|
    double energy_ratio = 0.0;    // sum (o - o_inf)^2 / sum (d - d_inf)^2
    double wt_bound = 0.0;
    double max_ellipsoid_level = 0.0;  // max over k of (x/eps_hat)' P (x/eps_hat)
    bool ellipsoid_ok = false;
    int negativity_warnings = 0;  // steps with physically negative i, p, or o
};

struct ForecastSweepRow {
    double eps_f = 0.0;
    double peak_order = 0.0;
    double peak_inventory = 0.0;
    double wt_bound = 0.0;
};

// Simulate horizon steps of x(k+1) = A x + B u + B_w w with the affine law
// u = F_x x + g w2. Divergence (non-finite state) aborts with the step index.
[[nodiscard]] inline SimTrace run(const SimSetup& s, const Controller& c,
                                  const DisturbancePolicy& pol, int horizon,
                                  const Matrix& x0) {
    if (horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
    if (x0.rows() != 3 || x0.cols() != 1 || !x0.is_finite())
        throw std::invalid_argument("simulate: x0 must be a finite 3-vector");
    if (pol.kind == DisturbanceKind::Sinusoid && pol.period < 2)
        throw std::invalid_argument("simulate: sinusoid period must be >= 2");
    if (c.f_x.rows() != 1 || c.f_x.cols() != 3)
        throw std::invalid_argument("simulate: controller gain must be 1x3");

    std::mt19937_64 rng(pol.seed);
    const auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const double b1 = s.box.w1_bound, b2 = s.box.w2_bound;
    const double g_eff = c.effective_feedthrough();
    constexpr double kTwoPi = 6.283185307179586;

    SimTrace trace;
    trace.horizon = horizon;
    trace.rows.reserve(static_cast<std::size_t>(horizon));

    Matrix x = x0;
    double w2_lag1 = 0.0, w2_lag2 = 0.0;  // w2(-1) = w2(-2) = 0
    for (int k = 0; k < horizon; ++k) {
        double w1 = 0.0, w2 = 0.0;
        switch (pol.kind) {
            case DisturbanceKind::UniformBox:
                w1 = -b1 + u01() * (2.0 * b1);
                w2 = -b2 + u01() * (2.0 * b2);
                break;
            case DisturbanceKind::CornerBangBang: {
                const std::uint64_t bits = rng();
                w1 = (bits & 1u) ? b1 : -b1;
                w2 = (bits & 2u) ? b2 : -b2;
                break;
            }
            case DisturbanceKind::Sinusoid: {
                const double ang = kTwoPi * static_cast<double>(k) / pol.period;
                w1 = b1 * std::sin(ang);
                w2 = b2 * std::cos(ang);
                break;
            }
            case DisturbanceKind::Zero: break;
        }

        const double u = c.f_x(0, 0) * x(0, 0) + c.f_x(0, 1) * x(1, 0) +
                         c.f_x(0, 2) * x(2, 0) + g_eff * w2;

        SimRow row;
        row.k = k;
        row.x1 = x(0, 0);
        row.x2 = x(1, 0);
        row.x3 = x(2, 0);
        row.w1 = w1;
        row.w2 = w2;
        row.u = u;
        row.i = x(0, 0) + s.steady.i_inf;
        row.p = x(1, 0) + s.steady.p_inf;
        row.o = u + s.steady.o_inf;
        row.d = s.d_inf + w1 + w2_lag2;
        row.f = s.d_inf + w2;
        trace.rows.push_back(row);

        const Matrix w{{w1}, {w2}};
        x = s.plant.a * x + s.plant.b * u + s.plant.b_w * w;
        if (!x.is_finite() || !std::isfinite(u))
            throw SimDivergence("simulate: state diverged at step " + std::to_string(k));
        w2_lag2 = w2_lag1;
        w2_lag1 = w2;
    }
    trace.final_state = {x(0, 0), x(1, 0), x(2, 0)};
    return trace;
}

// Spectral radius of A + B F_x. The third row of the closed loop is zero, so
// the eigenvalues are those of the leading 2x2 block plus zero.
[[nodiscard]] inline double closed_loop_spectral_radius(const PlantMatrices& m,
                                                        const Controller& c) {
    Matrix acl = m.a;
    for (std::size_t j = 0; j < 3; ++j) acl(1, j) += c.f_x(0, j);
    const double tr = acl(0, 0) + acl(1, 1);
    const double det = diff_of_products(acl(0, 0), acl(1, 1), acl(0, 1), acl(1, 0));
    const double disc = diff_of_products(tr, tr, 4.0, det);
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return std::max(std::abs((tr + root) / 2.0), std::abs((tr - root) / 2.0));
    }
    return std::sqrt(det);  // complex pair, modulus sqrt(det)
}

[[nodiscard]] inline MetricsReport metrics(const SimTrace& trace, const Controller& c,
                                           const SteadyState& steady, double eps_hat) {
    if (trace.rows.empty()) throw std::invalid_argument("metrics: empty trace");
    if (!(eps_hat >= 0.0)) throw std::invalid_argument("metrics: eps_hat must be >= 0");

    MetricsReport r;
    r.wt_bound = c.wt_bound;

    double num = 0.0, den = 0.0;
    double w2_lag1 = 0.0, w2_lag2 = 0.0;
    for (const auto& row : trace.rows) {
        r.peak_order = std::max(r.peak_order, std::abs(row.o - steady.o_inf));
        r.peak_inventory = std::max(r.peak_inventory, std::abs(row.i - steady.i_inf));
        const double od = row.o - steady.o_inf;
        const double dd = row.w1 + w2_lag2;  // d(k) - d_inf by construction
        num += od * od;
        den += dd * dd;
        w2_lag2 = w2_lag1;
        w2_lag1 = row.w2;
        if (row.i < 0.0 || row.p < 0.0 || row.o < 0.0) ++r.negativity_warnings;
    }
    if (den > 0.0)
        r.energy_ratio = num / den;
    else
        r.energy_ratio = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;

    const auto level = [&](double x1, double x2, double x3) {
        if (eps_hat == 0.0) {
            const bool origin = x1 == 0.0 && x2 == 0.0 && x3 == 0.0;
            return origin ? 0.0 : std::numeric_limits<double>::infinity();
        }
        const Matrix x{{x1 / eps_hat}, {x2 / eps_hat}, {x3 / eps_hat}};
        return (x.transpose() * c.p * x)(0, 0);
    };
    for (const auto& row : trace.rows)
        r.max_ellipsoid_level = std::max(r.max_ellipsoid_level, level(row.x1, row.x2, row.x3));
    r.max_ellipsoid_level = std::max(
        r.max_ellipsoid_level,
        level(trace.final_state[0], trace.final_state[1], trace.final_state[2]));
    r.ellipsoid_ok = r.max_ellipsoid_level <= 1.0 + 1e-6;
    return r;
}

// Fixed controller, varying forecast-error bound. Each grid point reruns the
// trials on the corresponding raw box from x(0) = 0; trial j uses seed + j.
// wt_bound is recomputed from gamma_star since the controller itself never
// depends on the disturbance scale.
[[nodiscard]] inline std::vector<ForecastSweepRow> sweep_forecast_error(
    const VendorParams& base, const Controller& c, double eps_d,
    const std::vector<double>& eps_f_grid, int horizon, int trials,
    std::uint64_t seed = 12345, DisturbanceKind kind = DisturbanceKind::UniformBox) {
    if (eps_f_grid.empty()) throw std::invalid_argument("sweep_forecast_error: empty grid");
    if (trials < 1) throw std::invalid_argument("sweep_forecast_error: trials must be >= 1");
    if (!(eps_d >= 0.0)) throw std::invalid_argument("sweep_forecast_error: eps_d must be >= 0");

    std::vector<ForecastSweepRow> table;
    table.reserve(eps_f_grid.size());
    const Matrix x0(3, 1);
    for (double eps_f : eps_f_grid) {
        if (!(eps_f >= 0.0))
            throw std::invalid_argument("sweep_forecast_error: eps_f must be >= 0");
        VendorParams p = base;
        p.eps_d = eps_d;
        p.eps_f = eps_f;
        const SimSetup setup = unshifted_setup(p);

        ForecastSweepRow row;
        row.eps_f = eps_f;
        row.wt_bound = c.gamma_star * eps_hat(p);
        for (int t = 0; t < trials; ++t) {
            DisturbancePolicy pol{kind, seed + static_cast<std::uint64_t>(t), 24};
            const SimTrace trace = run(setup, c, pol, horizon, x0);
            const MetricsReport m = metrics(trace, c, setup.steady, eps_hat(p));
            row.peak_order = std::max(row.peak_order, m.peak_order);
            row.peak_inventory = std::max(row.peak_inventory, m.peak_inventory);
        }
        table.push_back(row);
    }
    return table;
}

}  // namespace bullwhip
