#pragma once

// Controller synthesis: pick an invariant-ellipsoid contraction rate lambda,
// solve the fixed-lambda SDP for the peak-gain certificate, and search the
// quasi-convex profile gamma(lambda) with a coarse grid plus golden section.
//
// Decision vector (12 variables):
//   q11 q12 q13 q22 q23 q33   ellipsoid shape Q = P^{-1} (symmetric 3x3)
//   y1 y2 y3                  Y = F_x Q, state feedback in disguise
//   g_w                       forecast feedthrough
//   sigma                     S-procedure split between state and feedthrough
//   t                         gamma^2, the objective
//
// Block 1 is the negated invariance certificate (>= 0 after negation), block 2
// the peak-output certificate with t - sigma on its middle diagonal, block 3
// keeps Q positive definite, blocks 4 and 5 keep sigma and t away from zero.
// Strict inequalities carry an explicit margin.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "bullwhip/matrix.hpp"
#include "bullwhip/model.hpp"
#include "bullwhip/sdp.hpp"

namespace bullwhip {

enum class ExtractionMode { Unscaled, PaperScaled };

struct SynthOptions {
    double lambda_min = 1e-3;
    std::vector<double> lambda_grid;  // explicit probes; empty means search
    ExtractionMode extraction = ExtractionMode::Unscaled;
    double margin = 1e-7;
    // The certificate program has objective-neutral recession directions, so
    // the ellipsoid drifts to the solver's trust box; a tight box keeps Q
    // moderate and Newton budgets small without moving the optimum.
    sdp::Options solver{.max_newton = 1500, .trust_radius = 1e4};
};

struct LambdaEval {
    double lambda = 0.0;
    sdp::Status status = sdp::Status::NumericalFailure;
    double gamma = 0.0;  // sqrt(t) when Optimal
    double sigma = 0.0;
    double g_w = 0.0;
    Matrix q;  // 3x3 ellipsoid shape
    Matrix y;  // 1x3
    int iterations = 0;
    double solve_cost_ms = 0.0;  // deterministic work model, not wall time
};

struct Controller {
    Matrix f_x;  // 1x3 state feedback
    double g_w = 0.0;
    double sigma = 0.0;
    double lambda_star = 0.0;
    double gamma_star = 0.0;
    double wt_bound = 0.0;  // eps_hat * gamma_star, peak order deviation
    Matrix p;               // ellipsoid shape in normalized coordinates
    Matrix q;
    ExtractionMode mode = ExtractionMode::Unscaled;

    [[nodiscard]] double effective_feedthrough() const {
        return mode == ExtractionMode::Unscaled ? g_w : g_w / std::sqrt(sigma);
    }
};

struct NoFeasibleLambda : std::runtime_error {
    explicit NoFeasibleLambda(const std::string& what, bool numerical_failure = false)
        : std::runtime_error(what), numerical(numerical_failure) {}
    bool numerical;  // true when probes broke down instead of certifying infeasibility
};

namespace synth_detail {

constexpr std::size_t kNumVars = 12;
constexpr std::size_t kQ = 0;      // q11 q12 q13 q22 q23 q33
constexpr std::size_t kY = 6;      // y1 y2 y3
constexpr std::size_t kGw = 9;
constexpr std::size_t kSigma = 10;
constexpr std::size_t kT = 11;

inline Matrix q_from(const std::vector<double>& z) {
    return Matrix{{z[kQ + 0], z[kQ + 1], z[kQ + 2]},
                  {z[kQ + 1], z[kQ + 3], z[kQ + 4]},
                  {z[kQ + 2], z[kQ + 4], z[kQ + 5]}};
}

inline Matrix y_from(const std::vector<double>& z) {
    return Matrix{{z[kY + 0], z[kY + 1], z[kY + 2]}};
}

// The two certificate matrices at a concrete decision vector. Both are affine
// in z, which the assembler below exploits to peel off coefficients exactly.
struct CertPair {
    Matrix invariance;  // 8x8, negated so the constraint reads >= 0
    Matrix peak;        // 6x6, before the margin shift
};

inline CertPair certificates(const PlantMatrices& m, double lambda,
                             const std::vector<double>& z) {
    const Matrix q = q_from(z);
    const Matrix y = y_from(z);
    const double gw = z[kGw], sigma = z[kSigma], t = z[kT];

    Matrix aq_by = m.a * q;  // AQ + BY: orders steer the pipeline row only
    for (std::size_t j = 0; j < 3; ++j) aq_by(1, j) += y(0, j);
    Matrix bw_cl = m.b_w;  // B_w + B F_w with F_w = [0, g_w]
    bw_cl(1, 1) += gw;

    CertPair c{Matrix(8, 8), Matrix(6, 6)};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            c.invariance(i, j) = (1.0 - lambda) * q(i, j);
            c.invariance(i + 5, j + 5) = q(i, j);
            c.invariance(i, j + 5) = -aq_by(j, i);
            c.invariance(i + 5, j) = -aq_by(i, j);
        }
    for (std::size_t i = 0; i < 2; ++i) {
        c.invariance(i + 3, i + 3) = lambda;
        for (std::size_t j = 0; j < 3; ++j) {
            c.invariance(i + 3, j + 5) = -bw_cl(j, i);
            c.invariance(j + 5, i + 3) = -bw_cl(j, i);
        }
    }

    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) c.peak(i, j) = q(i, j);
    for (std::size_t i = 0; i < 2; ++i) c.peak(i + 3, i + 3) = t - sigma;
    for (std::size_t j = 0; j < 3; ++j) {
        c.peak(j, 5) = y(0, j);
        c.peak(5, j) = y(0, j);
    }
    c.peak(4, 5) = gw;
    c.peak(5, 4) = gw;
    c.peak(5, 5) = sigma;
    return c;
}

}  // namespace synth_detail

// Assemble the fixed-lambda SDP. All five blocks are affine in the decision
// vector, so coefficients are extracted by evaluating at unit vectors.
[[nodiscard]] inline sdp::Problem build_lmis(const VendorParams& params, double lambda,
                                             double margin = 1e-7) {
    validate(params);
    if (!std::isfinite(lambda)) throw std::invalid_argument("build_lmis: lambda not finite");
    if (!(margin > 0.0)) throw std::invalid_argument("build_lmis: margin must be positive");
    using namespace synth_detail;

    const PlantMatrices m = build_plant(params);
    const std::vector<double> zero(kNumVars, 0.0);
    const CertPair base = certificates(m, lambda, zero);

    sdp::LmiBlock invariance, peak, q_pd, sigma_pos, t_pos;
    invariance.f0 = base.invariance;
    peak.f0 = base.peak - Matrix::identity(6) * margin;
    q_pd.f0 = Matrix::identity(3) * -margin;
    sigma_pos.f0 = Matrix{{-margin}};
    t_pos.f0 = Matrix{{-margin}};

    for (std::size_t i = 0; i < kNumVars; ++i) {
        std::vector<double> e(kNumVars, 0.0);
        e[i] = 1.0;
        const CertPair ci = certificates(m, lambda, e);
        invariance.coeffs.push_back(ci.invariance - base.invariance);
        peak.coeffs.push_back(ci.peak - base.peak);
        const Matrix qi = q_from(e);
        q_pd.coeffs.push_back(qi);
        sigma_pos.coeffs.push_back(Matrix{{i == kSigma ? 1.0 : 0.0}});
        t_pos.coeffs.push_back(Matrix{{i == kT ? 1.0 : 0.0}});
    }

    std::vector<double> objective(kNumVars, 0.0);
    objective[kT] = 1.0;
    return sdp::assemble(kNumVars, std::move(objective),
                         {std::move(invariance), std::move(peak), std::move(q_pd),
                          std::move(sigma_pos), std::move(t_pos)},
                         {"q11", "q12", "q13", "q22", "q23", "q33", "y1", "y2", "y3", "g_w",
                          "sigma", "t"});
}

// Deterministic per-solve cost stand-in (milliseconds at a nominal 1 Gflop/s).
// Reported instead of wall time so emitted files stay byte-reproducible.
[[nodiscard]] inline double solve_cost_model_ms(const sdp::Problem& p, int newton_steps) {
    double d3 = 0.0, d2 = 0.0;
    for (const auto& b : p.blocks) {
        const double d = static_cast<double>(b.f0.rows());
        d3 += d * d * d;
        d2 += d * d;
    }
    const double n = static_cast<double>(p.num_vars);
    const double flops_per_step = 2.0 * d3 + 2.0 * n * n * d2 + n * n * n / 3.0;
    return static_cast<double>(newton_steps) * flops_per_step / 1e6;
}

// Solve the certificate SDP at one fixed lambda.
[[nodiscard]] inline LambdaEval eval_f(const VendorParams& params, double lambda,
                                       const SynthOptions& opts = {}) {
    const sdp::Problem problem = build_lmis(params, lambda, opts.margin);
    const sdp::Solution sol = sdp::solve(problem, opts.solver);

    LambdaEval ev;
    ev.lambda = lambda;
    ev.status = sol.status;
    ev.iterations = sol.iterations;
    ev.solve_cost_ms = solve_cost_model_ms(problem, sol.iterations);
    if (sol.status == sdp::Status::Optimal) {
        ev.gamma = std::sqrt(std::max(0.0, sol.z[synth_detail::kT]));
        ev.sigma = sol.z[synth_detail::kSigma];
        ev.g_w = sol.z[synth_detail::kGw];
        ev.q = synth_detail::q_from(sol.z);
        ev.y = synth_detail::y_from(sol.z);
    }
    return ev;
}

// Turn a feasible evaluation into a runnable controller.
[[nodiscard]] inline Controller extract_controller(const VendorParams& params,
                                                   const LambdaEval& ev,
                                                   ExtractionMode mode) {
    if (ev.status != sdp::Status::Optimal)
        throw std::invalid_argument("extract_controller: evaluation is not Optimal");
    Controller c;
    c.q = ev.q;
    c.p = inverse_pd(ev.q);
    c.f_x = solve_pd(ev.q, ev.y.transpose()).transpose();  // F_x = Y Q^{-1}
    c.g_w = ev.g_w;
    c.sigma = ev.sigma;
    c.lambda_star = ev.lambda;
    c.gamma_star = ev.gamma;
    c.wt_bound = eps_hat(params) * ev.gamma;
    c.mode = mode;
    return c;
}

// Peak order deviation over the ellipsoid and the disturbance box:
// sup |F_x x + g w2| = sqrt(F_x Q F_x^T) + |g| * w2_bound.
[[nodiscard]] inline double support_peak(const Controller& c, const DisturbanceBox& box) {
    const Matrix fqf = c.f_x * c.q * c.f_x.transpose();
    return std::sqrt(std::max(0.0, fqf(0, 0))) +
           std::abs(c.effective_feedthrough()) * box.w2_bound;
}

struct SynthesisResult {
    Controller controller;
    LambdaEval best;
    std::vector<LambdaEval> evals;  // every probe, in evaluation order
};

// Minimize gamma(lambda). A 9-point log grid seeds a golden-section refine in
// log space; gamma is quasi-convex on the feasible window, so the bracket
// around the best grid point contains a minimizer. Infeasible probes score
// +inf. Ties prefer the smaller lambda. With an explicit lambda_grid only
// those points are evaluated.
[[nodiscard]] inline SynthesisResult minimize_f(const VendorParams& params,
                                                const SynthOptions& opts = {}) {
    if (!(opts.lambda_min > 0.0) || opts.lambda_min > 1.0)
        throw std::invalid_argument("minimize_f: lambda_min outside (0, 1]");

    SynthesisResult result;
    std::map<double, double> scores;  // lambda -> t (gamma^2), +inf if not Optimal

    auto probe = [&](double lambda) {
        const auto it = scores.find(lambda);
        if (it != scores.end()) return it->second;
        const LambdaEval ev = eval_f(params, lambda, opts);
        const double score = ev.status == sdp::Status::Optimal
                                 ? ev.gamma * ev.gamma
                                 : std::numeric_limits<double>::infinity();
        result.evals.push_back(ev);
        scores.emplace(lambda, score);
        return score;
    };

    if (!opts.lambda_grid.empty()) {
        for (double l : opts.lambda_grid) probe(l);
    } else {
        const double ua = std::log(opts.lambda_min);
        constexpr int kGrid = 9;
        std::vector<double> grid(kGrid);
        for (int i = 0; i < kGrid; ++i)
            grid[i] = std::exp(ua + (0.0 - ua) * static_cast<double>(i) / (kGrid - 1));
        grid.back() = 1.0;

        int best = -1;
        double best_score = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kGrid; ++i) {
            const double s = probe(grid[i]);
            if (s < best_score) {
                best_score = s;
                best = i;
            }
        }
        if (best >= 0) {
            double lo = std::log(grid[std::max(0, best - 1)]);
            double hi = std::log(grid[std::min(kGrid - 1, best + 1)]);
            constexpr double kGolden = 0.6180339887498949;
            double u1 = hi - kGolden * (hi - lo);
            double u2 = lo + kGolden * (hi - lo);
            double f1 = probe(std::exp(u1));
            double f2 = probe(std::exp(u2));
            for (int it = 0; it < 31; ++it) {
                if (f1 <= f2) {
                    hi = u2;
                    u2 = u1;
                    f2 = f1;
                    u1 = hi - kGolden * (hi - lo);
                    f1 = probe(std::exp(u1));
                } else {
                    lo = u1;
                    u1 = u2;
                    f1 = f2;
                    u2 = lo + kGolden * (hi - lo);
                    f2 = probe(std::exp(u2));
                }
            }
        }
    }

    // Each solve is optimal only to within the barrier gap, so exact score
    // comparisons would let solver noise pick the winner on flat stretches of
    // gamma(lambda). Ties within twice the gap go to the smallest lambda.
    double t_min = std::numeric_limits<double>::infinity();
    for (const auto& ev : result.evals)
        if (ev.status == sdp::Status::Optimal) t_min = std::min(t_min, ev.gamma * ev.gamma);
    if (!std::isfinite(t_min)) {
        bool numerical = false;
        for (const auto& ev : result.evals)
            if (ev.status != sdp::Status::Infeasible) numerical = true;
        throw NoFeasibleLambda(numerical
                                   ? "minimize_f: no lambda solved; at least one probe failed "
                                     "numerically"
                                   : "minimize_f: no lambda in the grid was feasible",
                               numerical);
    }

    const double tie_window = t_min + 2.0 * opts.solver.gap_tol;
    const LambdaEval* best = nullptr;
    for (const auto& ev : result.evals) {
        if (ev.status != sdp::Status::Optimal) continue;
        if (ev.gamma * ev.gamma > tie_window) continue;
        if (!best || ev.lambda < best->lambda) best = &ev;
    }

    result.best = *best;
    result.controller = extract_controller(params, *best, opts.extraction);
    return result;
}

}  // namespace bullwhip
