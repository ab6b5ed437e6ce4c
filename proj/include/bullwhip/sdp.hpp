#pragma once

// Small-scale linear SDP in inequality form:
//
//     minimize    c^T z
//     subject to  F_j(z) = F0_j + sum_i z_i F_ij  >=  0   (PSD, per block)
//
// solved by a two-phase log-det barrier method with damped Newton steps.
// Phase I minimizes the smallest lift s such that F_j(z) + s I >= 0 for all
// blocks; a strictly negative optimum hands phase II a strictly feasible
// start, a positive one certifies infeasibility. Everything is deterministic:
// no randomization, no timing-dependent control flow.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bullwhip/matrix.hpp"

namespace bullwhip::sdp {

enum class Status { Optimal, Infeasible, MaxIter, NumericalFailure };

[[nodiscard]] inline const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "Optimal";
        case Status::Infeasible: return "Infeasible";
        case Status::MaxIter: return "MaxIter";
        case Status::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

// One PSD constraint block: F0 + sum_i z_i coeffs[i] >= 0.
struct LmiBlock {
    Matrix f0;
    std::vector<Matrix> coeffs;
};

struct Problem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<LmiBlock> blocks;
    std::vector<std::string> var_names;
};

struct Options {
    double feas_tol = 1e-7;  // infeasibility certification slack
    double gap_tol = 1e-8;   // barrier duality-gap target (mu * total dim)
    int max_newton = 500;    // Newton-step budget across both phases
    // Internal |z_i| <= trust_radius box. Feasible sets with objective-neutral
    // recession directions have no barrier centers; the box restores them.
    // Must comfortably exceed the solution norm, or the cap biases it.
    double trust_radius = 1e6;
};

struct Solution {
    Status status = Status::NumericalFailure;
    std::vector<double> z;
    double objective_value = 0.0;
    std::vector<double> min_eigen_per_block;  // at z, original problem scale
    int iterations = 0;                       // Newton steps spent
    // c^T z recorded after each phase-II outer (mu) stage; the central path
    // of a minimization is objective-monotone, which tests rely on.
    std::vector<double> outer_objectives;
};

struct FeasibilityReport {
    std::vector<double> min_eigen;
    double worst_violation = 0.0;  // max over blocks of max(0, -min_eigen)
};

// ---------------------------------------------------------------------------
// assembly and diagnostics
// ---------------------------------------------------------------------------

[[nodiscard]] inline Problem assemble(std::size_t num_vars,
                                      std::vector<double> objective,
                                      std::vector<LmiBlock> blocks,
                                      std::vector<std::string> var_names = {}) {
    if (num_vars == 0) throw std::invalid_argument("sdp::assemble: no variables");
    if (objective.size() != num_vars)
        throw std::invalid_argument("sdp::assemble: objective length != num_vars");
    for (double v : objective)
        if (!std::isfinite(v)) throw std::invalid_argument("sdp::assemble: non-finite objective");
    if (blocks.empty()) throw std::invalid_argument("sdp::assemble: no blocks");
    for (auto& b : blocks) {
        const std::size_t n = b.f0.rows();
        if (n == 0) throw std::invalid_argument("sdp::assemble: empty block");
        if (b.coeffs.size() != num_vars)
            throw std::invalid_argument("sdp::assemble: coefficient count != num_vars");
        b.f0 = detail::symmetrized(b.f0, "sdp::assemble");
        for (auto& c : b.coeffs) {
            if (c.rows() != n || c.cols() != n)
                throw std::invalid_argument("sdp::assemble: coefficient dimension mismatch");
            c = detail::symmetrized(c, "sdp::assemble");
        }
    }
    if (var_names.empty()) {
        var_names.resize(num_vars);
        for (std::size_t i = 0; i < num_vars; ++i) var_names[i] = "z" + std::to_string(i);
    } else if (var_names.size() != num_vars) {
        throw std::invalid_argument("sdp::assemble: var_names length != num_vars");
    }
    return Problem{num_vars, std::move(objective), std::move(blocks), std::move(var_names)};
}

[[nodiscard]] inline Matrix eval_block(const LmiBlock& b, const std::vector<double>& z) {
    Matrix f = b.f0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == 0.0) continue;
        f += b.coeffs[i] * z[i];
    }
    return f;
}

[[nodiscard]] inline FeasibilityReport check_solution(const Problem& p,
                                                      const std::vector<double>& z) {
    if (z.size() != p.num_vars)
        throw std::invalid_argument("sdp::check_solution: z length != num_vars");
    FeasibilityReport r;
    r.min_eigen.reserve(p.blocks.size());
    for (const auto& b : p.blocks) {
        const auto e = sym_eigen(eval_block(b, z));
        r.min_eigen.push_back(e.values.front());
        r.worst_violation = std::max(r.worst_violation, std::max(0.0, -e.values.front()));
    }
    return r;
}

// ---------------------------------------------------------------------------
// solver internals
// ---------------------------------------------------------------------------

namespace detail2 {

constexpr double kMu0 = 1.0;
constexpr double kMuShrink = 0.2;
constexpr double kArmijo = 1e-4;
constexpr int kMaxInner = 40;
constexpr double kDecrementTol = 2e-9;

struct ScaledProblem {
    std::size_t num_vars;
    std::vector<double> c;
    std::vector<LmiBlock> blocks;                  // prescaled copies
    std::vector<std::vector<bool>> var_in_block;   // [block][var] has a nonzero coeff
    std::size_t total_dim = 0;
};

inline bool is_zero(const Matrix& m) { return m.max_abs() == 0.0; }

inline ScaledProblem prescale(const Problem& p, double trust_radius) {
    ScaledProblem sp;
    sp.num_vars = p.num_vars;
    sp.c = p.objective;
    sp.blocks = p.blocks;
    sp.var_in_block.resize(p.blocks.size());
    for (std::size_t j = 0; j < sp.blocks.size(); ++j) {
        auto& b = sp.blocks[j];
        const double s = 1.0 / (1.0 + b.f0.max_abs());
        b.f0 *= s;
        sp.var_in_block[j].resize(p.num_vars);
        for (std::size_t i = 0; i < p.num_vars; ++i) {
            b.coeffs[i] *= s;
            sp.var_in_block[j][i] = !is_zero(b.coeffs[i]);
        }
        sp.total_dim += b.f0.rows();
    }
    // Trust box trust_radius -+ z_i >= 0 as 1x1 blocks, one pair per variable.
    for (std::size_t i = 0; i < p.num_vars; ++i) {
        for (double sign : {-1.0, 1.0}) {
            LmiBlock box;
            box.f0 = Matrix{{trust_radius}};
            box.coeffs.assign(p.num_vars, Matrix(1, 1));
            box.coeffs[i](0, 0) = sign;
            sp.blocks.push_back(std::move(box));
            std::vector<bool> flags(p.num_vars, false);
            flags[i] = true;
            sp.var_in_block.push_back(std::move(flags));
            sp.total_dim += 1;
        }
    }
    return sp;
}

// Cholesky factors of all blocks at z, or nothing if any block is not PD.
inline bool factor_all(const ScaledProblem& sp, const std::vector<double>& z,
                       std::vector<Matrix>& factors) {
    factors.clear();
    factors.reserve(sp.blocks.size());
    for (const auto& b : sp.blocks) {
        Matrix f = eval_block(b, z);
        if (!f.is_finite()) return false;
        auto l = cholesky(f);
        if (!l) return false;
        factors.push_back(std::move(*l));
    }
    return true;
}

inline double barrier_value(const std::vector<double>& c, double mu,
                            const std::vector<double>& z,
                            const std::vector<Matrix>& factors) {
    double obj = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) obj += c[i] * z[i];
    double logdet = 0.0;
    for (const auto& l : factors)
        for (std::size_t i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    return obj / mu - logdet;
}

enum class CenterOutcome { Converged, Budget, Numerical };

// Damped Newton centering of c^T z / mu - sum_j logdet F_j(z), starting from
// a strictly feasible z. `budget` counts Newton steps across calls.
inline CenterOutcome center(const ScaledProblem& sp, double mu, std::vector<double>& z,
                            int& budget, const Options& opt,
                            const std::function<bool(const std::vector<double>&)>& early_stop) {
    const std::size_t n = sp.num_vars;
    std::vector<Matrix> factors;
    if (!factor_all(sp, z, factors)) return CenterOutcome::Numerical;

    for (int inner = 0; inner < kMaxInner; ++inner) {
        if (budget >= opt.max_newton) return CenterOutcome::Budget;

        // Gradient and Hessian of the barrier at z.
        std::vector<double> g(n, 0.0);
        Matrix h(n, n);
        const std::size_t nblocks = sp.blocks.size();
        for (std::size_t j = 0; j < nblocks; ++j) {
            const Matrix s = detail::cholesky_solve(factors[j], Matrix::identity(factors[j].rows()));
            std::vector<Matrix> w(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!sp.var_in_block[j][i]) continue;
                w[i] = s * sp.blocks[j].coeffs[i];
                g[i] -= trace(w[i]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (!sp.var_in_block[j][i]) continue;
                for (std::size_t k = i; k < n; ++k) {
                    if (!sp.var_in_block[j][k]) continue;
                    double t = 0.0;
                    const std::size_t d = w[i].rows();
                    for (std::size_t r = 0; r < d; ++r)
                        for (std::size_t cidx = 0; cidx < d; ++cidx)
                            t += w[i](r, cidx) * w[k](cidx, r);
                    h(i, k) += t;
                    h(k, i) = h(i, k);
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) g[i] += sp.c[i] / mu;

        // Newton system. Jacobi equilibration first: near an active constraint
        // the PSD Hessian spans many orders of magnitude, and the 1e-8
        // regularization fallback only means something at unit diagonal scale.
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = h(i, i) > 0.0 ? std::sqrt(h(i, i)) : 1.0;
        Matrix hs(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) hs(i, k) = h(i, k) / (d[i] * d[k]);
        auto l = cholesky(hs);
        if (!l) l = cholesky(hs, 1e-8);
        if (!l) return CenterOutcome::Numerical;
        Matrix rhs(n, 1);
        for (std::size_t i = 0; i < n; ++i) rhs(i, 0) = -g[i] / d[i];
        Matrix step = detail::cholesky_solve(*l, rhs);
        for (std::size_t i = 0; i < n; ++i) step(i, 0) /= d[i];

        double decrement = 0.0;
        for (std::size_t i = 0; i < n; ++i) decrement -= g[i] * step(i, 0);
        if (!(decrement > kDecrementTol)) return CenterOutcome::Converged;

        const double f0 = barrier_value(sp.c, mu, z, factors);
        double t = 1.0;
        bool moved = false;
        std::vector<double> trial(n);
        std::vector<Matrix> trial_factors;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] + t * step(i, 0);
            if (!factor_all(sp, trial, trial_factors)) continue;
            const double ft = barrier_value(sp.c, mu, trial, trial_factors);
            if (ft <= f0 - kArmijo * t * decrement) {
                z = trial;
                factors = std::move(trial_factors);
                moved = true;
                break;
            }
        }
        ++budget;
        if (!moved) return CenterOutcome::Converged;  // numerical floor reached
        if (early_stop && early_stop(z)) return CenterOutcome::Converged;
    }
    return CenterOutcome::Converged;
}

// Follow the central path down to mu * total_dim <= gap_stop.
inline CenterOutcome path_follow(const ScaledProblem& sp, std::vector<double>& z,
                                 double gap_stop, int& budget, const Options& opt,
                                 const std::function<bool(const std::vector<double>&)>& early_stop,
                                 std::vector<double>* stage_objectives) {
    double mu = kMu0;
    for (;;) {
        const auto out = center(sp, mu, z, budget, opt, early_stop);
        if (out != CenterOutcome::Converged) return out;
        if (stage_objectives) {
            double obj = 0.0;
            for (std::size_t i = 0; i < sp.num_vars; ++i) obj += sp.c[i] * z[i];
            stage_objectives->push_back(obj);
        }
        if (early_stop && early_stop(z)) return CenterOutcome::Converged;
        if (mu * static_cast<double>(sp.total_dim) <= gap_stop) return CenterOutcome::Converged;
        mu *= kMuShrink;
    }
}

}  // namespace detail2

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

[[nodiscard]] inline Solution solve(const Problem& p, const Options& opt = {}) {
    if (!(opt.feas_tol > 0.0) || !(opt.gap_tol > 0.0) || opt.max_newton < 1 ||
        !(opt.trust_radius > 0.0))
        throw std::invalid_argument("sdp::solve: bad options");

    const detail2::ScaledProblem sp = detail2::prescale(p, opt.trust_radius);
    Solution sol;
    sol.z.assign(p.num_vars, 0.0);

    auto finalize = [&](Status st, const std::vector<double>& z) {
        sol.status = st;
        sol.z = z;
        sol.objective_value = 0.0;
        for (std::size_t i = 0; i < p.num_vars; ++i) sol.objective_value += p.objective[i] * z[i];
        const auto rep = check_solution(p, z);
        sol.min_eigen_per_block = rep.min_eigen;
        return sol;
    };

    // Phase I: minimize the uniform lift s with F_j(z) + s I >= 0.
    detail2::ScaledProblem lifted = sp;
    lifted.num_vars = sp.num_vars + 1;
    lifted.c.assign(lifted.num_vars, 0.0);
    lifted.c.back() = 1.0;
    for (std::size_t j = 0; j < lifted.blocks.size(); ++j) {
        lifted.blocks[j].coeffs.push_back(Matrix::identity(lifted.blocks[j].f0.rows()));
        lifted.var_in_block[j].push_back(true);
    }

    std::vector<double> zs(lifted.num_vars, 0.0);
    double worst = 0.0;
    for (const auto& b : sp.blocks) {
        const auto e = sym_eigen(b.f0);
        worst = std::max(worst, -e.values.front());
    }
    zs.back() = worst + 1.0;

    int budget = 0;
    // Certifiably strictly feasible is all phase I needs; stop early once the
    // lift is comfortably negative instead of polishing an unbounded problem.
    const auto feasible_enough = [](const std::vector<double>& v) { return v.back() <= -1e-4; };
    const double phase1_gap = std::min(opt.gap_tol, 1e-3 * opt.feas_tol);

    auto out = detail2::path_follow(lifted, zs, phase1_gap, budget, opt, feasible_enough, nullptr);
    sol.iterations = budget;
    std::vector<double> z(zs.begin(), zs.end() - 1);
    if (out == detail2::CenterOutcome::Numerical) return finalize(Status::NumericalFailure, z);
    if (out == detail2::CenterOutcome::Budget) return finalize(Status::MaxIter, z);

    const double s_final = zs.back();
    // The barrier approaches the lift optimum from above, so a positive value
    // at convergence certifies an empty (strict) interior.
    if (s_final > 0.0) return finalize(Status::Infeasible, z);

    std::vector<Matrix> factors;
    if (!detail2::factor_all(sp, z, factors)) return finalize(Status::NumericalFailure, z);

    // Phase II: follow the central path of the real objective.
    out = detail2::path_follow(sp, z, opt.gap_tol, budget, opt, nullptr, &sol.outer_objectives);
    sol.iterations = budget;
    if (out == detail2::CenterOutcome::Numerical) return finalize(Status::NumericalFailure, z);
    if (out == detail2::CenterOutcome::Budget) return finalize(Status::MaxIter, z);
    return finalize(Status::Optimal, z);
}

}  // namespace bullwhip::sdp
