#pragma once

// Single-vendor inventory model and its shifted state-space form.
//
// Unshifted dynamics, all quantities nonnegative in sane operation:
//   i(k+1) = (1-beta) i(k) + (1-alpha) p(k) - d(k)     inventory
//   p(k+1) = alpha p(k) + o(k)                         pipeline
//   o(k)   = -gamma_I i(k) - gamma_P p(k) + gamma_D f(k)
// with backlog rate alpha, perish rate beta, demand d, and a two-step-ahead
// forecast f. Centering at the steady state (i_inf, p_inf, o_inf) for constant
// demand d_inf gives a 3-state plant driven by the forecast error
// w1(k) = d(k) - f(k-2) and the forecast centering w2(k) = f(k) - d_inf.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "bullwhip/matrix.hpp"

namespace bullwhip {

struct VendorParams {
    double alpha = 0.1;    // backlog rate, fraction of pipeline retained
    double beta = 0.1;     // perish rate, fraction of inventory lost
    double d_inf = 20000;  // nominal constant demand
    double eps_d = 1000;   // demand deviation bound |d(k) - d_inf|
    double eps_f = 200;    // forecast error bound |d(k) - f(k-2)|
    double gamma_I = 0.9;  // inventory feedback gain
    double gamma_P = 1.0;  // pipeline feedback gain
    double gamma_D = 3.0;  // forecast feedforward gain
};

inline void validate(const VendorParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.alpha) || p.alpha < 0.0 || p.alpha > 1.0)
        throw std::invalid_argument("VendorParams: alpha outside [0, 1]");
    if (!finite(p.beta) || p.beta < 0.0 || p.beta > 1.0)
        throw std::invalid_argument("VendorParams: beta outside [0, 1]");
    if (!finite(p.d_inf) || p.d_inf <= 0.0)
        throw std::invalid_argument("VendorParams: d_inf must be positive");
    if (!finite(p.eps_d) || p.eps_d < 0.0 || !finite(p.eps_f) || p.eps_f < 0.0)
        throw std::invalid_argument("VendorParams: eps_d and eps_f must be nonnegative");
    if (!finite(p.gamma_I) || !finite(p.gamma_P) || !finite(p.gamma_D))
        throw std::invalid_argument("VendorParams: gains must be finite");
}

// ---------------------------------------------------------------------------
// steady state
// ---------------------------------------------------------------------------

struct SteadyState {
    double i_inf = 0.0;
    double p_inf = 0.0;
    double o_inf = 0.0;
};

// Equilibrium of the unshifted dynamics under constant demand d_inf:
//   [ beta     alpha-1          ] [i]   [ -1      ]
//   [ gamma_I  1-alpha+gamma_P  ] [p] = [ gamma_D ] * d_inf
[[nodiscard]] inline SteadyState steady_state(const VendorParams& p) {
    validate(p);
    const double m11 = p.beta, m12 = p.alpha - 1.0;
    const double m21 = p.gamma_I, m22 = 1.0 - p.alpha + p.gamma_P;
    const double det = diff_of_products(m11, m22, m12, m21);
    if (std::abs(det) <= 1e-12)
        throw std::invalid_argument("steady_state: equilibrium system is singular");
    const double r1 = -p.d_inf, r2 = p.gamma_D * p.d_inf;
    SteadyState s;
    s.i_inf = diff_of_products(r1, m22, m12, r2) / det;
    s.p_inf = diff_of_products(m11, r2, r1, m21) / det;
    s.o_inf = -p.gamma_I * s.i_inf - p.gamma_P * s.p_inf + p.gamma_D * p.d_inf;
    return s;
}

// ---------------------------------------------------------------------------
// closed-loop stability of the 2-state (i, p) core
// ---------------------------------------------------------------------------

struct StabilityReport {
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
    double spectral_radius = 0.0;
    bool stable = false;
    Matrix closed_loop;  // [[1-beta, 1-alpha], [-gamma_I, alpha-gamma_P]]
};

// Eigenvalues of the closed-loop pair via its characteristic quadratic.
// With a = gamma_P - alpha and b = beta - 1 the trace is -(a+b) and the
// determinant ab + gamma_I (1-alpha); the discriminant (a-b)^2 minus
// 4 gamma_I (1-alpha) cancels exactly at the deadbeat gains, so it is
// evaluated with the fused-multiply difference.
[[nodiscard]] inline StabilityReport stability(const VendorParams& p) {
    validate(p);
    const double a = p.gamma_P - p.alpha;
    const double b = p.beta - 1.0;
    const double tr = -(a + b);
    const double disc = diff_of_products(a - b, a - b, 4.0 * p.gamma_I, 1.0 - p.alpha);

    StabilityReport r;
    r.closed_loop = Matrix{{1.0 - p.beta, 1.0 - p.alpha}, {-p.gamma_I, p.alpha - p.gamma_P}};
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        r.lambda_plus = {0.5 * (tr + root), 0.0};
        r.lambda_minus = {0.5 * (tr - root), 0.0};
        r.spectral_radius = std::max(std::abs(r.lambda_plus.real()), std::abs(r.lambda_minus.real()));
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        r.lambda_plus = {0.5 * tr, im};
        r.lambda_minus = {0.5 * tr, -im};
        // For a conjugate pair the squared modulus is the determinant.
        const double det = a * b + p.gamma_I * (1.0 - p.alpha);
        r.spectral_radius = std::sqrt(det);
    }
    r.stable = r.spectral_radius < 1.0;
    return r;
}

// Deadbeat gains: both closed-loop eigenvalues at the origin.
[[nodiscard]] inline VendorParams with_deadbeat_gains(VendorParams p) {
    if (p.alpha >= 1.0)
        throw std::invalid_argument("with_deadbeat_gains: alpha = 1 leaves the pipeline unreachable");
    p.gamma_P = 1.0 + p.alpha - p.beta;
    p.gamma_I = (1.0 - p.beta) * (1.0 - p.beta) / (1.0 - p.alpha);
    return p;
}

// ---------------------------------------------------------------------------
// operating assumptions
// ---------------------------------------------------------------------------

struct Assumption3Report {
    bool ok = false;  // solvable equilibrium with strictly positive components
    SteadyState steady;
};

[[nodiscard]] inline Assumption3Report check_assumption3(const VendorParams& p) {
    Assumption3Report r;
    r.steady = steady_state(p);  // throws if the 2x2 system is singular
    r.ok = r.steady.i_inf > 0.0 && r.steady.p_inf > 0.0 && r.steady.o_inf > 0.0;
    return r;
}

struct Assumption4Report {
    bool ok = false;
    double smallest = 0.0;  // min(i_inf, p_inf, o_inf, d_inf)
    double required = 0.0;  // factor * (eps_d + eps_f)
};

// Disturbance magnitudes must stay small against the operating point, or the
// linear model walks the trajectories negative.
[[nodiscard]] inline Assumption4Report check_assumption4(const VendorParams& p,
                                                         double factor = 10.0) {
    if (!(factor > 0.0)) throw std::invalid_argument("check_assumption4: factor must be positive");
    const SteadyState s = steady_state(p);
    Assumption4Report r;
    r.smallest = std::min(std::min(s.i_inf, s.p_inf), std::min(s.o_inf, p.d_inf));
    r.required = factor * (p.eps_d + p.eps_f);
    r.ok = r.smallest >= r.required;
    return r;
}

// ---------------------------------------------------------------------------
// shifted plant
// ---------------------------------------------------------------------------

struct PlantMatrices {
    Matrix a;    // 3x3: state (i, p, delayed w2)
    Matrix b;    // 3x1: order deviation enters the pipeline
    Matrix b_w;  // 3x2: disturbances (w1, w2)
};

// x1 = i - i_inf, x2 = p - p_inf, x3 delays w2 by one step; the demand
// deviation seen by the inventory is w1(k) + w2(k-2).
[[nodiscard]] inline PlantMatrices build_plant(const VendorParams& p) {
    validate(p);
    PlantMatrices m;
    m.a = Matrix{{1.0 - p.beta, 1.0 - p.alpha, -1.0}, {0.0, p.alpha, 0.0}, {0.0, 0.0, 0.0}};
    m.b = Matrix{{0.0}, {1.0}, {0.0}};
    m.b_w = Matrix{{-1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}};
    return m;
}

struct ControllabilityReport {
    bool ok = false;
    double det = 0.0;  // determinant of [B2, A2 B2] for the (i, p) core
};

// Only the 2-state core is steerable through the order channel; its
// controllability matrix [[0, 1-alpha], [1, alpha]] has determinant
// -(1-alpha). alpha = 1 severs the pipeline-to-inventory path entirely.
[[nodiscard]] inline ControllabilityReport controllability_ok(const VendorParams& p) {
    validate(p);
    if (p.alpha == 1.0)
        throw std::invalid_argument("controllability_ok: alpha = 1 is a degenerate plant");
    ControllabilityReport r;
    r.det = -(1.0 - p.alpha);
    r.ok = std::abs(r.det) > 1e-12;
    return r;
}

// ---------------------------------------------------------------------------
// disturbance geometry
// ---------------------------------------------------------------------------

struct DisturbanceBox {
    double w1_bound = 0.0;
    double w2_bound = 0.0;
};

// Radius of the disturbance box: |w1| <= eps_f, |w2| <= eps_d + eps_f.
[[nodiscard]] inline double eps_hat(const VendorParams& p) {
    validate(p);
    const double w2 = p.eps_d + p.eps_f;
    return std::sqrt(p.eps_f * p.eps_f + w2 * w2);
}

// Box normalized by eps_hat so its corner sits on the unit circle; this is
// the disturbance set the synthesis certificates are computed against.
[[nodiscard]] inline DisturbanceBox scaled_box(const VendorParams& p) {
    const double e = eps_hat(p);
    DisturbanceBox b;
    if (e == 0.0) return b;  // no disturbance at all
    b.w1_bound = p.eps_f / e;
    b.w2_bound = (p.eps_d + p.eps_f) / e;
    return b;
}

// Physical-units box, for simulating in unshifted coordinates.
[[nodiscard]] inline DisturbanceBox raw_box(const VendorParams& p) {
    validate(p);
    return DisturbanceBox{p.eps_f, p.eps_d + p.eps_f};
}

}  // namespace bullwhip
