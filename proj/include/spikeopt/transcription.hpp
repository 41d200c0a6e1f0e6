#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "spikeopt/bounded.hpp"
#include "spikeopt/errors.hpp"
#include "spikeopt/phase_model.hpp"
#include "spikeopt/simulate.hpp"

namespace spikeopt {

/// Direct transcription of the minimum-power problem: N piecewise-constant
/// control intervals, RK4-propagated scalar dynamics, terminal constraint
/// theta(T) = 2*pi enforced by an increasing penalty schedule with
/// multiplier updates.  Deliberately ignorant of the analytic optimal
/// structure so it can arbitrate it.
struct TranscriptionSpec {
    int steps = 2000;
    std::vector<double> penalty_weights = {1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
    int max_iters = 400;       // projected-gradient iterations per weight stage
    double grad_tol = 1e-9;
    double terminal_tol = 1e-6;

    void validate() const {
        if (steps < 10) throw std::invalid_argument("transcription needs >= 10 steps");
        for (std::size_t i = 1; i < penalty_weights.size(); ++i)
            if (penalty_weights[i] <= penalty_weights[i - 1])
                throw std::invalid_argument("penalty weights must increase");
        if (penalty_weights.empty() || max_iters < 1)
            throw std::invalid_argument("bad transcription spec");
    }
};

struct TranscriptionResult {
    std::vector<double> control;   // I_k on [k h, (k+1) h)
    std::vector<double> theta;     // theta_k at the N+1 grid nodes
    double energy = 0.0;           // h * sum I_k^2
    double theta_end = 0.0;
    double residual = 0.0;         // theta(T) - 2*pi
    bool converged = false;
};

namespace detail {

struct DiscreteDynamics {
    const PhaseModel& m;
    double h;

    double g(double th, double I) const { return m.f(th) + m.Z(th) * I; }
    double g_th(double th, double I) const { return m.df(th) + m.dZ(th) * I; }

    double step(double th, double I) const {
        const double k1 = g(th, I);
        const double k2 = g(th + 0.5 * h * k1, I);
        const double k3 = g(th + 0.5 * h * k2, I);
        const double k4 = g(th + h * k3, I);
        return th + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // step value plus exact partials d(theta')/d(theta) and d(theta')/dI
    void step_with_partials(double th, double I, double& out, double& d_th,
                            double& d_I) const {
        const double k1 = g(th, I);
        const double a1t = g_th(th, I), a1I = m.Z(th);
        const double x2 = th + 0.5 * h * k1;
        const double k2 = g(x2, I);
        const double a2t = g_th(x2, I) * (1.0 + 0.5 * h * a1t);
        const double a2I = g_th(x2, I) * 0.5 * h * a1I + m.Z(x2);
        const double x3 = th + 0.5 * h * k2;
        const double k3 = g(x3, I);
        const double a3t = g_th(x3, I) * (1.0 + 0.5 * h * a2t);
        const double a3I = g_th(x3, I) * 0.5 * h * a2I + m.Z(x3);
        const double x4 = th + h * k3;
        const double k4 = g(x4, I);
        const double a4t = g_th(x4, I) * (1.0 + h * a3t);
        const double a4I = g_th(x4, I) * h * a3I + m.Z(x4);
        out = th + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        d_th = 1.0 + h / 6.0 * (a1t + 2.0 * a2t + 2.0 * a3t + a4t);
        d_I = h / 6.0 * (a1I + 2.0 * a2I + 2.0 * a3I + a4I);
    }
};

}  // namespace detail

/// theta at the grid nodes for a given control vector.
inline std::vector<double> transcription_rollout(const PhaseModel& m, double T,
                                                 const std::vector<double>& control) {
    detail::DiscreteDynamics dyn{m, T / static_cast<double>(control.size())};
    std::vector<double> th(control.size() + 1);
    th[0] = 0.0;
    for (std::size_t k = 0; k < control.size(); ++k) th[k + 1] = dyn.step(th[k], control[k]);
    return th;
}

/// Gradient of  h*sum I^2 + mu*r + w/2*r^2,  r = theta_N - 2*pi,  by reverse
/// accumulation through the discrete RK4 dynamics.
inline std::vector<double> transcription_gradient(const PhaseModel& m, double T,
                                                  const std::vector<double>& control,
                                                  double mu, double wpen) {
    const std::size_t n = control.size();
    detail::DiscreteDynamics dyn{m, T / static_cast<double>(n)};
    std::vector<double> th(n + 1), d_th(n), d_I(n);
    th[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        dyn.step_with_partials(th[k], control[k], th[k + 1], d_th[k], d_I[k]);
    const double r = th[n] - two_pi;
    double adj = mu + wpen * r;
    std::vector<double> grad(n);
    for (std::size_t k = n; k-- > 0;) {
        grad[k] = 2.0 * dyn.h * control[k] + adj * d_I[k];
        adj *= d_th[k];
    }
    return grad;
}

namespace detail {

inline double penalized_objective(const PhaseModel& m, double T,
                                  const std::vector<double>& control, double mu,
                                  double wpen, double& r_out) {
    const auto th = transcription_rollout(m, T, control);
    r_out = th.back() - two_pi;
    const double h = T / static_cast<double>(control.size());
    double e = 0.0;
    for (double c : control) e += c * c;
    return h * e + mu * r_out + 0.5 * wpen * r_out * r_out;
}

inline void project(std::vector<double>& v, std::optional<double> M) {
    if (!M) return;
    for (double& x : v) x = std::clamp(x, -*M, *M);
}

// Constant control whose rollout ends closest to 2*pi: a coarse scan plus
// bisection refinement when the scan brackets the target.  Keeps the
// optimizer away from the zero-control stationary shape when T is far from
// the natural period.
inline double constant_control_init(const PhaseModel& m, double T,
                                    std::optional<double> M, int steps) {
    const double span = M ? *M : 4.0 * (two_pi / T + m.omega()) / m.zd();
    auto end_at = [&](double c) {
        return transcription_rollout(m, T, std::vector<double>(steps, c)).back();
    };
    double best_c = 0.0, best_gap = std::abs(end_at(0.0) - two_pi);
    double prev_c = -span, prev_end = end_at(-span);
    double blo = 0.0, bhi = 0.0;
    bool bracketed = false;
    for (int i = 0; i <= 64; ++i) {
        const double c = -span + 2.0 * span * i / 64.0;
        const double e = end_at(c);
        if (std::abs(e - two_pi) < best_gap) {
            best_gap = std::abs(e - two_pi);
            best_c = c;
        }
        if (!bracketed && (prev_end - two_pi) * (e - two_pi) < 0.0) {
            blo = prev_c;
            bhi = c;
            bracketed = true;
        }
        prev_c = c;
        prev_end = e;
    }
    if (!bracketed) return best_c;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (blo + bhi);
        ((end_at(mid) - two_pi) * (end_at(blo) - two_pi) > 0.0 ? blo : bhi) = mid;
    }
    return 0.5 * (blo + bhi);
}

}  // namespace detail

/// Minimize  sum I_k^2 h  subject to the RK4-propagated dynamics,
/// theta(T) = 2*pi (to terminal_tol, via the penalty schedule), and
/// |I_k| <= M when a bound is given.  Projected spectral gradient descent
/// with a backtracking line search on the penalized objective; the exact
/// discrete adjoint supplies gradients.  Deterministic given the spec.
inline TranscriptionResult brute_force_design(const PhaseModel& m, double T,
                                              std::optional<double> M,
                                              TranscriptionSpec spec = {}) {
    detail::require_reduced(m);
    spec.validate();
    if (!(T > 0.0)) throw std::invalid_argument("spiking time must be > 0");
    const int n = spec.steps;
    const double h = T / n;

    std::vector<double> I(n, detail::constant_control_init(m, T, M, n));
    detail::project(I, M);

    double mu = 0.0;
    double r = 0.0;
    for (double wpen : spec.penalty_weights) {
        double fx = detail::penalized_objective(m, T, I, mu, wpen, r);
        auto grad = transcription_gradient(m, T, I, mu, wpen);
        double step = 1.0 / std::max(1e-12, std::sqrt(std::inner_product(
                                                 grad.begin(), grad.end(), grad.begin(), 0.0)));
        std::vector<double> I_prev = I, g_prev = grad;
        for (int it = 0; it < spec.max_iters; ++it) {
            // projected trial point with Armijo backtracking
            std::vector<double> trial(n);
            double fy = 0.0, ry = 0.0;
            double alpha = step;
            for (int bt = 0; bt < 60; ++bt) {
                for (int k = 0; k < n; ++k) trial[k] = I[k] - alpha * grad[k];
                detail::project(trial, M);
                double decrease = 0.0;
                for (int k = 0; k < n; ++k) decrease += grad[k] * (trial[k] - I[k]);
                fy = detail::penalized_objective(m, T, trial, mu, wpen, ry);
                if (fy <= fx + 1e-4 * decrease || decrease >= 0.0) break;
                alpha *= 0.5;
            }
            I_prev.swap(I);
            I = trial;
            fx = fy;
            r = ry;
            g_prev.swap(grad);
            grad = transcription_gradient(m, T, I, mu, wpen);

            // Barzilai-Borwein step for the next iteration
            double ss = 0.0, sy = 0.0, pg = 0.0;
            for (int k = 0; k < n; ++k) {
                const double sk = I[k] - I_prev[k];
                const double yk = grad[k] - g_prev[k];
                ss += sk * sk;
                sy += sk * yk;
                double cand = I[k] - grad[k];
                if (M) cand = std::clamp(cand, -*M, *M);
                pg = std::max(pg, std::abs(cand - I[k]));
            }
            step = (sy > 1e-300) ? std::clamp(ss / sy, 1e-10, 1e6) : step * 2.0;
            if (pg <= spec.grad_tol) break;
        }
        mu += wpen * r;
        if (std::abs(r) <= 0.1 * spec.terminal_tol) break;
    }

    TranscriptionResult out;
    out.control = std::move(I);
    out.theta = transcription_rollout(m, T, out.control);
    out.theta_end = out.theta.back();
    out.residual = out.theta_end - two_pi;
    out.converged = std::abs(out.residual) <= spec.terminal_tol;
    double e = 0.0;
    for (double c : out.control) e += c * c;
    out.energy = h * e;
    return out;
}

/// Side-by-side report of the analytic design and the transcription oracle.
struct ValidationReport {
    double e_analytic = 0.0;
    double e_oracle = 0.0;
    double rel_gap = 0.0;    // (e_oracle - e_analytic) / max(e_analytic, floor)
    double max_dev = 0.0;    // max |I_oracle - I_analytic| on the control grid
    int n = 0;
    bool converged = false;
    bool fail = false;       // oracle beat the design, or the shapes disagree
};

/// Run the oracle against the analytic plan for (T, M).  Flags failure when
/// the oracle undercuts the analytic energy by more than transcription
/// resolution or the control shapes deviate grossly.
inline ValidationReport compare_with_analytic(const PhaseModel& m, double T,
                                              std::optional<double> M,
                                              TranscriptionSpec spec = {},
                                              QuadratureSpec qspec = {}) {
    const PiecewisePlan plan = build_plan(m, M, T, qspec);
    const double e_analytic = plan_energy(plan, qspec);
    const TranscriptionResult oracle = brute_force_design(m, T, M, spec);

    // analytic control sampled at the oracle's interval midpoints, walking
    // the same discrete trajectory the oracle optimized over
    double max_dev = 0.0, max_amp = 0.0;
    for (int k = 0; k < spec.steps; ++k) {
        const double th_mid = 0.5 * (oracle.theta[k] + oracle.theta[k + 1]);
        const double ia = plan.control(std::clamp(th_mid, 0.0, two_pi));
        max_dev = std::max(max_dev, std::abs(ia - oracle.control[k]));
        max_amp = std::max(max_amp, std::abs(oracle.control[k]));
    }

    ValidationReport rep;
    rep.e_analytic = e_analytic;
    rep.e_oracle = oracle.energy;
    rep.rel_gap = (oracle.energy - e_analytic) / std::max(e_analytic, 1e-6);
    rep.max_dev = max_dev;
    rep.n = spec.steps;
    rep.converged = oracle.converged;
    const double undercut_tol =
        std::max(1e-6, 10.0 * e_analytic / static_cast<double>(spec.steps));
    rep.fail = (oracle.energy < e_analytic - undercut_tol) ||
               (max_dev > 0.2 * std::max(1.0, max_amp));
    return rep;
}

}  // namespace spikeopt
