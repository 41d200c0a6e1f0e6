#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "spikeopt/bounded.hpp"
#include "spikeopt/errors.hpp"
#include "spikeopt/format.hpp"
#include "spikeopt/numerics.hpp"

namespace spikeopt {

struct TrajectorySample {
    double t;
    double theta;
    double lambda;
    double current;
};

/// Closed-loop record of one spike: (t, theta, lambda, I) at every step,
/// the refined spike time, and the consumed power integral.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double spike_time = 0.0;
    double energy = 0.0;
};

struct SimulationConfig {
    double step = 0.0;       // <= 0: pick spike_time/1e4 from the plan
    double event_tol = 1e-10;
    double t_max = 0.0;      // <= 0: 1.5 * expected spike time
};

/// Execute a plan as feedback in theta: integrate d(theta)/dt = speed(theta)
/// and dE/dt = I(theta)^2 with fixed-step RK4, stopping at theta = 2*pi with
/// the crossing refined inside the final step.  Deterministic for fixed
/// inputs.  Throws spike_timeout_error (with the stall phase) if theta never
/// gets there.
inline Trajectory simulate_plan(const PiecewisePlan& plan, SimulationConfig cfg = {},
                                QuadratureSpec spec = {}) {
    double expected = 0.0;
    if (cfg.step <= 0.0 || cfg.t_max <= 0.0) expected = plan_spike_time(plan, spec);
    const double step = cfg.step > 0.0 ? cfg.step : expected / 1e4;
    const double t_max = cfg.t_max > 0.0 ? cfg.t_max : 1.5 * expected + 10.0 * step;

    auto rate = [&](double th) { return plan.speed(std::min(th, two_pi)); };
    auto power = [&](double th) {
        const double c = plan.control(std::min(th, two_pi));
        return c * c;
    };
    // one RK4 step of the (theta, E) pair
    auto advance = [&](double th, double en, double h, double& th_out, double& en_out,
                       double& slope0) {
        const double k1 = rate(th), p1 = power(th);
        const double t2 = th + 0.5 * h * k1;
        const double k2 = rate(t2), p2 = power(t2);
        const double t3 = th + 0.5 * h * k2;
        const double k3 = rate(t3), p3 = power(t3);
        const double t4 = th + h * k3;
        const double k4 = rate(t4), p4 = power(t4);
        th_out = th + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        en_out = en + h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
        slope0 = k1;
    };

    Trajectory traj;
    double t = 0.0, theta = 0.0, energy = 0.0;
    traj.samples.push_back({0.0, 0.0, plan.costate(0.0), plan.control(0.0)});
    while (t < t_max) {
        double th_next, en_next, m0;
        advance(theta, energy, step, th_next, en_next, m0);
        if (th_next >= two_pi) {
            const double m1 = rate(th_next);
            double a = 0.0, b = step;
            const double width_tol = std::min(cfg.event_tol, 1e-10) * step;
            for (int it = 0; it < 80 && b - a > width_tol; ++it) {
                const double mid = 0.5 * (a + b);
                (detail::hermite(mid, step, theta, m0, th_next, m1) < two_pi ? a : b) = mid;
            }
            const double h_ev = 0.5 * (a + b);
            advance(theta, energy, h_ev, th_next, en_next, m0);
            traj.spike_time = t + h_ev;
            traj.energy = en_next;
            traj.samples.push_back(
                {traj.spike_time, two_pi, plan.costate(two_pi), plan.control(two_pi)});
            return traj;
        }
        t += step;
        theta = th_next;
        energy = en_next;
        traj.samples.push_back({t, theta, plan.costate(theta), plan.control(theta)});
    }
    throw spike_timeout_error(theta);
}

/// Power integral recomputed from the samples alone: composite Simpson on
/// sample triples (spacing-aware), trapezoid on a leftover final interval.
inline double trajectory_energy(const Trajectory& traj) {
    const auto& s = traj.samples;
    if (s.empty()) throw std::invalid_argument("empty trajectory");
    auto sq = [](double x) { return x * x; };
    double total = 0.0;
    std::size_t i = 0;
    while (i + 2 < s.size()) {
        const double h0 = s[i + 1].t - s[i].t;
        const double h1 = s[i + 2].t - s[i + 1].t;
        const double f0 = sq(s[i].current), f1 = sq(s[i + 1].current),
                     f2 = sq(s[i + 2].current);
        total += (h0 + h1) / 6.0 *
                 ((2.0 - h1 / h0) * f0 + sq(h0 + h1) / (h0 * h1) * f1 +
                  (2.0 - h0 / h1) * f2);
        i += 2;
    }
    if (i + 1 < s.size())
        total += 0.5 * (s[i + 1].t - s[i].t) * (sq(s[i].current) + sq(s[i + 1].current));
    return total;
}

/// CSV with columns exactly `t,theta,lambda,current`, one row per sample,
/// 17-significant-digit floats.
inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,theta,lambda,current\n";
    for (const auto& s : traj.samples) {
        out += detail::g17(s.t);
        out += ',';
        out += detail::g17(s.theta);
        out += ',';
        out += detail::g17(s.lambda);
        out += ',';
        out += detail::g17(s.current);
        out += '\n';
    }
    return out;
}

inline std::string trajectory_json(const Trajectory& traj) {
    std::string out = "{\"samples\":[";
    bool first = true;
    for (const auto& s : traj.samples) {
        if (!first) out += ',';
        first = false;
        out += "{\"t\":" + detail::g17(s.t) + ",\"theta\":" + detail::g17(s.theta) +
               ",\"lambda\":" + detail::g17(s.lambda) +
               ",\"current\":" + detail::g17(s.current) + "}";
    }
    out += "],\"spike_time\":" + detail::g17(traj.spike_time) +
           ",\"energy\":" + detail::g17(traj.energy) + "}";
    return out;
}

/// Inverse of trajectory_csv, for round-tripping exported data.
inline Trajectory parse_trajectory_csv(std::string_view text) {
    Trajectory traj;
    std::size_t pos = text.find('\n');
    if (pos == std::string_view::npos || text.substr(0, pos) != "t,theta,lambda,current")
        throw error("bad trajectory CSV header");
    ++pos;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        TrajectorySample s{};
        double* fields[4] = {&s.t, &s.theta, &s.lambda, &s.current};
        std::size_t start = 0;
        for (int k = 0; k < 4; ++k) {
            std::size_t comma = k < 3 ? line.find(',', start) : line.size();
            if (comma == std::string_view::npos) throw error("bad trajectory CSV row");
            const char* b = line.data() + start;
            const char* e = line.data() + comma;
            if (std::from_chars(b, e, *fields[k]).ec != std::errc{})
                throw error("bad float in trajectory CSV");
            start = comma + 1;
        }
        traj.samples.push_back(s);
    }
    if (!traj.samples.empty()) traj.spike_time = traj.samples.back().t;
    traj.energy = traj.samples.size() > 1 ? trajectory_energy(traj) : 0.0;
    return traj;
}

}  // namespace spikeopt
