#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "spikeopt/errors.hpp"
#include "spikeopt/numerics.hpp"
#include "spikeopt/phase_model.hpp"
#include "spikeopt/unbounded.hpp"

namespace spikeopt {

constexpr double infinite_time = std::numeric_limits<double>::infinity();

/// Feasible spiking-time window under |I| <= M and its split into switched
/// and purely analytic regimes:
///   t_bang_min < t_analytic_min <= 2*pi/w <= t_analytic_max <= t_bang_max,
/// where the two maxima are finite iff M < w/(zd*Smax).
struct SpikeTimeBounds {
    double t_bang_min;
    double t_analytic_min;
    double t_analytic_max;
    double t_bang_max;
    double bound;
};

struct infeasible_window_error : error {
    SpikeTimeBounds bounds;
    double requested;
    infeasible_window_error(double T, const SpikeTimeBounds& b)
        : error("spiking time " + std::to_string(T) + " outside feasible window [" +
                std::to_string(b.t_bang_min) + ", " + std::to_string(b.t_bang_max) + "]"),
          bounds(b), requested(T) {}
};

enum class Regime { Infeasible, FastSwitched, AnalyticOnly, SlowSwitched };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Infeasible: return "infeasible";
        case Regime::FastSwitched: return "fast_switched";
        case Regime::AnalyticOnly: return "analytic_only";
        case Regime::SlowSwitched: return "slow_switched";
    }
    return "?";
}

enum class Direction { Fast, Slow };

/// Spiking times of the two bang-bang extremes: the time-optimal control
/// sgn(Z)*M and its slow mirror -sgn(Z)*M.  Both are computed by quadrature
/// of 1/speed; the slow one is +infinity once M*max|Z| reaches w.
inline std::pair<double, double> bang_bang_extremes(const PhaseModel& m, double M,
                                                    QuadratureSpec spec = {}) {
    detail::require_reduced(m);
    if (!(M > 0.0)) throw std::invalid_argument("amplitude bound must be > 0");
    const double w = m.omega();
    const double t_min = detail::symmetric_period_integral(
        m, [&](double th) { return 1.0 / (w + M * m.zd() * m.prc_shape(th)); }, spec);
    if (w - M * m.zd() * m.prc_shape_max() <= 0.0) return {t_min, infinite_time};
    const double t_max = detail::symmetric_period_integral(
        m, [&](double th) { return 1.0 / (w - M * m.zd() * m.prc_shape(th)); }, spec);
    return {t_min, t_max};
}

/// Costates at which the analytic law first touches the bound at the PRC
/// peak: fast side solves I*(peak) = M, slow side I*(peak) = -M.  The slow
/// limit exists only for M < w/(zd*Smax).
struct SaturationLimits {
    double fast;
    std::optional<double> slow;
};

inline SaturationLimits lambda0_saturation_limits(const PhaseModel& m, double M) {
    detail::require_reduced(m);
    if (!(M > 0.0)) throw std::invalid_argument("amplitude bound must be > 0");
    const double w = m.omega(), z = m.zd(), s = m.prc_shape_max();
    const double zms = z * M * s;
    const double fast = -((w + zms) * (w + zms) - w * w) / (w * z * z * s * s);
    SaturationLimits out{fast, std::nullopt};
    if (M < w / (z * s))
        out.slow = (w * w - (w - zms) * (w - zms)) / (w * z * z * s * s);
    return out;
}

/// Shortest and longest spiking times reachable by the analytic law alone
/// under the bound: the period map evaluated at the saturation costates.
inline std::pair<double, double> analytic_time_window(const PhaseModel& m, double M,
                                                      QuadratureSpec spec = {}) {
    const auto lims = lambda0_saturation_limits(m, M);
    const double t_min = spike_time(m, lims.fast, spec);
    if (!lims.slow) return {t_min, infinite_time};
    return {t_min, spike_time(m, *lims.slow, spec)};
}

inline SpikeTimeBounds spike_time_bounds(const PhaseModel& m, double M,
                                         QuadratureSpec spec = {}) {
    const auto [bang_min, bang_max] = bang_bang_extremes(m, M, spec);
    const auto [an_min, an_max] = analytic_time_window(m, M, spec);
    return {bang_min, an_min, an_max, bang_max, M};
}

/// Which control family reaches T under the bound.  Boundary memberships:
/// [t_bang_min, t_analytic_min) fast, [t_analytic_min, t_analytic_max]
/// analytic, (t_analytic_max, t_bang_max] slow.
inline Regime classify_target(const SpikeTimeBounds& b, double T) {
    if (T < b.t_bang_min || T > b.t_bang_max) return Regime::Infeasible;
    if (T < b.t_analytic_min) return Regime::FastSwitched;
    if (T <= b.t_analytic_max) return Regime::AnalyticOnly;
    return Regime::SlowSwitched;
}

inline Regime classify_target(const PhaseModel& m, double M, double T,
                              QuadratureSpec spec = {}) {
    if (!(T > 0.0)) throw std::invalid_argument("spiking time must be > 0");
    return classify_target(spike_time_bounds(m, M, spec), T);
}

/// Phases where the analytic law meets the bound, ordered.  Sinusoidal plans
/// switch four times with reflection symmetry (t1, pi-t1, pi+t1, 2pi-t1);
/// sniper plans twice, symmetric about pi.  At the saturation limit the
/// angles coalesce at the PRC peak.
inline std::vector<double> switching_angles(const PhaseModel& m, double M,
                                            double lambda0, Direction dir) {
    detail::require_reduced(m);
    if (!(M > 0.0)) throw std::invalid_argument("amplitude bound must be > 0");
    const double w = m.omega(), z = m.zd();
    const auto lims = lambda0_saturation_limits(m, M);
    constexpr double slack = 1e-12;
    if (dir == Direction::Fast) {
        if (lambda0 > lims.fast * (1.0 - slack) + slack)
            throw no_saturation_error("analytic control stays below +M for this lambda0");
    } else {
        if (!lims.slow)
            throw no_saturation_error("no slow saturation: bound admits arbitrarily slow spiking");
        if (lambda0 < *lims.slow * (1.0 - slack) - slack)
            throw no_saturation_error("analytic control stays above -M for this lambda0");
    }

    // principal solution of I*(theta) = +-M from the first-integral algebra
    const double denom = z * (M * M + w * lambda0);
    const double ratio = (dir == Direction::Fast ? -2.0 : 2.0) * M * w / denom;
    std::vector<double> angles;
    if (m.kind() == PrcKind::Sinusoidal) {
        const double s1 = std::min(1.0, ratio);
        const double t1 = std::asin(s1);
        angles = {t1, std::numbers::pi - t1, std::numbers::pi + t1, two_pi - t1};
    } else {
        const double y1 = std::min(2.0, ratio);
        const double t1 = std::acos(1.0 - y1);
        angles = {t1, two_pi - t1};
    }

    // the law must meet the bound continuously at every angle
    const double want = dir == Direction::Fast ? M : -M;
    for (double a : angles) {
        const double c = detail::control_local(m, lambda0, a);
        if (std::abs(c - want) > 1e-8 * std::max(1.0, M))
            throw error("switching angle failed the continuity check");
    }
    return angles;
}

namespace detail {

// Saturated-arc speed w + Z(theta)*(+-M).
inline double saturated_speed(const PhaseModel& m, double M, int sign, double theta) {
    return m.omega() + m.Z(theta) * (sign > 0 ? M : -M);
}

// Traversal time of a switched plan, using its reflection symmetry: one
// analytic arc [0, t_sw] plus one saturated arc [t_sw, peak], scaled by the
// number of congruent pieces (4 sinusoidal quarters, 2 sniper halves).
inline double switched_time(const PhaseModel& m, double M, double lambda0,
                            Direction dir, double t_sw, QuadratureSpec spec) {
    const int sign = dir == Direction::Fast ? +1 : -1;
    const double fold = m.kind() == PrcKind::Sinusoidal ? 4.0 : 2.0;
    const double peak = m.prc_peak();
    const double analytic = adaptive_integral(
        [&](double th) { return 1.0 / speed_local(m, lambda0, th); }, 0.0, t_sw, spec);
    const double saturated = adaptive_integral(
        [&](double th) { return 1.0 / saturated_speed(m, M, sign, th); }, t_sw, peak,
        spec);
    return fold * (analytic + saturated);
}

}  // namespace detail

/// Spiking time of the switched plan parameterized by lambda0.
inline double bounded_spike_time(const PhaseModel& m, double M, double lambda0,
                                 Direction dir, QuadratureSpec spec = {}) {
    const double t_sw = switching_angles(m, M, lambda0, dir).front();
    return detail::switched_time(m, M, lambda0, dir, t_sw, spec);
}

/// Invert the switched-plan period map for T in the matching switched
/// regime.  The map is monotone increasing in lambda0 on both branches.
inline double bounded_lambda0_for_spike_time(const PhaseModel& m, double M, double T,
                                             Direction dir, QuadratureSpec spec = {}) {
    const auto bounds = spike_time_bounds(m, M, spec);
    const auto lims = lambda0_saturation_limits(m, M);
    const double tol = 1e-9 * std::max(1.0, T);

    auto time_at = [&](double l0) { return bounded_spike_time(m, M, l0, dir, spec); };

    if (dir == Direction::Fast) {
        if (!(T >= bounds.t_bang_min - tol && T <= bounds.t_analytic_min + tol))
            throw regime_error("spiking time belongs to the " +
                               std::string(to_string(classify_target(bounds, T))) +
                               " regime, not fast_switched");
        if (T >= bounds.t_analytic_min - tol) return lims.fast;
        double hi = lims.fast;
        double lo = hi * 2.0;
        const double cap = hi * 1e12;
        while (time_at(lo) > T) {
            lo *= 8.0;
            if (lo < cap) return cap;  // plan is bang-bang to working precision
        }
        RootSpec rs{lo, hi, 1e-13 * std::max(1.0, std::abs(lo)), 1e-9};
        return solve_monotone([&](double l0) { return time_at(l0) - T; }, rs);
    }

    if (!lims.slow)
        throw regime_error("no slow_switched regime for this bound");
    if (!(T >= bounds.t_analytic_max - tol && T <= bounds.t_bang_max + tol))
        throw regime_error("spiking time belongs to the " +
                           std::string(to_string(classify_target(bounds, T))) +
                           " regime, not slow_switched");
    if (T <= bounds.t_analytic_max + tol) return *lims.slow;
    double lo = *lims.slow;
    double hi = std::max(2.0 * lo, 1.0);
    const double cap = std::max(lo, 1.0) * 1e12;
    while (time_at(hi) < T) {
        hi *= 8.0;
        if (hi > cap) return cap;
    }
    RootSpec rs{lo, hi, 1e-13 * std::max(1.0, std::abs(hi)), 1e-9};
    return solve_monotone([&](double l0) { return time_at(l0) - T; }, rs);
}

/// One control arc over a phase interval: the analytic law or a saturated
/// value.
struct ControlSegment {
    enum class Kind { Analytic, SatPlus, SatMinus };
    double from;
    double to;
    Kind kind;
};

inline const char* to_string(ControlSegment::Kind k) {
    switch (k) {
        case ControlSegment::Kind::Analytic: return "analytic";
        case ControlSegment::Kind::SatPlus: return "sat+";
        case ControlSegment::Kind::SatMinus: return "sat-";
    }
    return "?";
}

/// Ordered control arcs partitioning [0, 2*pi], with the costate seed and
/// bound that generate them.  Control is continuous at every junction.
struct PiecewisePlan {
    PhaseModel model;
    std::optional<double> bound;
    double lambda0 = 0.0;
    std::vector<ControlSegment> segments;

    const ControlSegment& segment_at(double theta) const {
        for (const auto& s : segments)
            if (theta < s.to || &s == &segments.back()) return s;
        return segments.back();
    }

    double control(double theta) const {
        const auto& s = segment_at(theta);
        switch (s.kind) {
            case ControlSegment::Kind::SatPlus: return *bound;
            case ControlSegment::Kind::SatMinus: return -*bound;
            default: return detail::control_local(model, lambda0, theta);
        }
    }

    double speed(double theta) const {
        const auto& s = segment_at(theta);
        switch (s.kind) {
            case ControlSegment::Kind::SatPlus:
                return detail::saturated_speed(model, *bound, +1, theta);
            case ControlSegment::Kind::SatMinus:
                return detail::saturated_speed(model, *bound, -1, theta);
            default: return detail::speed_local(model, lambda0, theta);
        }
    }

    // Costate along the plan: the quadratic-branch value on analytic arcs and
    // (H - M^2)/speed on saturated arcs, H = w*lambda0; continuous throughout.
    double costate(double theta) const {
        const auto& s = segment_at(theta);
        if (s.kind == ControlSegment::Kind::Analytic)
            return detail::costate_local(model, lambda0, theta);
        const double M = *bound;
        return (model.omega() * lambda0 - M * M) / speed(theta);
    }

    std::vector<double> interior_switches() const {
        std::vector<double> out;
        for (std::size_t i = 1; i < segments.size(); ++i)
            out.push_back(segments[i].from);
        return out;
    }
};

/// Assemble the minimum-power plan for target time T: the analytic law when
/// it fits under the bound, a switched plan otherwise, and an
/// infeasible_window_error carrying the window when T cannot be reached.
inline PiecewisePlan build_plan(const PhaseModel& m, std::optional<double> M, double T,
                                QuadratureSpec spec = {}) {
    detail::require_reduced(m);
    if (!(T > 0.0)) throw std::invalid_argument("spiking time must be > 0");
    using K = ControlSegment::Kind;

    if (!M) {
        const double l0 = lambda0_for_spike_time(m, T, spec);
        return {m, std::nullopt, l0, {{0.0, two_pi, K::Analytic}}};
    }
    if (!(*M > 0.0)) throw std::invalid_argument("amplitude bound must be > 0");

    const auto bounds = spike_time_bounds(m, *M, spec);
    switch (classify_target(bounds, T)) {
        case Regime::Infeasible:
            throw infeasible_window_error(T, bounds);
        case Regime::AnalyticOnly: {
            const double l0 = lambda0_for_spike_time(m, T, spec);
            return {m, M, l0, {{0.0, two_pi, K::Analytic}}};
        }
        case Regime::FastSwitched: {
            const double l0 = bounded_lambda0_for_spike_time(m, *M, T, Direction::Fast, spec);
            const auto a = switching_angles(m, *M, l0, Direction::Fast);
            if (m.kind() == PrcKind::Sinusoidal)
                return {m, M, l0,
                        {{0.0, a[0], K::Analytic},
                         {a[0], a[1], K::SatPlus},
                         {a[1], a[2], K::Analytic},
                         {a[2], a[3], K::SatMinus},
                         {a[3], two_pi, K::Analytic}}};
            return {m, M, l0,
                    {{0.0, a[0], K::Analytic},
                     {a[0], a[1], K::SatPlus},
                     {a[1], two_pi, K::Analytic}}};
        }
        case Regime::SlowSwitched: {
            const double l0 = bounded_lambda0_for_spike_time(m, *M, T, Direction::Slow, spec);
            const auto a = switching_angles(m, *M, l0, Direction::Slow);
            if (m.kind() == PrcKind::Sinusoidal)
                return {m, M, l0,
                        {{0.0, a[0], K::Analytic},
                         {a[0], a[1], K::SatMinus},
                         {a[1], a[2], K::Analytic},
                         {a[2], a[3], K::SatPlus},
                         {a[3], two_pi, K::Analytic}}};
            return {m, M, l0,
                    {{0.0, a[0], K::Analytic},
                     {a[0], a[1], K::SatMinus},
                     {a[1], two_pi, K::Analytic}}};
        }
    }
    throw error("unreachable");
}

/// Traversal time of a plan, segment-by-segment quadrature of 1/speed.
inline double plan_spike_time(const PiecewisePlan& p, QuadratureSpec spec = {}) {
    double total = 0.0;
    for (const auto& s : p.segments)
        total += adaptive_integral([&](double th) { return 1.0 / p.speed(th); }, s.from,
                                   s.to, spec);
    return total;
}

/// Power cost of a plan, segment-by-segment quadrature of I^2/speed.
inline double plan_energy(const PiecewisePlan& p, QuadratureSpec spec = {}) {
    double total = 0.0;
    for (const auto& s : p.segments)
        total += adaptive_integral(
            [&](double th) {
                const double c = p.control(th);
                return c * c / p.speed(th);
            },
            s.from, s.to, spec);
    return total;
}

}  // namespace spikeopt
