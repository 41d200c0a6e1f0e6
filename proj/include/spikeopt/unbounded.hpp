#pragma once

#include <cmath>

#include "spikeopt/errors.hpp"
#include "spikeopt/numerics.hpp"
#include "spikeopt/phase_model.hpp"

namespace spikeopt {

namespace detail {

inline void require_reduced(const PhaseModel& m) {
    if (m.kind() == PrcKind::ThetaNeuron)
        throw std::invalid_argument(
            "design routines take sinusoidal/sniper models; reduce the theta "
            "neuron with theta_to_sniper first");
}

// Radicand of the extremal phase speed, w^2 - w l0 zd^2 S(theta)^2.
inline double speed_radicand(const PhaseModel& m, double lambda0, double theta) {
    const double s = m.prc_shape(theta);
    const double w = m.omega();
    return w * w - w * lambda0 * m.zd() * m.zd() * s * s;
}

// Extremal speed with only a local positivity check: on switched plans the
// costate may exceed the global feasibility limit while the analytic arcs
// stay clear of the PRC peak.
inline double speed_local(const PhaseModel& m, double lambda0, double theta) {
    const double r = speed_radicand(m, lambda0, theta);
    if (!(r > 0.0))
        throw infeasible_costate_error(lambda0, m.omega() / (m.zd() * m.zd()));
    return std::sqrt(r);
}

// I* = (-w + sqrt(w^2 - w l0 zd^2 S^2)) / (zd S) evaluated through the
// conjugate so the w - sqrt(...) cancellation never happens:
// with x = l0 zd^2 S^2 / w,  I* = -l0 zd S / (1 + sqrt(1 - x)).  The zero of
// S is removable and this form lands on the limit exactly.
inline double control_local(const PhaseModel& m, double lambda0, double theta) {
    const double s = m.prc_shape(theta);
    const double w = m.omega();
    const double zd = m.zd();
    const double x = lambda0 * zd * zd * s * s / w;
    if (!(x < 1.0)) throw infeasible_costate_error(lambda0, w / (zd * zd));
    return -lambda0 * zd * s / (1.0 + std::sqrt(1.0 - x));
}

// Same treatment: lambda = 2(w - sqrt(...)) / (zd S)^2 = 2 l0 / (1 + sqrt(1-x)),
// which hits lambda(0) = lambda0 exactly.
inline double costate_local(const PhaseModel& m, double lambda0, double theta) {
    const double s = m.prc_shape(theta);
    const double zd = m.zd();
    const double x = lambda0 * zd * zd * s * s / m.omega();
    if (!(x < 1.0)) throw infeasible_costate_error(lambda0, m.omega() / (zd * zd));
    return 2.0 * lambda0 / (1.0 + std::sqrt(1.0 - x));
}

// Integrate g over [0, 2*pi] exploiting the integrand's symmetry: every
// design integrand depends on theta through S(theta)^2, which has quarter
// symmetry for sin and half symmetry for 1-cos.  A quadrature failure is
// rethrown with the fold applied so the carried estimate stays meaningful.
template <typename F>
double symmetric_period_integral(const PhaseModel& m, F&& g, QuadratureSpec spec) {
    const double fold = m.kind() == PrcKind::Sinusoidal ? 4.0 : 2.0;
    const double half = m.kind() == PrcKind::Sinusoidal ? 0.5 * std::numbers::pi
                                                        : std::numbers::pi;
    try {
        return fold * adaptive_integral(g, 0.0, half, spec);
    } catch (const quadrature_error& e) {
        throw quadrature_error(fold * e.estimate, fold * e.error_bound);
    }
}

}  // namespace detail

/// Largest admissible lambda0: beyond it the optimal-speed radicand touches
/// zero at the PRC peak and a full revolution is impossible.
inline double feasibility_limit(const PhaseModel& m) {
    detail::require_reduced(m);
    const double smax = m.prc_shape_max();
    return m.omega() / (m.zd() * m.zd() * smax * smax);
}

/// Extremal phase speed sqrt(w^2 - w lambda0 zd^2 S^2); strictly positive for
/// feasible lambda0.
inline double optimal_phase_speed(const PhaseModel& m, double lambda0, double theta) {
    detail::require_reduced(m);
    if (lambda0 >= feasibility_limit(m))
        throw infeasible_costate_error(lambda0, feasibility_limit(m));
    return detail::speed_local(m, lambda0, theta);
}

/// Minimum-power feedback law I*(theta); the removable singularity at
/// Z(theta) = 0 evaluates through a series so I*(0) = 0 exactly.
inline double feedback_control(const PhaseModel& m, double lambda0, double theta) {
    detail::require_reduced(m);
    if (lambda0 >= feasibility_limit(m))
        throw infeasible_costate_error(lambda0, feasibility_limit(m));
    return detail::control_local(m, lambda0, theta);
}

/// Extremal costate lambda(theta) on the positive-speed branch;
/// lambda(0) = lambda0 and 2 I* + lambda Z = 0 hold identically.
inline double costate(const PhaseModel& m, double lambda0, double theta) {
    detail::require_reduced(m);
    if (lambda0 >= feasibility_limit(m))
        throw infeasible_costate_error(lambda0, feasibility_limit(m));
    return detail::costate_local(m, lambda0, theta);
}

/// Spiking time T(lambda0) = integral of 1/speed over one revolution;
/// monotone increasing in lambda0.
inline double spike_time(const PhaseModel& m, double lambda0, QuadratureSpec spec = {}) {
    detail::require_reduced(m);
    if (lambda0 >= feasibility_limit(m))
        throw infeasible_costate_error(lambda0, feasibility_limit(m));
    return detail::symmetric_period_integral(
        m, [&](double th) { return 1.0 / detail::speed_local(m, lambda0, th); }, spec);
}

/// Minimum power E(lambda0) = integral of I*(theta)^2 / speed.
inline double design_energy(const PhaseModel& m, double lambda0, QuadratureSpec spec = {}) {
    detail::require_reduced(m);
    if (lambda0 >= feasibility_limit(m))
        throw infeasible_costate_error(lambda0, feasibility_limit(m));
    return detail::symmetric_period_integral(
        m,
        [&](double th) {
            const double c = detail::control_local(m, lambda0, th);
            return c * c / detail::speed_local(m, lambda0, th);
        },
        spec);
}

/// dE/dT along the extremal family equals the Hamiltonian constant w*lambda0.
inline double energy_sensitivity(const PhaseModel& m, double lambda0) {
    detail::require_reduced(m);
    return m.omega() * lambda0;
}

/// Invert the period map: the lambda0 whose optimal trajectory spikes at T.
/// Throws infeasible_time_error with the numerically attainable range when T
/// cannot be reached (the supremum is resolved by quadrature, not a formula).
inline double lambda0_for_spike_time(const PhaseModel& m, double T,
                                     QuadratureSpec spec = {}) {
    detail::require_reduced(m);
    if (!(T > 0.0)) throw std::invalid_argument("spiking time must be > 0");
    const double limit = feasibility_limit(m);
    const double hi_cap = limit - 1e-12 * m.omega() / (m.zd() * m.zd());
    const double natural = m.natural_period();

    // Next to the cap the period integral develops a boundary layer of
    // width ~1e-6; if the quadrature gives up there, its best estimate
    // (bound ~1e-4) is still far more accurate than the scale on which
    // feasibility is decided.
    auto time_at = [&](double l0) {
        try {
            return spike_time(m, l0, spec);
        } catch (const quadrature_error& e) {
            return e.estimate;
        }
    };

    double lo, hi;
    if (T >= natural) {
        lo = 0.0;
        hi = hi_cap;
        if (T > natural && time_at(hi) < T)
            throw infeasible_time_error(T, 0.0, time_at(hi));
    } else {
        hi = 0.0;
        lo = -limit;
        const double lo_cap = -1e15 * std::max(1.0, limit);
        while (time_at(lo) > T) {
            lo *= 8.0;
            if (lo < lo_cap) throw infeasible_time_error(T, time_at(lo), natural);
        }
    }
    RootSpec rs{lo, hi, 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)}), 1e-9};
    return solve_monotone([&](double l0) { return time_at(l0) - T; }, rs);
}

/// The (lambda0, T, E) triple of an analytic minimum-power design.
struct UnboundedDesign {
    PhaseModel model;
    double lambda0;
    double T;
    double E;
};

inline UnboundedDesign design_unbounded(const PhaseModel& m, double T,
                                        QuadratureSpec spec = {}) {
    const double l0 = lambda0_for_spike_time(m, T, spec);
    return {m, l0, T, design_energy(m, l0, spec)};
}

}  // namespace spikeopt
