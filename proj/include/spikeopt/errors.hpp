#pragma once

#include <stdexcept>
#include <string>

namespace spikeopt {

// Base class for every failure this library reports.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// lambda0 at or beyond the model's feasibility limit: the optimal-speed
// radicand touches zero and a full revolution is impossible.
struct infeasible_costate_error : error {
    double lambda0;
    double limit;
    infeasible_costate_error(double l0, double lim)
        : error("infeasible costate lambda0=" + std::to_string(l0) +
                " (limit " + std::to_string(lim) + ")"),
          lambda0(l0), limit(lim) {}
};

// Requested spiking time lies outside the attainable range.
struct infeasible_time_error : error {
    double requested;
    double attainable_lo;
    double attainable_hi;
    infeasible_time_error(double t, double lo, double hi)
        : error("spiking time " + std::to_string(t) +
                " outside attainable range [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]"),
          requested(t), attainable_lo(lo), attainable_hi(hi) {}
};

// Root bracket does not straddle a sign change.
struct bracket_error : error {
    double f_lo;
    double f_hi;
    bracket_error(double flo, double fhi)
        : error("no sign change in bracket: f(lo)=" + std::to_string(flo) +
                ", f(hi)=" + std::to_string(fhi)),
          f_lo(flo), f_hi(fhi) {}
};

// Adaptive quadrature ran out of subdivisions; carries the best estimate.
struct quadrature_error : error {
    double estimate;
    double error_bound;
    quadrature_error(double est, double bound)
        : error("quadrature did not converge: estimate=" + std::to_string(est) +
                " error bound=" + std::to_string(bound)),
          estimate(est), error_bound(bound) {}
};

// The phase failed to reach 2*pi before t_max.
struct spike_timeout_error : error {
    double final_theta;
    explicit spike_timeout_error(double th)
        : error("phase did not reach 2*pi; stalled at theta=" + std::to_string(th)),
          final_theta(th) {}
};

// lambda0 does not push the analytic control past the amplitude bound, so
// there is no saturated arc to switch into.
struct no_saturation_error : error {
    using error::error;
};

// Wrong switching direction for the requested spiking time.
struct regime_error : error {
    using error::error;
};

}  // namespace spikeopt
