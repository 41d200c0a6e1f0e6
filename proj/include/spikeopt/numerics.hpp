#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "spikeopt/errors.hpp"
#include "spikeopt/phase_model.hpp"

namespace spikeopt {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 1500;
};

struct RootSpec {
    double lo;
    double hi;
    double x_tol = 1e-12;
    double f_tol = 1e-10;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on (-1, 1).  Abscissae and weights
// from Piessens et al. (QUADPACK dqk15), 80-digit values truncated to double.
inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
    double integral;
    double err;
};

template <typename F>
GkEstimate gk15(F&& g, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = g(c);
    std::array<double, 7> fv1{}, fv2{};
    double resg = fc * gk15_wg[3];
    double resk = fc * gk15_wk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double x = h * gk15_x[j];
        fv1[j] = g(c - x);
        fv2[j] = g(c + x);
        resk += gk15_wk[j] * (fv1[j] + fv2[j]);
        resabs += gk15_wk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    }
    for (int j = 0; j < 3; ++j) resg += gk15_wg[j] * (fv1[2 * j + 1] + fv2[2 * j + 1]);
    const double reskh = 0.5 * resk;
    double resasc = gk15_wk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += gk15_wk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / eps50)
        err = std::max(err, eps50 * resabs);
    return {resk * h, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of g over [a, b].
/// Bisects the interval with the largest error estimate until the summed
/// estimate meets max(abs_tol, rel_tol*|result|); throws quadrature_error
/// (carrying the best estimate and bound) if max_subdivisions is exhausted.
template <typename F>
double adaptive_integral(F&& g, double a, double b, QuadratureSpec spec = {}) {
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0) || spec.max_subdivisions < 1)
        throw std::invalid_argument("bad quadrature spec");
    if (a > b) throw std::invalid_argument("adaptive_integral requires a <= b");
    if (a == b) return 0.0;

    struct Interval {
        double a, b, integral, err;
    };
    std::vector<Interval> segs;
    segs.reserve(64);
    auto first = detail::gk15(g, a, b);
    segs.push_back({a, b, first.integral, first.err});

    for (int n = 0; n < spec.max_subdivisions; ++n) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].integral;
            err += segs[i].err;
            if (segs[i].err > segs[worst].err) worst = i;
        }
        if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)))
            return total;
        const Interval w = segs[worst];
        const double mid = 0.5 * (w.a + w.b);
        if (mid == w.a || mid == w.b)
            throw quadrature_error(total, err);  // interval at rounding limit
        auto left = detail::gk15(g, w.a, mid);
        auto right = detail::gk15(g, mid, w.b);
        segs[worst] = {w.a, mid, left.integral, left.err};
        segs.push_back({mid, w.b, right.integral, right.err});
    }
    double total = 0.0, err = 0.0;
    for (const auto& s : segs) {
        total += s.integral;
        err += s.err;
    }
    throw quadrature_error(total, err);
}

/// Root of a continuous monotone residual inside a sign-changing bracket.
/// Clipped secant steps alternate with bisection, so the bracket width at
/// least halves every two iterations and convergence is guaranteed.
template <typename F>
double solve_monotone(F&& residual, RootSpec spec) {
    double lo = spec.lo, hi = spec.hi;
    if (!(lo < hi)) throw std::invalid_argument("root bracket requires lo < hi");
    double flo = residual(lo);
    double fhi = residual(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) throw bracket_error(flo, fhi);

    for (int it = 0; it < 220 && hi - lo > spec.x_tol; ++it) {
        double s;
        if (it % 2 == 0) {
            s = lo - flo * (hi - lo) / (fhi - flo);
            const double margin = 0.01 * (hi - lo);
            if (!(s > lo + margin) || !(s < hi - margin)) s = 0.5 * (lo + hi);
        } else {
            s = 0.5 * (lo + hi);
        }
        if (s <= lo || s >= hi) break;  // bracket at rounding limit
        const double fs = residual(s);
        if (fs == 0.0) return s;
        if (std::signbit(fs) == std::signbit(flo)) {
            lo = s;
            flo = fs;
        } else {
            hi = s;
            fhi = fs;
        }
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

namespace detail {

struct Rk4Step {
    double theta_next;
    double slope_begin;
};

template <typename V>
Rk4Step rk4_step(V&& v, double t, double theta, double h) {
    const double k1 = v(t, theta);
    const double k2 = v(t + 0.5 * h, theta + 0.5 * h * k1);
    const double k3 = v(t + 0.5 * h, theta + 0.5 * h * k2);
    const double k4 = v(t + h, theta + h * k3);
    return {theta + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1};
}

// Cubic Hermite interpolant through (0, y0, m0) and (h, y1, m1) at s in [0, h].
inline double hermite(double s, double h, double y0, double m0, double y1, double m1) {
    const double u = s / h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * m0 +
           (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * m1;
}

}  // namespace detail

struct SpikePath {
    std::vector<double> t;
    std::vector<double> theta;
    double t_spike = 0.0;
};

/// Integrate d(theta)/dt = velocity(t, theta) from theta0 until the phase
/// first crosses 2*pi, with a fixed RK4 step.  The crossing is refined by
/// bisection on the cubic Hermite interpolant of the final step, keeping the
/// spike time at the scheme's O(step^4) accuracy.  Throws
/// spike_timeout_error if the phase has not reached 2*pi by t_max.
template <typename V>
SpikePath integrate_until_spike(V&& velocity, double theta0, double t_max, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
    SpikePath path;
    path.t.push_back(0.0);
    path.theta.push_back(theta0);
    double t = 0.0, theta = theta0;
    while (t < t_max) {
        const double h = std::min(step, t_max - t);
        const auto s = detail::rk4_step(velocity, t, theta, h);
        if (s.theta_next >= two_pi) {
            const double m1 = velocity(t + h, s.theta_next);
            double a = 0.0, b = h;
            for (int i = 0; i < 80 && b - a > 1e-16 * std::max(1.0, h); ++i) {
                const double mid = 0.5 * (a + b);
                const double val =
                    detail::hermite(mid, h, theta, s.slope_begin, s.theta_next, m1);
                (val < two_pi ? a : b) = mid;
            }
            path.t_spike = t + 0.5 * (a + b);
            path.t.push_back(path.t_spike);
            path.theta.push_back(two_pi);
            return path;
        }
        t += h;
        theta = s.theta_next;
        path.t.push_back(t);
        path.theta.push_back(theta);
    }
    throw spike_timeout_error(theta);
}

}  // namespace spikeopt
