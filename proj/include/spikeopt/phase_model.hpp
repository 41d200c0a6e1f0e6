#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace spikeopt {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class PrcKind { Sinusoidal, Sniper, ThetaNeuron };

inline const char* to_string(PrcKind k) {
    switch (k) {
        case PrcKind::Sinusoidal: return "sinusoidal";
        case PrcKind::Sniper: return "sniper";
        case PrcKind::ThetaNeuron: return "theta";
    }
    return "?";
}

/// Phase-reduced oscillator  d(theta)/dt = f(theta) + Z(theta) I(t),
/// spiking at theta = 2*pi.  Three PRC families:
///
///   sinusoidal:  f = omega,                        Z = zd sin(theta)
///   sniper:      f = omega,                        Z = zd (1 - cos(theta))
///   theta:       f = 1 + cos + zd (1-cos) I_b,     Z = zd (1 - cos(theta))
///
/// Instances are immutable values; parameter domains are checked once here
/// so the design routines can assume them.
class PhaseModel {
public:
    static PhaseModel sinusoidal(double omega, double zd) {
        return PhaseModel(PrcKind::Sinusoidal, omega, zd, 0.0);
    }
    static PhaseModel sniper(double omega, double zd) {
        return PhaseModel(PrcKind::Sniper, omega, zd, 0.0);
    }
    // Canonical theta neuron (zd = 1); omega normalizes to 2*sqrt(ib).
    static PhaseModel theta_neuron(double ib) {
        if (!(ib > 0.0)) throw std::invalid_argument("theta neuron requires ib > 0");
        return PhaseModel(PrcKind::ThetaNeuron, 2.0 * std::sqrt(ib), 1.0, ib);
    }

    PrcKind kind() const { return kind_; }
    double omega() const { return omega_; }
    double zd() const { return zd_; }
    double ib() const { return ib_; }

    double natural_period() const { return two_pi / omega_; }

    // Baseline dynamics f(theta).
    double f(double theta) const {
        if (kind_ == PrcKind::ThetaNeuron)
            return 1.0 + std::cos(theta) + zd_ * (1.0 - std::cos(theta)) * ib_;
        return omega_;
    }

    // Phase response Z(theta).
    double Z(double theta) const {
        return zd_ * prc_shape(theta);
    }

    double df(double theta) const {
        if (kind_ == PrcKind::ThetaNeuron)
            return -std::sin(theta) + zd_ * std::sin(theta) * ib_;
        return 0.0;
    }

    double dZ(double theta) const {
        if (kind_ == PrcKind::Sinusoidal) return zd_ * std::cos(theta);
        return zd_ * std::sin(theta);
    }

    // PRC shape S(theta) with Z = zd * S.
    double prc_shape(double theta) const {
        if (kind_ == PrcKind::Sinusoidal) return std::sin(theta);
        return 1.0 - std::cos(theta);
    }

    double prc_shape_derivative(double theta) const {
        if (kind_ == PrcKind::Sinusoidal) return std::cos(theta);
        return std::sin(theta);
    }

    // max_theta S(theta): 1 for sinusoidal, 2 for the 1-cos family.
    double prc_shape_max() const {
        return kind_ == PrcKind::Sinusoidal ? 1.0 : 2.0;
    }

    // Phase of the |Z| peak relevant to control saturation on (0, pi].
    double prc_peak() const {
        return kind_ == PrcKind::Sinusoidal ? 0.5 * std::numbers::pi : std::numbers::pi;
    }

    bool operator==(const PhaseModel&) const = default;

private:
    PhaseModel(PrcKind k, double omega, double zd, double ib)
        : kind_(k), omega_(omega), zd_(zd), ib_(ib) {
        if (!(omega_ > 0.0)) throw std::invalid_argument("omega must be > 0");
        if (!(zd_ > 0.0)) throw std::invalid_argument("zd must be > 0");
    }

    PrcKind kind_;
    double omega_;
    double zd_;
    double ib_;
};

/// Tangent half-angle bijection between the sniper phase phi and the theta
/// neuron phase on [0, 2*pi]:  theta(phi) = 2 atan(sqrt(ib) tan((phi-pi)/2)) + pi.
struct PhaseMap {
    double sqrt_ib;

    double to_theta(double phi) const {
        if (phi <= 0.0) return phi;              // endpoints map to endpoints
        if (phi >= two_pi) return phi;
        return 2.0 * std::atan(sqrt_ib * std::tan(0.5 * (phi - std::numbers::pi))) +
               std::numbers::pi;
    }

    double to_phi(double theta) const {
        if (theta <= 0.0) return theta;
        if (theta >= two_pi) return theta;
        return 2.0 * std::atan(std::tan(0.5 * (theta - std::numbers::pi)) / sqrt_ib) +
               std::numbers::pi;
    }
};

/// Reduce a theta neuron to its sniper surrogate: omega = 2 sqrt(ib),
/// zd = omega/2, plus the phase bijection.  All design routines run on the
/// returned sniper model; results transfer through the map.
inline std::pair<PhaseModel, PhaseMap> theta_to_sniper(const PhaseModel& m) {
    if (m.kind() != PrcKind::ThetaNeuron)
        throw std::invalid_argument("theta_to_sniper requires a theta neuron model");
    const double omega = 2.0 * std::sqrt(m.ib());
    return {PhaseModel::sniper(omega, 0.5 * omega), PhaseMap{std::sqrt(m.ib())}};
}

}  // namespace spikeopt
