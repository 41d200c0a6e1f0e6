#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spikeopt/unbounded.hpp"

using namespace spikeopt;
using Catch::Approx;

namespace {
const PhaseModel sin11 = PhaseModel::sinusoidal(1.0, 1.0);
const PhaseModel snip11 = PhaseModel::sniper(1.0, 1.0);
}  // namespace

TEST_CASE("optimal phase speed") {
    CHECK(optimal_phase_speed(sin11, 0.0, 1.234) == Approx(1.0));
    CHECK(optimal_phase_speed(PhaseModel::sniper(1.7, 0.6), 0.0, 3.0) == Approx(1.7));
    CHECK(optimal_phase_speed(sin11, -3.0, 0.5 * std::numbers::pi) == Approx(2.0));
    CHECK(optimal_phase_speed(snip11, 0.2, std::numbers::pi) ==
          Approx(std::sqrt(0.2)).epsilon(1e-14));
    CHECK_THROWS_AS(optimal_phase_speed(sin11, 1.0, 0.3), infeasible_costate_error);
    CHECK_THROWS_AS(optimal_phase_speed(snip11, 0.25, 0.3), infeasible_costate_error);
}

TEST_CASE("feasibility limits") {
    CHECK(feasibility_limit(sin11) == Approx(1.0));
    CHECK(feasibility_limit(snip11) == Approx(0.25));
    CHECK(feasibility_limit(PhaseModel::sniper(2.0, 0.5)) == Approx(2.0));
    CHECK_THROWS_AS(feasibility_limit(PhaseModel::theta_neuron(0.25)),
                    std::invalid_argument);
}

TEST_CASE("natural period at lambda0 = 0") {
    for (double w : {0.5, 1.0, 1.5, 2.0}) {
        CHECK(std::abs(spike_time(PhaseModel::sinusoidal(w, 1.0), 0.0) - two_pi / w) <=
              1e-10);
        CHECK(std::abs(spike_time(PhaseModel::sniper(w, 1.0), 0.0) - two_pi / w) <= 1e-10);
    }
    CHECK(spike_time(PhaseModel::sinusoidal(2.0, 1.0), 0.0) ==
          Approx(std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("spike time at the fast saturation costate reproduces the bounded minimum") {
    // lambda0 = -M(zd M + 2 w)/(w zd) for M = 2.5 saturates I* at theta = pi/2
    CHECK(spike_time(sin11, -11.25) == Approx(3.05596207388).epsilon(1e-9));
    CHECK(spike_time(sin11, -11.25) == Approx(3.056).epsilon(2e-4));
}

TEST_CASE("period map is monotone in lambda0") {
    double prev = 0.0;
    bool first = true;
    for (double l0 : {-20.0, -5.0, -1.0, 0.0, 0.3, 0.6, 0.9, 0.99}) {
        const double T = spike_time(sin11, l0);
        if (!first) CHECK(T > prev);
        prev = T;
        first = false;
    }
    prev = 0.0;
    first = true;
    for (double l0 : {-5.0, -1.0, 0.0, 0.1, 0.2, 0.24}) {
        const double T = spike_time(snip11, l0);
        if (!first) CHECK(T > prev);
        prev = T;
        first = false;
    }
}

TEST_CASE("period map inversion") {
    CHECK(std::abs(lambda0_for_spike_time(sin11, two_pi)) <= 1e-12);
    CHECK(std::abs(lambda0_for_spike_time(PhaseModel::sniper(2.0, 0.7), std::numbers::pi)) <=
          1e-12);

    const double l3 = lambda0_for_spike_time(sin11, 3.0);
    CHECK(l3 < 0.0);
    CHECK(l3 == Approx(-11.9705768234).epsilon(1e-8));
    CHECK(std::abs(spike_time(sin11, l3) - 3.0) <= 1e-8);

    const double l12 = lambda0_for_spike_time(sin11, 12.0);
    CHECK(l12 > 0.0);
    CHECK(l12 < 1.0);  // close under the lambda0 -> w/zd^2 blow-up
    CHECK(l12 == Approx(0.9586462962546).epsilon(1e-8));
    CHECK(std::abs(spike_time(sin11, l12) - 12.0) <= 1e-8);
}

TEST_CASE("round trip T <-> lambda0 across both sides of the natural period") {
    for (double T : {3.0, 4.0, 5.0, two_pi, 7.0, 9.0, 12.0}) {
        CHECK(std::abs(spike_time(sin11, lambda0_for_spike_time(sin11, T)) - T) <= 1e-8);
        CHECK(std::abs(spike_time(snip11, lambda0_for_spike_time(snip11, T)) - T) <= 1e-8);
    }
}

TEST_CASE("unattainable spiking times report the numeric range") {
    try {
        lambda0_for_spike_time(sin11, 1e4);
        FAIL("expected infeasible_time_error");
    } catch (const infeasible_time_error& e) {
        CHECK(e.requested == 1e4);
        CHECK(e.attainable_hi > 20.0);
        CHECK(e.attainable_hi < 1e4);
    }
}

TEST_CASE("feedback law") {
    CHECK(feedback_control(sin11, 0.0, 2.2) == 0.0);
    CHECK(feedback_control(sin11, -7.3, 0.0) == 0.0);  // removable singularity
    CHECK(feedback_control(sin11, -3.0, 0.5 * std::numbers::pi) == Approx(1.0));
    // conjugate evaluation agrees with the raw formula away from the PRC zeros
    for (double l0 : {-4.0, 0.7}) {
        for (double th : {0.3, 1.0, 2.0}) {
            const double raw =
                (-1.0 + optimal_phase_speed(sin11, l0, th)) / std::sin(th);
            CHECK(feedback_control(sin11, l0, th) == Approx(raw).epsilon(1e-12));
        }
    }
    // and lands exactly on the series limit -lambda0 zd S / 2 at the zero
    CHECK(std::abs(feedback_control(sin11, -4.0, 1e-9) - 2e-9) <= 1e-18);
}

TEST_CASE("costate") {
    CHECK(costate(sin11, -3.0, 0.0) == Approx(-3.0));
    CHECK(costate(snip11, 0.21, 0.0) == Approx(0.21));
    CHECK(costate(sin11, 0.0, 1.0) == 0.0);
    CHECK(costate(sin11, -3.0, 0.5 * std::numbers::pi) == Approx(-2.0));
}

TEST_CASE("design energy") {
    CHECK(design_energy(sin11, 0.0) == Approx(0.0).margin(1e-14));
    const double l28 = lambda0_for_spike_time(sin11, 2.8);
    CHECK(design_energy(sin11, l28) == Approx(13.32492023606).epsilon(1e-7));
    const double l10 = lambda0_for_spike_time(sin11, 10.0);
    CHECK(design_energy(sin11, l10) == Approx(2.227024344487).epsilon(1e-7));
    const double l5 = lambda0_for_spike_time(sin11, 5.0);
    CHECK(design_energy(sin11, l5) == Approx(0.7404617803124).epsilon(1e-7));
    CHECK(design_energy(snip11, lambda0_for_spike_time(snip11, 5.0)) ==
          Approx(0.2765869331215).epsilon(1e-7));
}

TEST_CASE("energy curve decreases toward the natural period and rises past it") {
    double prev = design_energy(sin11, lambda0_for_spike_time(sin11, 3.0));
    for (double T : {4.0, 5.0, 6.0, two_pi}) {
        const double e = design_energy(sin11, lambda0_for_spike_time(sin11, T));
        CHECK(e < prev);
        prev = e;
    }
    for (double T : {7.0, 8.0, 10.0, 12.0}) {
        const double e = design_energy(sin11, lambda0_for_spike_time(sin11, T));
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("energy sensitivity equals w lambda0") {
    CHECK(energy_sensitivity(sin11, 0.0) == 0.0);
    CHECK(energy_sensitivity(sin11, -0.4) == Approx(-0.4));
    CHECK(energy_sensitivity(PhaseModel::sniper(2.0, 1.0), 0.3) == Approx(0.6));

    // central finite differences of E(T) against w*lambda0
    const double h = 1e-3;
    for (double T : {5.0, 8.0}) {
        const double ep = design_energy(sin11, lambda0_for_spike_time(sin11, T + h));
        const double em = design_energy(sin11, lambda0_for_spike_time(sin11, T - h));
        const double fd = (ep - em) / (2.0 * h);
        const double analytic = energy_sensitivity(sin11, lambda0_for_spike_time(sin11, T));
        CHECK(std::abs(fd - analytic) <= 1e-4);
    }
}

TEST_CASE("Hamiltonian constancy and stationarity on random feasible designs") {
    std::mt19937 rng(42);
    auto unif = [&](double a, double b) {
        return a + (b - a) * (rng() * (1.0 / 4294967296.0));
    };
    for (int draw = 0; draw < 20; ++draw) {
        const bool sinusoidal = (rng() & 1u) != 0;
        const double w = unif(0.5, 2.0);
        const double zd = unif(0.5, 1.5);
        const PhaseModel m = sinusoidal ? PhaseModel::sinusoidal(w, zd)
                                        : PhaseModel::sniper(w, zd);
        const double limit = feasibility_limit(m);
        const double l0 = unif(-3.0 * limit, 0.95 * limit);
        const double scale = std::max(1.0, std::abs(w * l0));
        for (int i = 0; i <= 200; ++i) {
            const double th = two_pi * i / 200.0;
            const double I = feedback_control(m, l0, th);
            const double lam = costate(m, l0, th);
            const double H = I * I + lam * (w + m.Z(th) * I);
            CHECK(std::abs(H - w * l0) <= 1e-9 * scale);
            CHECK(std::abs(2.0 * I + lam * m.Z(th)) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("design_unbounded bundles the triple") {
    const auto d = design_unbounded(sin11, 5.0);
    CHECK(d.T == 5.0);
    CHECK(d.lambda0 == Approx(-1.379768482084).epsilon(1e-8));
    CHECK(d.E == Approx(0.7404617803124).epsilon(1e-7));
}
