#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spikeopt/transcription.hpp"

using namespace spikeopt;
using Catch::Approx;

namespace {
const PhaseModel sin11 = PhaseModel::sinusoidal(1.0, 1.0);
const PhaseModel snip11 = PhaseModel::sniper(1.0, 1.0);

TranscriptionSpec quick_spec(int n) {
    TranscriptionSpec s;
    s.steps = n;
    return s;
}
}  // namespace

TEST_CASE("spec validation") {
    TranscriptionSpec s;
    s.steps = 5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.steps = 100;
    s.penalty_weights = {1e3, 1e3};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.penalty_weights = {};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("reverse-accumulated gradient matches central differences") {
    const double T = 5.0;
    const int n = 60;
    std::mt19937 rng(7);
    auto unif = [&](double a, double b) {
        return a + (b - a) * (rng() * (1.0 / 4294967296.0));
    };
    std::vector<double> I(n);
    for (double& x : I) x = unif(-0.8, 0.8);

    const double mu = 0.37, wpen = 1e3;
    auto objective = [&](const std::vector<double>& c) {
        const double r = transcription_rollout(sin11, T, c).back() - two_pi;
        double e = 0.0;
        for (double v : c) e += v * v;
        return (T / n) * e + mu * r + 0.5 * wpen * r * r;
    };
    const auto grad = transcription_gradient(sin11, T, I, mu, wpen);

    for (int trial = 0; trial < 20; ++trial) {
        const int k = static_cast<int>(rng() % n);
        const double h = 3e-5 * (1.0 + std::abs(I[k]));
        auto Ip = I, Im = I;
        Ip[k] += h;
        Im[k] -= h;
        const double fd = (objective(Ip) - objective(Im)) / (2.0 * h);
        CHECK(grad[k] == Approx(fd).epsilon(1e-6).margin(1e-10));
    }
}

TEST_CASE("natural-period target needs essentially no control") {
    auto res = brute_force_design(sin11, two_pi, std::nullopt, quick_spec(200));
    CHECK(res.converged);
    CHECK(res.energy <= 1e-6);
    CHECK(std::abs(res.residual) <= 1e-6);
}

TEST_CASE("oracle energy approaches the analytic optimum from above as N grows") {
    const double e_analytic = 10.6392032229;  // sinusoidal T=3 unconstrained
    double prev = 1e9;
    for (int n : {250, 500, 1000}) {
        const auto res = brute_force_design(sin11, 3.0, std::nullopt, quick_spec(n));
        CHECK(res.converged);
        CHECK(res.energy >= e_analytic - std::max(1e-6, 20.0 * e_analytic / n));
        CHECK(res.energy <= e_analytic * 1.02);
        CHECK(res.energy <= prev + 1e-4 * e_analytic);
        prev = res.energy;
    }
}

TEST_CASE("bounded oracle saturates where the switched plan saturates") {
    const double M = 2.5;
    const auto res = brute_force_design(sin11, 2.8, M, quick_spec(800));
    REQUIRE(res.converged);
    CHECK(res.energy == Approx(13.8759426291).epsilon(5e-3));

    const auto plan = build_plan(sin11, M, 2.8);
    const auto sw = plan.interior_switches();
    // oracle's saturated phase bands against the computed switching angles
    std::vector<std::pair<double, double>> runs;
    bool in_run = false;
    const double tol = M * (1.0 - 1e-6);
    for (std::size_t k = 0; k < res.control.size(); ++k) {
        const bool sat = std::abs(res.control[k]) >= tol;
        if (sat && !in_run) {
            runs.emplace_back(res.theta[k], 0.0);
            in_run = true;
        }
        if (!sat && in_run) {
            runs.back().second = res.theta[k];
            in_run = false;
        }
    }
    REQUIRE(runs.size() == 2);
    const double cell = two_pi / 800.0 * 3.0;  // a few grid cells of slack
    CHECK(std::abs(runs[0].first - sw[0]) <= cell);
    CHECK(std::abs(runs[0].second - sw[1]) <= cell);
    CHECK(std::abs(runs[1].first - sw[2]) <= cell);
    CHECK(std::abs(runs[1].second - sw[3]) <= cell);
}

TEST_CASE("compare_with_analytic") {
    auto spec = quick_spec(600);

    const auto natural = compare_with_analytic(sin11, two_pi, std::nullopt, spec);
    CHECK(natural.converged);
    CHECK_FALSE(natural.fail);
    CHECK(std::abs(natural.rel_gap) <= 0.02);

    const auto unb = compare_with_analytic(sin11, 3.0, std::nullopt, spec);
    CHECK(unb.converged);
    CHECK_FALSE(unb.fail);
    CHECK(unb.e_analytic == Approx(10.6392032229).epsilon(1e-7));
    CHECK(std::abs(unb.rel_gap) <= 0.02);

    const auto sn = compare_with_analytic(snip11, 9.8, 0.3, spec);
    CHECK(sn.converged);
    CHECK_FALSE(sn.fail);
    CHECK(std::abs(sn.rel_gap) <= 0.02);
    CHECK(sn.n == 600);
}

TEST_CASE("starved optimizer reports non-convergence") {
    TranscriptionSpec s;
    s.steps = 100;
    s.penalty_weights = {1.0};
    s.max_iters = 1;
    const auto res = brute_force_design(sin11, 3.0, std::nullopt, s);
    CHECK_FALSE(res.converged);
    CHECK(std::abs(res.residual) > 1e-6);
}
