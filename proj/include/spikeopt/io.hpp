#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <json.hpp>

#include "spikeopt/bounded.hpp"
#include "spikeopt/format.hpp"
#include "spikeopt/phase_model.hpp"
#include "spikeopt/transcription.hpp"

namespace spikeopt {

// Emission is hand-rolled so every number prints as %.17g and the byte
// layout is stable run to run; nlohmann is used for parsing only.

inline std::string model_json(const PhaseModel& m) {
    std::string out = "{\"kind\":\"";
    out += to_string(m.kind());
    out += "\",\"omega\":" + detail::g17(m.omega()) + ",\"zd\":" + detail::g17(m.zd());
    if (m.kind() == PrcKind::ThetaNeuron) out += ",\"ib\":" + detail::g17(m.ib());
    out += "}";
    return out;
}

/// Accepts {"kind": "sinusoidal"|"sniper"|"theta", "omega": x, "zd": x, "ib": x?}.
/// The theta neuron needs only ib (omega must equal 2*sqrt(ib) and zd 1 if
/// given).
inline PhaseModel parse_model(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind != "sinusoidal" && kind != "sniper" && kind != "theta")
        throw std::invalid_argument("unknown model kind: " + kind);
    if (kind == "theta") {
        const double ib = j.at("ib").get<double>();
        PhaseModel m = PhaseModel::theta_neuron(ib);
        if (j.contains("omega") &&
            std::abs(j["omega"].get<double>() - m.omega()) > 1e-9 * m.omega())
            throw std::invalid_argument("theta neuron has omega = 2*sqrt(ib)");
        if (j.contains("zd") && j["zd"].get<double>() != 1.0)
            throw std::invalid_argument("theta neuron is canonical: zd = 1");
        return m;
    }
    const double omega = j.at("omega").get<double>();
    const double zd = j.at("zd").get<double>();
    if (kind == "sinusoidal") return PhaseModel::sinusoidal(omega, zd);
    return PhaseModel::sniper(omega, zd);
}

inline std::string number_or_null(double v) {
    return std::isfinite(v) ? detail::g17(v) : std::string("null");
}

inline std::string bounds_json(const SpikeTimeBounds& b) {
    return "{\"t_bang_min\":" + detail::g17(b.t_bang_min) +
           ",\"t_analytic_min\":" + detail::g17(b.t_analytic_min) +
           ",\"t_analytic_max\":" + number_or_null(b.t_analytic_max) +
           ",\"t_bang_max\":" + number_or_null(b.t_bang_max) +
           ",\"bound\":" + detail::g17(b.bound) + "}";
}

inline std::string plan_json(const PiecewisePlan& p) {
    std::string out = "{\"model\":" + model_json(p.model) + ",\"bound\":";
    out += p.bound ? detail::g17(*p.bound) : std::string("null");
    out += ",\"lambda0\":" + detail::g17(p.lambda0) + ",\"segments\":[";
    bool first = true;
    for (const auto& s : p.segments) {
        if (!first) out += ',';
        first = false;
        out += "{\"from\":" + detail::g17(s.from) + ",\"to\":" + detail::g17(s.to) +
               ",\"kind\":\"" + to_string(s.kind) + "\"}";
    }
    out += "]}";
    return out;
}

inline std::string validation_json(const ValidationReport& r) {
    return "{\"e_analytic\":" + detail::g17(r.e_analytic) +
           ",\"e_oracle\":" + detail::g17(r.e_oracle) +
           ",\"rel_gap\":" + detail::g17(r.rel_gap) +
           ",\"max_dev\":" + detail::g17(r.max_dev) + ",\"n\":" + std::to_string(r.n) +
           ",\"converged\":" + (r.converged ? "true" : "false") +
           ",\"fail\":" + (r.fail ? "true" : "false") + "}";
}

}  // namespace spikeopt
