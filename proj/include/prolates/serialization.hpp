#ifndef PROLATES_SERIALIZATION_HPP
#define PROLATES_SERIALIZATION_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "prolates/chebyshev.hpp"
#include "prolates/monotonicity.hpp"
#include "prolates/phase.hpp"

namespace prolates {

// Schema: {"order": k, "breakpoints": [x0..xm], "coeffs": [[a0..ak], ...]}
inline nlohmann::json to_json(const PiecewiseChebyshev& f) {
    nlohmann::json j;
    j["order"] = f.order();
    j["breakpoints"] = f.breakpoints();
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& p : f.pieces()) coeffs.push_back(p.coeffs());
    j["coeffs"] = std::move(coeffs);
    return j;
}

inline PiecewiseChebyshev piecewise_from_json(const nlohmann::json& j) {
    std::vector<double> breaks = j.at("breakpoints").get<std::vector<double>>();
    std::vector<ChebyshevCoeffs> pieces;
    const auto& coeffs = j.at("coeffs");
    pieces.reserve(coeffs.size());
    for (size_t i = 0; i < coeffs.size(); ++i)
        pieces.emplace_back(coeffs[i].get<std::vector<double>>(), breaks[i], breaks[i + 1]);
    return PiecewiseChebyshev(std::move(breaks), std::move(pieces));
}

// Evaluator = phase-function record plus the (gamma, n, chi, C_n) header and
// the modulus data at 0 so accelerated seeds can be recovered from the file.
inline nlohmann::json to_json(const phase::ProlateEvaluator& ev) {
    nlohmann::json j;
    j["gamma"] = ev.params.gamma;
    j["n"] = ev.params.n;
    j["chi"] = ev.params.chi;
    j["parity"] = ev.params.parity == 0 ? "even" : "odd";
    j["c_n"] = ev.c_n;
    j["psi0"] = ev.psi0;
    j["beta"] = ev.phase.beta;
    j["x_end"] = ev.phase.x_end;
    j["truncated"] = ev.phase.truncated;
    j["w0"] = ev.phase.w0;
    j["w0p"] = ev.phase.w0p;
    j["w0pp"] = ev.phase.w0pp;
    j["psi"] = to_json(ev.phase.psi);
    j["w"] = to_json(ev.phase.w);
    return j;
}

inline phase::ProlateEvaluator evaluator_from_json(const nlohmann::json& j) {
    phase::ProlateEvaluator ev;
    ev.params = phase::ProlateParams(j.at("gamma").get<double>(), j.at("n").get<int>(),
                                     j.at("chi").get<double>());
    ev.c_n = j.at("c_n").get<double>();
    ev.psi0 = j.at("psi0").get<double>();
    ev.phase.beta = j.at("beta").get<double>();
    ev.phase.x_end = j.at("x_end").get<double>();
    ev.phase.truncated = j.at("truncated").get<bool>();
    ev.phase.gamma = ev.params.gamma;
    ev.phase.chi = ev.params.chi;
    ev.phase.w0 = j.at("w0").get<double>();
    ev.phase.w0p = j.at("w0p").get<double>();
    ev.phase.w0pp = j.at("w0pp").get<double>();
    ev.phase.psi = piecewise_from_json(j.at("psi"));
    ev.phase.w = piecewise_from_json(j.at("w"));
    return ev;
}

inline nlohmann::json to_json(const monotonicity::MonotonicityReport& rep) {
    nlohmann::json j;
    j["gamma"] = rep.gamma;
    j["n"] = rep.n;
    j["interval"] = {rep.lo, rep.hi};
    j["orders_requested"] = rep.orders_requested;
    j["grid_size"] = rep.grid_size;
    j["convention"] = rep.absolute ? "absolute" : "alternating";
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : rep.results) {
        results.push_back({{"order", r.order},
                           {"min", r.min_value},
                           {"scale", r.scale},
                           {"verdict", monotonicity::to_string(r.verdict)}});
    }
    j["orders"] = std::move(results);
    return j;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump();
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace prolates

#endif
