#include "agewire/aging.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "agewire/rng.hpp"

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("aging", what); }

}  // namespace

void AgingParams::validate() const {
    if (!(v_dd > v_th_nominal && v_th_nominal > 0)) fail("need v_dd > v_th_nominal > 0");
    if (!(sigma_vth >= 0)) fail("sigma_vth must be >= 0");
    if (!(k_p >= 0)) fail("k_p must be >= 0");
    if (!(lambda > 0)) fail("lambda must be > 0");
    if (!(beta >= 0 && beta < 1)) fail("beta must be in [0, 1)");
    if (!(t_data_per_year > 0)) fail("t_data_per_year must be > 0");
    if (!(delay_exponent > 0)) fail("delay_exponent must be > 0");
    if (!(headroom > 0 && headroom < v_dd - v_th_nominal)) fail("headroom must be in (0, v_dd - v_th_nominal)");
    for (double d : nominal_delay)
        if (!(d > 0)) fail("nominal gate delays must be > 0");
}

void to_json(nlohmann::json& j, const AgingParams& p) {
    nlohmann::json delays;
    for (std::size_t k = 0; k < kGateKindCount; ++k)
        delays[std::string(to_string(static_cast<GateKind>(k)))] = p.nominal_delay[k];
    j = {{"v_dd", p.v_dd},
         {"v_th_nominal", p.v_th_nominal},
         {"sigma_vth", p.sigma_vth},
         {"k_p", p.k_p},
         {"k_p_calibrated", p.k_p == AgingParams::kCalibratedKp},
         {"lambda", p.lambda},
         {"beta", p.beta},
         {"t_data_per_year", p.t_data_per_year},
         {"delay_exponent", p.delay_exponent},
         {"headroom", p.headroom},
         {"nominal_delay", delays}};
}

void from_json(const nlohmann::json& j, AgingParams& p) {
    p = AgingParams{};
    auto get = [&](const char* name, double& field) {
        if (j.contains(name)) field = j.at(name).get<double>();
    };
    get("v_dd", p.v_dd);
    get("v_th_nominal", p.v_th_nominal);
    get("sigma_vth", p.sigma_vth);
    get("k_p", p.k_p);
    get("lambda", p.lambda);
    get("beta", p.beta);
    get("t_data_per_year", p.t_data_per_year);
    get("delay_exponent", p.delay_exponent);
    get("headroom", p.headroom);
    if (j.contains("nominal_delay"))
        for (auto& [name, value] : j.at("nominal_delay").items())
            p.nominal_delay[static_cast<std::size_t>(parse_gate_kind(name))] = value.get<double>();
    p.validate();
}

double delta_vth(double alpha, double t_years, const AgingParams& params) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha outside [0, 1]");
    if (!(t_years >= 0.0)) fail("negative age");
    if (alpha == 0.0 || t_years == 0.0 || params.k_p == 0.0) return 0.0;
    const double t_data = t_years * params.t_data_per_year;
    const double exponent = 2.0 * params.lambda;
    const double recovery = 1.0 - std::pow(params.beta, 1.0 / exponent);
    const double base = std::sqrt(params.k_p * params.k_p * alpha * t_data) / recovery;
    return std::pow(base, exponent);
}

std::vector<double> sample_pv(std::size_t n_sites, double sigma_vth, std::uint64_t seed) {
    if (!(sigma_vth >= 0)) fail("sigma_vth must be >= 0");
    std::vector<double> out(n_sites, 0.0);
    if (sigma_vth == 0.0) return out;
    std::mt19937_64 rng(key(seed, 0x9f));
    std::normal_distribution<double> normal(0.0, sigma_vth);
    for (auto& v : out) v = normal(rng);
    return out;
}

Vth vth_at(const TransistorState& state, double t_years, const AgingParams& params) {
    const double limit = params.v_dd - params.headroom;
    const double v = state.vth0 + delta_vth(state.alpha, t_years, params);
    if (v >= limit) return {limit, true};
    return {v, false};
}

GateDelay gate_delay(GateKind kind, std::span<const TransistorState> pin_states, double t_years,
                     const AgingParams& params) {
    if (pin_states.size() != arity(kind)) fail("gate_delay needs one state per PMOS pin");
    double worst = 0.0;
    bool saturated = false;
    for (const auto& s : pin_states) {
        Vth v = vth_at(s, t_years, params);
        worst = std::max(worst, v.volts);
        saturated = saturated || v.saturated;
    }
    const double ratio = (params.v_dd - params.v_th_nominal) / (params.v_dd - worst);
    return {params.d0(kind) * std::pow(ratio, params.delay_exponent), saturated};
}

std::vector<TransistorState> make_states(const StressMap& stress, const AgingParams& params,
                                         std::span<const double> pv_delta) {
    if (!pv_delta.empty() && pv_delta.size() != stress.alpha.size()) fail("process-variation vector size mismatch");
    std::vector<TransistorState> states(stress.alpha.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].alpha = stress.alpha[i];
        states[i].vth0 = params.v_th_nominal + (pv_delta.empty() ? 0.0 : pv_delta[i]);
        if (!(states[i].vth0 > 0)) fail("initial threshold voltage must stay positive");
    }
    return states;
}

DelayVector gate_delays(const Netlist& netlist, std::span<const TransistorState> states, double t_years,
                        const AgingParams& params) {
    if (states.size() != netlist.site_count()) fail("state vector does not cover every PMOS site");
    DelayVector out;
    out.delay.resize(netlist.gate_count());
    for (std::size_t g = 0; g < netlist.gate_count(); ++g) {
        const Gate& gate = netlist.gates()[g];
        GateDelay d = gate_delay(gate.kind, states.subspan(netlist.first_site(GateId{static_cast<std::uint32_t>(g)}),
                                                           arity(gate.kind)),
                                 t_years, params);
        out.delay[g] = d.delay;
        out.saturated = out.saturated || d.saturated;
    }
    return out;
}

}  // namespace agewire
