#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "agewire/activity.hpp"
#include "agewire/circuit.hpp"

namespace agewire {

/// Constants of the reaction-diffusion NBTI model and the alpha-power delay law.
struct AgingParams {
    double v_dd = 0.8;
    double v_th_nominal = 0.45;
    double sigma_vth = 0.02;
    /// Calibrated: natural aging of the untampered 8-bit array multiplier
    /// (uniform inputs, no variation) gives +10% critical-path delay at 4 years.
    double k_p = kCalibratedKp;
    double lambda = 1.0 / 6.0;
    double beta = 0.0;
    double t_data_per_year = 31557600.0;
    double delay_exponent = 1.3;
    double headroom = 0.05;
    std::array<double, kGateKindCount> nominal_delay = {1.0, 1.2, 1.4, 2.0, 2.2};

    static constexpr double kCalibratedKp = 1.58105516243305e-09;

    void validate() const;
    double d0(GateKind kind) const { return nominal_delay[static_cast<std::size_t>(kind)]; }
};

void to_json(nlohmann::json& j, const AgingParams& p);
void from_json(const nlohmann::json& j, AgingParams& p);

/// |dVth(t)| = ( sqrt(Kp^2 * alpha * T_data) / (1 - beta^(1/(2 lambda))) )^(2 lambda)
double delta_vth(double alpha, double t_years, const AgingParams& params);

/// i.i.d. N(0, sigma^2) offsets, reproducible from seed.
std::vector<double> sample_pv(std::size_t n_sites, double sigma_vth, std::uint64_t seed);

struct TransistorState {
    double vth0 = 0.45;
    double alpha = 0.0;
};

struct Vth {
    double volts = 0.0;
    bool saturated = false;
};

/// vth0 + dVth(alpha, t), clamped at v_dd - headroom.
Vth vth_at(const TransistorState& state, double t_years, const AgingParams& params);

struct GateDelay {
    double delay = 0.0;
    bool saturated = false;
};

/// d0(kind) * ((v_dd - v_th_nominal) / (v_dd - max_pin vth(t)))^a
GateDelay gate_delay(GateKind kind, std::span<const TransistorState> pin_states, double t_years,
                     const AgingParams& params);

/// Per-site states at the nominal corner with stress from `stress`, optionally
/// offset by process variation (one entry per site).
std::vector<TransistorState> make_states(const StressMap& stress, const AgingParams& params,
                                         std::span<const double> pv_delta = {});

struct DelayVector {
    std::vector<double> delay;  // per gate
    bool saturated = false;
};

DelayVector gate_delays(const Netlist& netlist, std::span<const TransistorState> states, double t_years,
                        const AgingParams& params);

}  // namespace agewire
