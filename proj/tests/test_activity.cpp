#include <doctest.h>

#include <cmath>
#include <numeric>

#include "agewire/activity.hpp"

using namespace agewire;

namespace {

// Weighted enumeration of every input vector, P(pin == 0) per site.
std::vector<double> brute_force_stress(const Netlist& n, const std::vector<double>& alpha_in) {
    std::vector<double> alpha(n.site_count(), 0.0);
    const std::size_t m = n.input_count();
    for (std::uint64_t v = 0; v < (1ULL << m); ++v) {
        double w = 1.0;
        for (std::size_t i = 0; i < m; ++i) w *= (v >> i & 1) ? 1.0 - alpha_in[i] : alpha_in[i];
        std::vector<bool> value(n.signal_count());
        for (std::size_t i = 0; i < m; ++i) value[i] = v >> i & 1;
        for (std::size_t g = 0; g < n.gate_count(); ++g) {
            const auto& gate = n.gates()[g];
            auto p = gate.pins();
            for (std::size_t k = 0; k < p.size(); ++k)
                if (!value[p[k].index]) alpha[n.site_index(GateId{static_cast<std::uint32_t>(g)}, k)] += w;
            value[gate.output.index] = eval_gate(gate.kind, value[p[0].index], p.size() > 1 && value[p[1].index],
                                                 p.size() > 2 && value[p[2].index]);
        }
    }
    return alpha;
}

}  // namespace

TEST_CASE("exhaustive stress matches weighted enumeration") {
    for (auto arch : {Architecture::Array, Architecture::Wallace}) {
        Netlist n = build_multiplier(arch, 3);
        n = apply_permutation(n, 1, Permutation::all(n.adder(1).inputs.size()).back());
        auto profile = InputProfile::uniform(n.input_count());
        profile.alpha_in = {0.1, 0.35, 0.5, 0.8, 0.95, 0.62};
        auto stress = compute_stress(n, profile);
        auto oracle = brute_force_stress(n, profile.alpha_in);
        REQUIRE(stress.alpha.size() == oracle.size());
        for (std::size_t s = 0; s < oracle.size(); ++s) CHECK(stress.alpha[s] == doctest::Approx(oracle[s]).epsilon(1e-12));
    }
}

TEST_CASE("reweight equals a fresh exhaustive pass") {
    Netlist n = build_array_multiplier(3);
    SignalActivity act(n, InputProfile::uniform(n.input_count()));
    std::vector<double> w = {0.2, 0.9, 0.4, 0.7, 0.3, 0.55};
    act.reweight(w);
    auto profile = InputProfile::uniform(n.input_count());
    profile.alpha_in = w;
    auto fresh = compute_stress(n, profile);
    auto got = act.stress(n);
    for (std::size_t s = 0; s < fresh.alpha.size(); ++s) CHECK(got.alpha[s] == doctest::Approx(fresh.alpha[s]).epsilon(1e-12));
}

TEST_CASE("sampled profile approaches the exhaustive one") {
    Netlist n = build_array_multiplier(4);
    auto exact = compute_stress(n, InputProfile::uniform(n.input_count()));
    auto sampled = compute_stress(n, InputProfile::sampled(n.input_count(), 20000, 11));
    double worst = 0;
    for (std::size_t s = 0; s < exact.alpha.size(); ++s) worst = std::max(worst, std::abs(exact.alpha[s] - sampled.alpha[s]));
    CHECK(worst < 0.03);
    CHECK(sampled.confidence.size() == sampled.alpha.size());
}

TEST_CASE("histogram covers every site") {
    Netlist n = build_wallace_multiplier(4);
    auto stress = compute_stress(n, InputProfile::uniform(n.input_count()));
    auto h = stress_histogram(stress, 10);
    CHECK(h.size() == 10);
    CHECK(std::accumulate(h.begin(), h.end(), std::size_t{0}) == n.site_count());
    CHECK(stress_variance(stress) > 0);
    CHECK_THROWS_AS(InputProfile::uniform(n.input_count(), 1.5).validate(n.input_count()), Error);
}
